//! Pointwise positivity: exact certificates where cheap, otherwise a sample
//! grid whose result is flagged as sampled.

use crate::calculus::chart::{Chart, CoordKind};
use crate::calculus::rational_field::RationalField;
use crate::calculus::scalar::ScalarField;

#[derive(Clone, Debug, PartialEq)]
pub enum Positivity {
    Certified(&'static str),
    /// positive on every grid sample; not a proof
    Sampled { min: f64, samples: usize },
    Fails { at: Vec<f64>, value: f64 },
}

impl Positivity {
    pub fn holds(&self) -> bool {
        !matches!(self, Positivity::Fails { .. })
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, Positivity::Sampled { .. })
    }
}

/// Sample grid: periodic coordinates over [0, 2π), others over `real_range`
/// (overridable per coordinate).
#[derive(Clone, Debug)]
pub struct SampleDomain {
    pub per_axis: usize,
    pub real_range: (f64, f64),
    pub overrides: Vec<(usize, (f64, f64))>,
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain { per_axis: 12, real_range: (-1.0, 1.0), overrides: Vec::new() }
    }
}

impl SampleDomain {
    pub fn with_range(mut self, coord: usize, lo: f64, hi: f64) -> Self {
        self.overrides.push((coord, (lo, hi)));
        self
    }

    pub fn points(&self, chart: &Chart) -> Vec<Vec<f64>> {
        let n = chart.dim();
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let m = self.per_axis.max(2);
                if chart.kind(i) == CoordKind::Periodic {
                    (0..m).map(|j| std::f64::consts::TAU * j as f64 / m as f64).collect()
                } else {
                    let (lo, hi) = self
                        .overrides
                        .iter()
                        .find(|(c, _)| *c == i)
                        .map(|(_, r)| *r)
                        .unwrap_or(self.real_range);
                    (0..m).map(|j| lo + (hi - lo) * j as f64 / (m - 1) as f64).collect()
                }
            })
            .collect();
        let mut pts = vec![Vec::new()];
        for axis in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

/// Exact certificate for a trig polynomial, if one of the cheap ones applies.
pub fn certify_scalar(f: &ScalarField) -> Option<&'static str> {
    if let Some(c) = f.as_constant() {
        return (c > num_traits::Zero::zero()).then_some("positive constant");
    }
    if f.terms().any(|(k, _)| !k.mono.is_empty()) {
        return None;
    }
    let mut bound = num_traits::Zero::zero();
    for (k, c) in f.terms() {
        if !k.is_constant() {
            bound += num_traits::Signed::abs(c);
        }
    }
    (f.constant_term() > bound).then_some("constant term dominates harmonics")
}

pub fn check_positive(f: &RationalField, chart: &Chart, domain: &SampleDomain) -> Positivity {
    let num_ok = certify_scalar(f.numerator());
    let den_ok = f.denominator_atoms().iter().all(|(a, e)| e % 2 == 0 || certify_scalar(a).is_some());
    if let (Some(reason), true) = (num_ok, den_ok) {
        return Positivity::Certified(reason);
    }
    let pts = domain.points(chart);
    let mut min = f64::INFINITY;
    for p in &pts {
        let v = f.eval(p);
        if !(v > 0.0) {
            return Positivity::Fails { at: p.clone(), value: v };
        }
        min = min.min(v);
    }
    Positivity::Sampled { min, samples: pts.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn certificates() {
        let g = ScalarField::constant(int(2)).add(&ScalarField::cos(&[(0, 1)]));
        assert!(certify_scalar(&g).is_some());
        let h = ScalarField::constant(int(1)).add(&ScalarField::cos(&[(0, 1)]));
        assert!(certify_scalar(&h).is_none());
    }

    #[test]
    fn sampled_and_failing() {
        let chart = Chart::from_flags(&[("s", false)]).unwrap();
        let f = ScalarField::constant(int(2)).add(&ScalarField::coord(0));
        let p = check_positive(&f.clone().into(), &chart, &SampleDomain::default());
        assert!(p.is_sampled() && p.holds());
        let dom = SampleDomain::default().with_range(0, -3.0, 0.0);
        assert!(!check_positive(&f.into(), &chart, &dom).holds());
    }
}
