//! Exact torus integrals, loops, and path integrals of 1-forms.

use std::f64::consts::TAU;
use std::fmt;

use crate::calculus::chart::{Chart, CoordKind};
use crate::calculus::form::Form;
use crate::calculus::maps::{ChartMap, CoordImage};
use crate::calculus::scalar::ScalarField;
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, to_f64, Rational};

/// `rational · (2π)^two_pi_power`
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPiMultiple {
    pub rational: Rational,
    pub two_pi_power: u32,
}

impl TwoPiMultiple {
    pub fn to_f64(&self) -> f64 {
        to_f64(&self.rational) * TAU.powi(self.two_pi_power as i32)
    }
}

impl fmt::Display for TwoPiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*(2pi)^{}", fmt_rational(&self.rational), self.two_pi_power)
    }
}

/// ∫_{Tⁿ} ω for a top-degree form with polynomial (no denominator) coefficient.
pub fn integrate_torus(chart: &Chart, w: &Form) -> Result<TwoPiMultiple> {
    if !chart.fully_periodic() {
        return Err(Error::Domain("torus integration needs a fully periodic chart".into()));
    }
    let n = chart.dim() as u32;
    let top = (1u32 << n) - 1;
    if !w.has_degree(n) {
        return Err(Error::Degree(format!("integrand must be an {n}-form")));
    }
    let f = w.get(top);
    let s = f
        .as_scalar()
        .ok_or_else(|| Error::Domain("torus integrand must have a polynomial coefficient".into()))?;
    Ok(TwoPiMultiple { rational: s.constant_term(), two_pi_power: n })
}

/// One coordinate of a loop as a function of the parameter φ ∈ [0, 2π]:
/// `winding·φ + expr(φ)` (winding only for periodic coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct LoopComponent {
    pub winding: i64,
    /// trig polynomial in φ (coordinate 0 of the parameter circle)
    pub expr: ScalarField,
}

/// A closed path γ: S¹ → chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    components: Vec<LoopComponent>,
}

impl Loop {
    pub fn new(chart: &Chart, components: Vec<LoopComponent>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::Structural("loop needs one component per coordinate".into()));
        }
        let param = Chart::circle();
        for (i, c) in components.iter().enumerate() {
            c.expr.validate(&param)?;
            if c.winding != 0 && chart.kind(i) != CoordKind::Periodic {
                return Err(Error::Domain(format!(
                    "loop cannot wind around non-periodic coordinate {}",
                    chart.label(i)
                )));
            }
        }
        Ok(Loop { components })
    }

    /// Winding once around periodic coordinate `i`, all other coordinates at `base`.
    pub fn generator(chart: &Chart, i: usize, base: &[Rational]) -> Result<Self> {
        let comps = (0..chart.dim())
            .map(|j| LoopComponent {
                winding: (j == i) as i64,
                expr: ScalarField::constant(base.get(j).cloned().unwrap_or_else(crate::rational::zero)),
            })
            .collect();
        Self::new(chart, comps)
    }

    pub fn components(&self) -> &[LoopComponent] {
        &self.components
    }

    pub fn point(&self, phi: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.winding as f64 * phi + c.expr.eval(&[phi])).collect()
    }

    pub fn velocity(&self, phi: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.winding as f64 + c.expr.partial(0).eval(&[phi])).collect()
    }

    pub fn basepoint(&self) -> Vec<f64> {
        self.point(0.0)
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let param = Chart::circle();
        let flip = ChartMap::new(param.clone(), param, vec![CoordImage::Angle(vec![(0, -1)])]).unwrap();
        Loop {
            components: self
                .components
                .iter()
                .map(|c| LoopComponent { winding: -c.winding, expr: flip.pull_scalar(&c.expr).unwrap() })
                .collect(),
        }
    }

    /// The loop as an exact chart map from the parameter circle, when every
    /// periodic component is a pure winding.
    pub fn exact_map(&self, chart: &Chart) -> Option<ChartMap> {
        let images = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if chart.kind(i) == CoordKind::Real {
                    Some(CoordImage::Expr(c.expr.clone()))
                } else if c.expr.is_zero() {
                    Some(CoordImage::Angle(vec![(0, c.winding)]))
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()?;
        ChartMap::new(Chart::circle(), chart.clone(), images).ok()
    }

    /// Numerical value of ω(γ′(φ)).
    pub fn integrand(&self, w: &Form, phi: f64) -> f64 {
        w.eval_one_form(&self.point(phi), &self.velocity(phi))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathIntegral {
    Exact(TwoPiMultiple),
    Numeric { value: f64, abs_err: f64 },
}

impl PathIntegral {
    pub fn value(&self) -> f64 {
        match self {
            PathIntegral::Exact(t) => t.to_f64(),
            PathIntegral::Numeric { value, .. } => *value,
        }
    }
}

/// ∮_γ ω: exact when γ is a pure winding loop and the pulled-back integrand
/// is a trig polynomial, otherwise adaptive Simpson quadrature.
pub fn integrate_path(chart: &Chart, w: &Form, gamma: &Loop) -> Result<PathIntegral> {
    if !w.has_degree(1) {
        return Err(Error::Degree("path integrals need a 1-form".into()));
    }
    w.validate(chart)?;
    if let Some(map) = gamma.exact_map(chart) {
        let pulled = map.pull_form(w)?;
        if let Some(g) = pulled.get(1).as_scalar() {
            let (_, token) = Chart::circle().unwrap_coordinate(0)?;
            let prim = g.antiderivative(0, &token)?;
            // harmonics are periodic, so only the φ-linear part survives G(2π) − G(0)
            let mut total = crate::rational::zero();
            for (k, c) in prim.terms() {
                match k.mono.as_slice() {
                    [] => {}
                    [(0, 1)] if k.kind == crate::calculus::scalar::Harmonic::One => total += c,
                    _ => {
                        return Ok(numeric_path(w, gamma));
                    }
                }
            }
            return Ok(PathIntegral::Exact(TwoPiMultiple { rational: total, two_pi_power: 1 }));
        }
    }
    Ok(numeric_path(w, gamma))
}

fn numeric_path(w: &Form, gamma: &Loop) -> PathIntegral {
    let (value, abs_err) = adaptive_simpson(&|phi| gamma.integrand(w, phi), 0.0, TAU, 1e-12, 40);
    PathIntegral::Numeric { value, abs_err }
}

/// Adaptive Simpson quadrature; returns (value, error estimate).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> (f64, f64) {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return (left + right + delta / 15.0, delta.abs() / 15.0);
        }
        let (l, el) = rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
        let (r, er) = rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
        (l + r, el + er)
    }
    // start from a few panels so periodic integrands are not mistaken for flat ones
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = (0.0, 0.0);
    for p in 0..panels {
        let (x0, x1) = (a + h * p as f64, a + h * (p + 1) as f64);
        let (fa, fm, fb) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let (v, e) = rec(f, x0, x1, fa, fm, fb, simpson(fa, fm, fb, x0, x1), tol / panels as f64, max_depth);
        total.0 += v;
        total.1 += e;
    }
    total
}
