//! Jet-level monodromy of impotent cords along loops.
//!
//! Along γ the leaves of B = A − dt satisfy dt/dφ = f(t, φ) with
//! f(t, φ) = Σ_m a_m(γ(φ))(γ′(φ)) t^m. Writing t(φ) = Σ c_m(φ) t₀^m turns this
//! into a triangular system for the c_m, integrated over φ ∈ [0, 2π].

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::calculus::{integrate_path, Chart, Loop, PathIntegral};
use crate::cord::{is_impotent, GaugeSection, JetForm};
use crate::error::{Error, Result};
use crate::jet::{compose_components, invert_components};
use crate::series::Series;

#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    /// RK4 step as a fraction of the loop parameter interval
    pub step: f64,
    /// largest acceptable relative error estimate per coefficient
    pub tol: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { step: 1e-3, tol: 1e-6 }
    }
}

/// φ(t) = Σ_{m≥1} c_m t^m with an error estimate per coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyJet {
    /// c_0, …, c_N with c_0 = 0
    coeffs: Vec<f64>,
    errors: Vec<f64>,
}

impl HolonomyJet {
    pub fn identity(order: u32) -> Self {
        let mut coeffs = vec![0.0; order as usize + 1];
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        HolonomyJet { errors: vec![0.0; coeffs.len()], coeffs }
    }

    /// From c_0, …, c_N; c_0 must vanish and c_1 be positive.
    pub fn new(coeffs: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs[0] != 0.0 || coeffs[1] <= 0.0 || errors.len() != coeffs.len() {
            return Err(Error::Domain("a holonomy jet fixes 0 and has positive linear part".into()));
        }
        Ok(HolonomyJet { coeffs, errors })
    }

    pub fn order(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn coeff(&self, m: u32) -> f64 {
        self.coeffs.get(m as usize).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn linear(&self) -> f64 {
        self.coeffs[1]
    }

    fn series(&self) -> Series<f64> {
        Series::univariate(self.order(), self.coeffs.clone())
    }

    fn from_series(s: &Series<f64>, errors: Vec<f64>) -> Self {
        let coeffs = (0..=s.order()).map(|m| s.coeff1(m)).collect();
        HolonomyJet { coeffs, errors }
    }

    /// Largest coefficientwise difference relative to max(1, |c_m|).
    pub fn residual(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len()) as u32;
        (0..n)
            .map(|m| {
                let (a, b) = (self.coeff(m), other.coeff(m));
                (a - b).abs() / a.abs().max(b.abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// outer(inner(t)); error estimates are propagated to first order only
/// through the linear coefficients.
pub fn compose(inner: &HolonomyJet, outer: &HolonomyJet) -> Result<HolonomyJet> {
    let c = compose_components(&[inner.series()], &[outer.series()])?;
    let errors = inner
        .errors
        .iter()
        .zip(&outer.errors)
        .map(|(a, b)| a * outer.linear().abs() + b * inner.linear().abs())
        .collect();
    Ok(HolonomyJet::from_series(&c[0], errors))
}

pub fn invert(j: &HolonomyJet) -> Result<HolonomyJet> {
    let inv = invert_components(&[j.series()], &[0.0])?;
    let scale = 1.0 / (j.linear() * j.linear());
    Ok(HolonomyJet::from_series(&inv[0], j.errors.iter().map(|e| e * scale).collect()))
}

/// Truncated power series product, c_0 = 0 assumed for neither operand.
fn poly_mul(a: &[f64], b: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let n = out.len();
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
}

/// dc/dφ = Σ_m f_m c^m, truncated at the length of c.
fn rhs(f: &[f64], c: &[f64], out: &mut [f64]) {
    let n = c.len();
    let mut pow = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    out.iter_mut().for_each(|x| *x = 0.0);
    pow.copy_from_slice(c);
    for fm in f.iter().skip(1) {
        if *fm != 0.0 {
            for (o, p) in out.iter_mut().zip(&pow) {
                *o += fm * p;
            }
        }
        poly_mul(&pow, c, &mut tmp);
        std::mem::swap(&mut pow, &mut tmp);
    }
}

/// RK4 with `n` steps over s ∈ [0, 1] on samples f[i] of the coefficient
/// functions at s = i/(2n·stride) (every half step when stride = 1).
fn rk4(samples: &[Vec<f64>], n: usize, stride: usize, order: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut c = vec![0.0; order + 1];
    c[1] = 1.0;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; order + 1], vec![0.0; order + 1], vec![0.0; order + 1], vec![0.0; order + 1]);
    let mut tmp = vec![0.0; order + 1];
    for i in 0..n {
        let (f0, fm, f1) = (&samples[2 * i * stride], &samples[(2 * i + 1) * stride], &samples[(2 * i + 2) * stride]);
        rhs(f0, &c, &mut k1);
        for m in 0..=order {
            tmp[m] = c[m] + 0.5 * h * k1[m];
        }
        rhs(fm, &tmp, &mut k2);
        for m in 0..=order {
            tmp[m] = c[m] + 0.5 * h * k2[m];
        }
        rhs(fm, &tmp, &mut k3);
        for m in 0..=order {
            tmp[m] = c[m] + h * k3[m];
        }
        rhs(f1, &tmp, &mut k4);
        for m in 0..=order {
            c[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        }
    }
    c
}

fn check_transportable(a: &JetForm) -> Result<()> {
    if !is_impotent(a) {
        return Err(Error::Domain("transport needs an impotent cord".into()));
    }
    if a.k() != 1 || a.degree() != 1 {
        return Err(Error::Domain("transport is for codimension-one cords".into()));
    }
    Ok(())
}

/// Transport along a path s ∈ [0, 1] ↦ (point, velocity). The path's
/// endpoints need not coincide.
pub fn transport_path(
    a: &JetForm,
    chart: &Chart,
    path: impl Fn(f64) -> (Vec<f64>, Vec<f64>),
    opts: &TransportOptions,
) -> Result<HolonomyJet> {
    check_transportable(a)?;
    a.coeff1(0).validate(chart)?;
    let order = a.order() as usize;
    let n = (1.0 / opts.step).ceil().max(1.0) as usize;
    let forms: Vec<_> = (0..=order as u32).map(|m| a.coeff1(m)).collect();
    // quarter-step grid serves both the n-step and the 2n-step runs
    let samples: Vec<Vec<f64>> = (0..=4 * n)
        .map(|i| {
            let (x, v) = path(i as f64 / (4 * n) as f64);
            forms.iter().map(|w| w.eval_one_form(&x, &v)).collect()
        })
        .collect();
    let coarse = rk4(&samples, n, 2, order);
    let fine = rk4(&samples, 2 * n, 1, order);
    let mut coeffs = vec![0.0; order + 1];
    let mut errors = vec![0.0; order + 1];
    for m in 1..=order {
        coeffs[m] = (16.0 * fine[m] - coarse[m]) / 15.0;
        errors[m] = (fine[m] - coarse[m]).abs() / 15.0;
        let rel = errors[m] / coeffs[m].abs().max(1.0);
        if !rel.is_finite() || rel > opts.tol {
            return Err(Error::Tolerance { what: format!("holonomy coefficient c{m}"), achieved: rel, wanted: opts.tol });
        }
    }
    HolonomyJet::new(coeffs, errors)
}

/// Transport the holonomy jet of an impotent cord once around γ.
pub fn transport(a: &JetForm, chart: &Chart, gamma: &Loop, opts: &TransportOptions) -> Result<HolonomyJet> {
    transport_path(
        a,
        chart,
        |s| (gamma.point(TAU * s), gamma.velocity(TAU * s).into_iter().map(|v| v * TAU).collect()),
        opts,
    )
}

/// A word in generator loops: (index, +1 or −1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word(pub Vec<(usize, i8)>);

/// φ of the concatenated loop; φ_{γ₁·γ₂} = φ_{γ₂} ∘ φ_{γ₁}. Inverse letters
/// are transported along the reversed loop.
pub fn monodromy_word(
    a: &JetForm,
    chart: &Chart,
    generators: &[Loop],
    word: &Word,
    opts: &TransportOptions,
) -> Result<HolonomyJet> {
    let base = generators.first().map(|g| g.basepoint());
    for g in generators {
        let p = g.basepoint();
        if base.as_ref().is_some_and(|b| b.iter().zip(&p).any(|(x, y)| (x - y).abs() > 1e-12)) {
            return Err(Error::Domain("generators do not share a basepoint".into()));
        }
    }
    for &(i, e) in &word.0 {
        if i >= generators.len() || !(e == 1 || e == -1) {
            return Err(Error::Structural(format!("bad letter ({i}, {e})")));
        }
    }
    let letters: Vec<(usize, i8)> = {
        let mut v: Vec<_> = word.0.clone();
        v.sort();
        v.dedup();
        v
    };
    let jets: Vec<((usize, i8), HolonomyJet)> = letters
        .par_iter()
        .map(|&(i, e)| {
            let g = if e == 1 { generators[i].clone() } else { generators[i].reversed() };
            transport(a, chart, &g, opts).map(|j| ((i, e), j))
        })
        .collect::<Result<_>>()?;
    let mut acc = HolonomyJet::identity(a.order());
    for letter in &word.0 {
        let j = &jets.iter().find(|(l, _)| l == letter).expect("transported above").1;
        acc = compose(&acc, j)?;
    }
    Ok(acc)
}

/// Transported linear coefficient against exp(∮_γ a₁).
#[derive(Clone, Debug)]
pub struct FirstOrderReport {
    pub transported: f64,
    pub integral: PathIntegral,
    pub predicted: f64,
    pub rel_err: f64,
}

pub fn first_order_check(a: &JetForm, chart: &Chart, gamma: &Loop, opts: &TransportOptions) -> Result<FirstOrderReport> {
    let jet = transport(a, chart, gamma, opts)?;
    let integral = integrate_path(chart, &a.coeff1(1), gamma)?;
    let predicted = integral.value().exp();
    let rel_err = (jet.linear() - predicted).abs() / predicted;
    Ok(FirstOrderReport { transported: jet.linear(), integral, predicted, rel_err })
}

/// Y(x) as a float jet at a point; Y must fix 0.
pub fn section_at(y: &GaugeSection, x: &[f64]) -> Result<HolonomyJet> {
    if y.k() != 1 || !y.source()[0].is_zero() || !y.target()[0].is_zero() {
        return Err(Error::Domain("conjugating section must be codimension one and fix 0".into()));
    }
    let coeffs = (0..=y.order()).map(|m| y.coeff1(m).eval(x)).collect();
    HolonomyJet::new(coeffs, vec![0.0; y.order() as usize + 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// φ_B = Y_x⁻¹ ∘ φ_A ∘ Y_x (Y_x applied first)
    YFirst,
    /// φ_B = Y_x ∘ φ_A ∘ Y_x⁻¹
    YInverseFirst,
}

#[derive(Clone, Debug)]
pub struct ConjugationReport {
    pub y_first: f64,
    pub y_inverse_first: f64,
    pub passing: Option<Orientation>,
}

/// Compare φ_B with both conjugates of φ_A by Y_x, truncated to φ_B's order.
pub fn conjugation_check(phi_a: &HolonomyJet, phi_b: &HolonomyJet, y_x: &HolonomyJet, tol: f64) -> Result<ConjugationReport> {
    let n = phi_b.order().min(phi_a.order()).min(y_x.order());
    let cut = |j: &HolonomyJet| HolonomyJet { coeffs: j.coeffs[..=n as usize].to_vec(), errors: j.errors[..=n as usize].to_vec() };
    let (pa, pb, y) = (cut(phi_a), cut(phi_b), cut(y_x));
    let yi = invert(&y)?;
    let first = compose(&compose(&y, &pa)?, &yi)?;
    let second = compose(&compose(&yi, &pa)?, &y)?;
    let (r1, r2) = (first.residual(&pb), second.residual(&pb));
    let passing = if r1 <= tol && r1 <= r2 {
        Some(Orientation::YFirst)
    } else if r2 <= tol {
        Some(Orientation::YInverseFirst)
    } else {
        None
    };
    Ok(ConjugationReport { y_first: r1, y_inverse_first: r2, passing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Form, ScalarField};
    use crate::rational::int;

    fn circle_cord(coeffs: &[i64], order: u32) -> JetForm {
        let mut c = vec![Form::zero()];
        c.extend(coeffs.iter().map(|&k| Form::basis(0).scale(&int(k))));
        JetForm::univariate(1, order, c).unwrap()
    }

    fn generator() -> Loop {
        Loop::generator(&Chart::circle(), 0, &[int(0)]).unwrap()
    }

    #[test]
    fn exponential_linear_part() {
        let j = transport(&circle_cord(&[1], 4), &Chart::circle(), &generator(), &TransportOptions::default()).unwrap();
        let e = TAU.exp();
        assert!((j.linear() - e).abs() / e < 1e-8);
        for m in 2..=4 {
            assert!(j.coeff(m).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_cord_is_identity() {
        let a = JetForm::zero(1, 1, 5);
        let j = transport(&a, &Chart::circle(), &generator(), &TransportOptions::default()).unwrap();
        assert!(j.residual(&HolonomyJet::identity(5)) < 1e-14);
        let dy = JetForm::univariate(1, 3, vec![Form::basis(0)]).unwrap();
        assert!(transport(&dy, &Chart::circle(), &generator(), &TransportOptions::default()).is_err());
    }

    #[test]
    fn logistic_quadratic() {
        let j = transport(&circle_cord(&[1, 1], 3), &Chart::circle(), &generator(), &TransportOptions::default()).unwrap();
        let e = TAU.exp();
        // t₀e^φ / (1 − t₀(e^φ − 1)) expands to e t₀ + e(e−1) t₀² + e(e−1)² t₀³
        assert!((j.coeff(2) - e * (e - 1.0)).abs() / (e * (e - 1.0)) < 1e-6);
        assert!((j.coeff(3) - e * (e - 1.0).powi(2)).abs() / (e * (e - 1.0).powi(2)) < 1e-6);
    }

    #[test]
    fn richardson_is_fourth_order() {
        // raw RK4 errors at n and 2n steps shrink by ≈ 16
        let a = circle_cord(&[1], 1);
        let e = TAU.exp();
        let err = |n: usize| {
            let forms = [a.coeff1(0), a.coeff1(1)];
            let samples: Vec<Vec<f64>> = (0..=2 * n)
                .map(|i| {
                    let phi = TAU * i as f64 / (2 * n) as f64;
                    forms.iter().map(|w| w.eval_one_form(&[phi], &[TAU])).collect()
                })
                .collect();
            (rk4(&samples, n, 1, 1)[1] - e).abs()
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn words_and_inverses() {
        // a₁ has zero mean, so the coefficients stay O(1) and cancellation is mild
        let a1 = Form::one_form(0, ScalarField::cos(&[(0, 1)]));
        let a2 = Form::one_form(0, ScalarField::sin(&[(0, 1)]).add(&ScalarField::constant(int(1))));
        let a = JetForm::univariate(1, 4, vec![Form::zero(), a1, a2, Form::basis(0).scale(&int(-2))]).unwrap();
        let chart = Chart::circle();
        let gens = vec![generator()];
        let opts = TransportOptions::default();
        let id = monodromy_word(&a, &chart, &gens, &Word(vec![(0, 1), (0, -1)]), &opts).unwrap();
        assert!(id.residual(&HolonomyJet::identity(4)) < 1e-6);
        let sq = monodromy_word(&a, &chart, &gens, &Word(vec![(0, 1), (0, 1)]), &opts).unwrap();
        let one = transport(&a, &chart, &gens[0], &opts).unwrap();
        assert!(sq.residual(&compose(&one, &one).unwrap()) < 1e-6);
    }

    #[test]
    fn first_order_examples() {
        let opts = TransportOptions::default();
        let r = first_order_check(&circle_cord(&[1], 2), &Chart::circle(), &generator(), &opts).unwrap();
        assert!(r.rel_err < 1e-8);
        // a₁ = d(sin x) = cos x dx integrates to 0 around the loop
        let a1 = Form::one_form(0, ScalarField::cos(&[(0, 1)]));
        let a = JetForm::univariate(1, 3, vec![Form::zero(), a1]).unwrap();
        let r = first_order_check(&a, &Chart::circle(), &generator(), &opts).unwrap();
        assert!((r.transported - 1.0).abs() < 1e-8);
        assert!(matches!(r.integral, PathIntegral::Exact(ref t) if t.rational == int(0)));
    }
}
