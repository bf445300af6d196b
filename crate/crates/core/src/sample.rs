//! Seeded random instances for the property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{Chart, Form, Harmonic, RationalField, ScalarField};
use crate::cord::{GaugeSection, JetForm};
use crate::jet::GroupoidArrow;
use crate::rational::{int, rat, Rational};
use crate::series::{MultiIndex, Series};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// p/q with |p| ≤ 3, 1 ≤ q ≤ 3.
pub fn small_rational(rng: &mut SampleRng) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

fn nonzero_rational(rng: &mut SampleRng) -> Rational {
    loop {
        let r = small_rational(rng);
        if r != int(0) {
            return r;
        }
    }
}

/// Up to `terms` random terms: constants, harmonics of frequency ≤ 2 in
/// periodic coordinates, and linear monomials in real ones.
pub fn scalar(rng: &mut SampleRng, chart: &Chart, terms: usize) -> ScalarField {
    let mut f = ScalarField::zero();
    for _ in 0..terms {
        let c = nonzero_rational(rng);
        let i = rng.gen_range(0..chart.dim());
        let term = if chart.allows_harmonic(i) && rng.gen_bool(0.7) {
            let kind = *[Harmonic::Cos, Harmonic::Sin].choose(rng).unwrap();
            let mut freq = vec![(i as u8, rng.gen_range(1..=2))];
            if chart.dim() > 1 && rng.gen_bool(0.3) {
                let j = (i + 1) % chart.dim();
                if chart.allows_harmonic(j) {
                    freq.push((j as u8, rng.gen_range(-1..=1)));
                }
            }
            freq.sort();
            ScalarField::harmonic(c, kind, &freq)
        } else if chart.allows_monomial(i) && rng.gen_bool(0.5) {
            ScalarField::monomial(c, &[(i as u8, 1)])
        } else {
            ScalarField::constant(c)
        };
        f = f.add(&term);
    }
    f
}

/// c + f with f a sum of harmonics whose amplitudes add up to less than c.
fn positive_scalar(rng: &mut SampleRng, chart: &Chart, c: i64) -> ScalarField {
    let mut f = ScalarField::constant(int(c));
    let periodic: Vec<usize> = (0..chart.dim()).filter(|&i| chart.allows_harmonic(i)).collect();
    if let Some(&i) = periodic.choose(rng) {
        let kind = *[Harmonic::Cos, Harmonic::Sin].choose(rng).unwrap();
        f = f.add(&ScalarField::harmonic(rat(rng.gen_range(-2..=2), 3), kind, &[(i as u8, rng.gen_range(1..=2))]));
    }
    f
}

/// Random form of the given degree with one or two components.
pub fn form(rng: &mut SampleRng, chart: &Chart, degree: u32) -> Form {
    let n = chart.dim();
    let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() == degree).collect();
    let mut w = Form::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let m = *masks.choose(rng).expect("degree within the chart dimension");
        w = w.add(&Form::component(m, scalar(rng, chart, 2).into()));
    }
    w
}

fn random_index(rng: &mut SampleRng, k: usize, lo: u32, hi: u32) -> MultiIndex {
    let mut exps = vec![0u32; k];
    for _ in 0..rng.gen_range(lo..=hi) {
        exps[rng.gen_range(0..k)] += 1;
    }
    MultiIndex::new(&exps)
}

/// Arrow of 𝒬_k at `source` with a random target, a positive linear part and
/// a few random higher terms.
pub fn arrow(rng: &mut SampleRng, source: Vec<Rational>, order: u32) -> GroupoidArrow {
    let k = source.len();
    let comps = (0..k)
        .map(|j| {
            let mut s = Series::constant(k, order, small_rational(rng));
            for l in 0..k {
                let c = if l == j { rat(rng.gen_range(1..=3), rng.gen_range(1..=2)) } else { rat(rng.gen_range(-1..=1), 4) };
                s.set(MultiIndex::unit(l), c);
            }
            for _ in 0..rng.gen_range(1..=3) {
                if order >= 2 {
                    s.set(random_index(rng, k, 2, order), small_rational(rng));
                }
            }
            s
        })
        .collect();
    GroupoidArrow::new(source, comps).expect("diagonally dominant linear part")
}

/// Three composable arrows a, b, c (target(a) = source(b), target(b) = source(c)).
pub fn arrow_triple(rng: &mut SampleRng, k: usize, order: u32) -> [GroupoidArrow; 3] {
    let s: Vec<Rational> = (0..k).map(|_| small_rational(rng)).collect();
    let a = arrow(rng, s, order);
    let b = arrow(rng, a.target(), order);
    let c = arrow(rng, b.target(), order);
    [a, b, c]
}

/// Random source map: a small field per component, or 0.
pub fn source(rng: &mut SampleRng, chart: &Chart, k: usize) -> Vec<RationalField> {
    (0..k)
        .map(|_| if rng.gen_bool(0.5) { scalar(rng, chart, 1).into() } else { RationalField::zero() })
        .collect()
}

/// Section with the given source and target. In codimension one the linear
/// coefficient is a certified positive field. For k ≥ 2 the linear part is
/// upper triangular with positive constant diagonal and field entries above
/// it: its determinant is then constant, which keeps (Y′)⁻¹ free of
/// denominators and the exact arithmetic small.
pub fn section(rng: &mut SampleRng, chart: &Chart, source: Vec<RationalField>, target: &[RationalField], order: u32) -> GaugeSection {
    let k = source.len();
    let comps = (0..k)
        .map(|j| {
            let mut s = Series::constant(k, order, target[j].clone());
            for l in 0..k {
                let c: RationalField = if k == 1 {
                    positive_scalar(rng, chart, 2).into()
                } else if l == j {
                    RationalField::constant(rat(rng.gen_range(1..=3), rng.gen_range(1..=2)))
                } else if l > j {
                    scalar(rng, chart, 1).into()
                } else {
                    RationalField::zero()
                };
                s.set(MultiIndex::unit(l), c);
            }
            for _ in 0..rng.gen_range(0..=2) {
                if order >= 2 {
                    s.set(random_index(rng, k, 2, order.min(3)), scalar(rng, chart, 1).into());
                }
            }
            s
        })
        .collect();
    GaugeSection::new(source, comps).expect("nonsingular linear part")
}

/// Random (generally non-flat) jet form with a few nonzero coefficients.
pub fn jet_form(rng: &mut SampleRng, chart: &Chart, source: Vec<RationalField>, degree: u32, order: u32) -> JetForm {
    let k = source.len();
    let comps = (0..k)
        .map(|_| {
            let mut s = Series::zero(k, order);
            for _ in 0..rng.gen_range(1..=3) {
                let m = random_index(rng, k, 0, order.min(3));
                s.set(m, form(rng, chart, degree));
            }
            s
        })
        .collect();
    JetForm::new(degree, source, comps).expect("consistent shapes")
}

/// Degree-0 codimension-one jet with x₀ = −(c + harmonics), c dominating.
pub fn negative_x(rng: &mut SampleRng, chart: &Chart, order: u32) -> JetForm {
    let mut coeffs = vec![Form::scalar(positive_scalar(rng, chart, 1).neg())];
    for _ in 1..=order {
        let f = if rng.gen_bool(0.5) { scalar(rng, chart, 1) } else { ScalarField::zero() };
        coeffs.push(Form::scalar(f));
    }
    JetForm::univariate(0, order, coeffs).expect("functions")
}
