//! The twisted differential ∇_A, the transport Φ between gauge-equivalent
//! cords, the Bott differential d_{a,V}, truncated H⁰, and the GV integral.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::calculus::{integrate_torus, Chart, Form, Harmonic, ScalarField, TermKey, TwoPiMultiple, VectorField};
use crate::cord::{bracket, gauge, transport_form, GaugeSection, JetForm};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// ∇_A W = dW + [A, W].
pub fn nabla(a: &JetForm, w: &JetForm) -> Result<JetForm> {
    if a.degree() != 1 {
        return Err(Error::Degree("∇_A needs a 1-form A".into()));
    }
    if a.source() != w.source() {
        return Err(Error::Domain("source of W differs from the source of A".into()));
    }
    let (a, w) = a.common_order(w);
    let br = bracket(&a, &w)?;
    let (dw, br) = w.d().common_order(&br);
    dw.add(&br)
}

/// Φ_{A→B}(W) = (W∘Y)(Y′)⁻¹ after checking Y⋆A = B.
pub fn phi_transport(y: &GaugeSection, a: &JetForm, b: &JetForm, w: &JetForm) -> Result<JetForm> {
    if !gauge(y, a)?.agrees_with(b) {
        return Err(Error::Domain("Y⋆A does not equal B".into()));
    }
    if w.source() != a.source() {
        return Err(Error::Domain("source of W differs from the source of A".into()));
    }
    let y = if w.order() < y.order() { y.truncate(w.order()) } else { y.clone() };
    transport_form(&y, &w.truncate(y.order()))
}

/// ∇_B(Φ W) − Φ(∇_A W) with B = Y⋆A, at the common order.
pub fn chain_map_defect(y: &GaugeSection, a: &JetForm, w: &JetForm) -> Result<JetForm> {
    let b = gauge(y, a)?;
    let lhs = nabla(&b, &phi_transport(y, a, &b, w)?)?;
    let rhs = phi_transport(y, a, &b, &nabla(a, w)?)?;
    let (l, r) = lhs.common_order(&rhs);
    l.sub(&r)
}

fn check_bott_pair(a: &Form, v: &VectorField) -> Result<()> {
    if a.contract(v)? != Form::constant(int(-1)) {
        return Err(Error::Normalization("ι_V(a) must be −1".into()));
    }
    Ok(())
}

/// d_{a,V} w = dw + a∧L_V w − L_V(a)∧w on horizontal forms (ι_V w = 0).
pub fn bott_differential(a: &Form, v: &VectorField, w: &Form) -> Result<Form> {
    check_bott_pair(a, v)?;
    if !w.contract_raw(v).is_zero() {
        return Err(Error::Domain("w is not horizontal: ι_V w ≠ 0".into()));
    }
    let b = a.lie(v);
    Ok(w.d().add(&a.wedge(&w.lie(v))).sub(&b.wedge(w)))
}

/// Real Fourier basis on a fully periodic chart: 1, cos(k·θ), sin(k·θ) for
/// nonzero k ∈ [−D, D]ⁿ with first nonzero entry positive. (2D+1)ⁿ elements.
pub fn fourier_basis(chart: &Chart, cutoff: u32) -> Result<Vec<ScalarField>> {
    if !chart.fully_periodic() {
        return Err(Error::Domain("Fourier truncation needs a fully periodic chart".into()));
    }
    let n = chart.dim();
    let d = cutoff as i64;
    let mut out = vec![ScalarField::one()];
    let total = (2 * d + 1).pow(n as u32);
    for idx in 0..total {
        let mut rest = idx;
        let freq: Vec<(u8, i64)> = (0..n)
            .map(|i| {
                let f = rest % (2 * d + 1) - d;
                rest /= 2 * d + 1;
                (i as u8, f)
            })
            .collect();
        match freq.iter().find(|(_, f)| *f != 0) {
            Some((_, f)) if *f > 0 => {
                out.push(ScalarField::harmonic(int(1), Harmonic::Cos, &freq));
                out.push(ScalarField::harmonic(int(1), Harmonic::Sin, &freq));
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Rank of a sparse rational matrix (rows as column → entry maps), by
/// fraction-free elimination on integer rows reduced to primitive content.
pub fn exact_rank(rows: &[BTreeMap<usize, Rational>]) -> usize {
    let mut work: Vec<BTreeMap<usize, BigInt>> = rows
        .iter()
        .filter(|r| r.values().any(|c| !c.is_zero()))
        .map(|r| {
            let l = r.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            primitive(r.iter().map(|(k, c)| (*k, (c * Rational::from(l.clone())).to_integer())).collect())
        })
        .collect();
    let mut rank = 0;
    while let Some(pivot_row) = work.pop() {
        let Some((&col, p)) = pivot_row.iter().next() else { continue };
        let p = p.clone();
        rank += 1;
        for row in work.iter_mut() {
            if let Some(f) = row.get(&col).cloned() {
                let mut next: BTreeMap<usize, BigInt> = row.iter().map(|(k, c)| (*k, c * &p)).collect();
                for (k, c) in &pivot_row {
                    let e = next.entry(*k).or_insert_with(BigInt::zero);
                    *e -= &f * c;
                }
                next.retain(|_, c| !c.is_zero());
                *row = primitive(next);
            }
        }
        work.retain(|r| !r.is_empty());
    }
    rank
}

fn primitive(mut row: BTreeMap<usize, BigInt>) -> BTreeMap<usize, BigInt> {
    row.retain(|_, c| !c.is_zero());
    let g = row.values().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        row.values_mut().for_each(|c| *c /= &g);
    }
    row
}

/// Matrix of `op` on `basis`, rows indexed by (form component, term).
fn assemble(basis: &[Form], op: impl Fn(&Form) -> Result<Form> + Sync) -> Result<Vec<BTreeMap<usize, Rational>>> {
    let images: Vec<Form> = basis.par_iter().map(&op).collect::<Result<_>>()?;
    let mut index: BTreeMap<(u32, TermKey), usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, Rational>> = Vec::new();
    for (col, img) in images.iter().enumerate() {
        for (mask, f) in img.components() {
            let s = f
                .as_scalar()
                .ok_or_else(|| Error::Domain("truncated complexes need polynomial coefficients".into()))?;
            for (key, c) in s.terms() {
                let r = *index.entry((*mask, key.clone())).or_insert_with(|| {
                    rows.push(BTreeMap::new());
                    rows.len() - 1
                });
                rows[r].insert(col, c.clone());
            }
        }
    }
    Ok(rows)
}

/// dim ker d_{a,V} on functions with Fourier cutoff D.
pub fn h0_dimension(a: &Form, v: &VectorField, chart: &Chart, cutoff: u32) -> Result<usize> {
    check_bott_pair(a, v)?;
    let basis: Vec<Form> = fourier_basis(chart, cutoff)?.into_iter().map(Form::scalar).collect();
    let rows = assemble(&basis, |f| bott_differential(a, v, f))?;
    Ok(basis.len() - exact_rank(&rows))
}

/// Ranks of the truncated d_{a,V} on horizontal p-forms. Not a cohomology
/// computation: truncation does not commute with exactness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottDiagnostics {
    pub degree: u32,
    pub source_dim: usize,
    pub rank: usize,
    pub kernel: usize,
}

/// Horizontal p-forms are spanned by dx_I with j ∉ I when V = c ∂_j, c constant.
pub fn bott_diagnostics(a: &Form, v: &VectorField, chart: &Chart, cutoff: u32) -> Result<Vec<BottDiagnostics>> {
    check_bott_pair(a, v)?;
    let support: Vec<usize> = (0..v.0.len()).filter(|&i| !v.0[i].is_zero()).collect();
    let [j] = support[..] else {
        return Err(Error::Domain("diagnostics need V along a single coordinate".into()));
    };
    if v.0[j].as_constant().is_none() {
        return Err(Error::Domain("diagnostics need a constant V".into()));
    }
    let n = chart.dim();
    let funcs = fourier_basis(chart, cutoff)?;
    let mut out = Vec::new();
    for p in 0..n as u32 {
        let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() == p && m & (1 << j) == 0).collect();
        let basis: Vec<Form> = masks
            .iter()
            .flat_map(|&m| funcs.iter().map(move |f| Form::component(m, f.clone().into())))
            .collect();
        let rows = assemble(&basis, |w| bott_differential(a, v, w))?;
        let rank = exact_rank(&rows);
        out.push(BottDiagnostics { degree: p, source_dim: basis.len(), rank, kernel: basis.len() - rank });
    }
    Ok(out)
}

/// ∫_{T³} a₁∧da₁ for the linear coefficient a₁ of a codimension-one cord.
pub fn gv_integral(a: &JetForm, chart: &Chart) -> Result<TwoPiMultiple> {
    if a.k() != 1 || a.order() < 1 {
        return Err(Error::Domain("GV integral needs a codimension-one cord of order ≥ 1".into()));
    }
    gv_integral_of(&a.coeff1(1), chart)
}

pub fn gv_integral_of(a1: &Form, chart: &Chart) -> Result<TwoPiMultiple> {
    if chart.dim() != 3 || !chart.fully_periodic() {
        return Err(Error::Domain("GV integral is computed on T³".into()));
    }
    integrate_torus(chart, &a1.wedge(&a1.d()))
}

/// Number of lattice points k(p, −q) with |kp|, |kq| ≤ D, i.e. Fourier modes
/// (m, n) with mq + np = 0 in the cutoff box; p, q coprime.
pub fn slope_lattice_count(p: i64, q: i64, cutoff: u32) -> usize {
    let step = p.abs().max(q.abs());
    2 * (cutoff as i64 / step) as usize + 1
}
