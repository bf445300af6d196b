//! Differential forms with `RationalField` coefficients. Components are keyed
//! by the bitmask of an increasing index set, so antisymmetry is structural.

use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::chart::Chart;
use crate::calculus::rational_field::RationalField;
use crate::calculus::scalar::ScalarField;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::series::Coeff;

#[derive(Clone, Default)]
pub struct Form {
    comps: BTreeMap<u32, RationalField>,
}

/// Sign of dx_A ∧ dx_B after sorting, for disjoint masks.
fn wedge_sign(a: u32, b: u32) -> i64 {
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of set bits of `mask` below bit i.
fn bits_below(mask: u32, i: u32) -> u32 {
    (mask & ((1u32 << i) - 1)).count_ones()
}

impl Form {
    pub fn zero() -> Self {
        Form::default()
    }

    pub fn one() -> Self {
        Self::scalar(RationalField::one())
    }

    pub fn scalar(f: impl Into<RationalField>) -> Self {
        Self::component(0, f.into())
    }

    pub fn constant(c: Rational) -> Self {
        Self::scalar(RationalField::constant(c))
    }

    /// dx_i
    pub fn basis(i: usize) -> Self {
        Self::component(1 << i, RationalField::one())
    }

    /// f dx_{i1} ∧ … for the index set `mask`.
    pub fn component(mask: u32, f: RationalField) -> Self {
        let mut comps = BTreeMap::new();
        if !f.is_zero() {
            comps.insert(mask, f);
        }
        Form { comps }
    }

    /// f dx_i
    pub fn one_form(i: usize, f: impl Into<RationalField>) -> Self {
        Self::component(1 << i, f.into())
    }

    pub fn components(&self) -> impl Iterator<Item = (&u32, &RationalField)> {
        self.comps.iter()
    }

    pub fn get(&self, mask: u32) -> RationalField {
        self.comps.get(&mask).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Degree if homogeneous and nonzero.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.comps.keys().map(|m| m.count_ones());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn has_degree(&self, p: u32) -> bool {
        self.comps.keys().all(|m| m.count_ones() == p)
    }

    /// The coefficient, if this is a 0-form.
    pub fn as_function(&self) -> Option<RationalField> {
        if self.has_degree(0) {
            Some(self.get(0))
        } else {
            None
        }
    }

    fn insert_add(&mut self, mask: u32, f: RationalField) {
        if f.is_zero() {
            return;
        }
        let v = match self.comps.remove(&mask) {
            Some(old) => old.add(&f),
            None => f,
        };
        if !v.is_zero() {
            self.comps.insert(mask, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, f) in &other.comps {
            out.insert_add(*m, f.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Form { comps: self.comps.iter().map(|(m, f)| (*m, f.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Form::zero();
        for (m, f) in &self.comps {
            out.insert_add(*m, f.scale(r));
        }
        out
    }

    /// Multiply every component by a function.
    pub fn mul_function(&self, g: &RationalField) -> Self {
        let mut out = Form::zero();
        for (m, f) in &self.comps {
            out.insert_add(*m, f.mul(g));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Form::zero();
        for (ma, fa) in &self.comps {
            for (mb, fb) in &other.comps {
                if ma & mb != 0 {
                    continue;
                }
                let f = fa.mul(fb);
                let f = if wedge_sign(*ma, *mb) < 0 { f.neg() } else { f };
                out.insert_add(ma | mb, f);
            }
        }
        out
    }

    pub fn d(&self) -> Self {
        let mut out = Form::zero();
        for (m, f) in &self.comps {
            for i in f.support() {
                let i32_ = i as u32;
                if m & (1 << i32_) != 0 {
                    continue;
                }
                let df = f.partial(i);
                let df = if bits_below(*m, i32_) % 2 == 1 { df.neg() } else { df };
                out.insert_add(m | (1 << i32_), df);
            }
        }
        out
    }

    /// ι_V; zero on functions.
    pub fn contract_raw(&self, v: &VectorField) -> Self {
        let mut out = Form::zero();
        for (m, f) in &self.comps {
            let mut rest = *m;
            while rest != 0 {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                let Some(vi) = v.0.get(i as usize) else { continue };
                if vi.is_zero() {
                    continue;
                }
                let g = f.mul(vi);
                let g = if bits_below(*m, i) % 2 == 1 { g.neg() } else { g };
                out.insert_add(m & !(1 << i), g);
            }
        }
        out
    }

    /// ι_V; functions have no interior product.
    pub fn contract(&self, v: &VectorField) -> Result<Self> {
        if self.comps.keys().any(|m| *m == 0) {
            return Err(Error::Degree("cannot contract a 0-form".into()));
        }
        Ok(self.contract_raw(v))
    }

    /// Cartan formula L_V = d ι_V + ι_V d.
    pub fn lie(&self, v: &VectorField) -> Self {
        self.contract_raw(v).d().add(&self.d().contract_raw(v))
    }

    /// Value of a 1-form on the tangent vector `v` at `x`.
    pub fn eval_one_form(&self, x: &[f64], v: &[f64]) -> f64 {
        self.comps
            .iter()
            .filter(|(m, _)| m.count_ones() == 1)
            .map(|(m, f)| f.eval(x) * v[m.trailing_zeros() as usize])
            .sum()
    }

    /// Value of a function at `x`.
    pub fn eval_function(&self, x: &[f64]) -> f64 {
        self.comps.get(&0).map(|f| f.eval(x)).unwrap_or(0.0)
    }

    pub fn validate(&self, chart: &Chart) -> Result<()> {
        for (m, f) in &self.comps {
            if (*m >> chart.dim()) != 0 {
                return Err(Error::Structural("form uses a coordinate outside the chart".into()));
            }
            f.validate(chart)?;
        }
        Ok(())
    }

    /// Apply a ring map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&RationalField) -> Result<RationalField>) -> Result<Self> {
        let mut out = Form::zero();
        for (m, c) in &self.comps {
            out.insert_add(*m, f(c)?);
        }
        Ok(out)
    }

    /// Drop every component containing dx_i.
    pub fn drop_coordinate(&self, i: usize) -> Self {
        Form { comps: self.comps.iter().filter(|(m, _)| *m & (1 << i) == 0).map(|(m, f)| (*m, f.clone())).collect() }
    }

    /// Split ω = α + β ∧ dx_i with α, β free of dx_i; returns (α, β).
    pub fn split_last(&self, i: usize) -> (Self, Self) {
        let alpha = self.drop_coordinate(i);
        let mut beta = Form::zero();
        for (m, f) in &self.comps {
            if m & (1 << i) != 0 {
                let rest = m & !(1 << i);
                // dx_rest ∧ dx_i sorts to dx_m with sign (-1)^{#rest above i}
                let f = if wedge_sign(rest, 1 << i) < 0 { f.neg() } else { f.clone() };
                beta.insert_add(rest, f);
            }
        }
        (alpha, beta)
    }

    pub fn display(&self, chart: &Chart) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(m, f)| {
                let basis: Vec<String> = (0..32).filter(|i| m & (1 << i) != 0).map(|i| format!("d{}", chart.label(i))).collect();
                let coeff = f.display(chart);
                if basis.is_empty() {
                    coeff
                } else {
                    format!("({coeff})*{}", basis.join("^"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.display(&Chart::generic(labels)))
    }
}

impl Coeff for Form {
    fn zero() -> Self {
        Form::zero()
    }
    fn one() -> Self {
        Form::one()
    }
    fn from_rational(r: &Rational) -> Self {
        Form::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        Form::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Form::add(self, other)
    }
    fn neg(&self) -> Self {
        Form::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        self.wedge(other)
    }
    fn scale(&self, r: &Rational) -> Self {
        Form::scale(self, r)
    }
    fn recip(&self) -> Option<Self> {
        self.as_function()?.recip().map(Form::scalar)
    }
}

/// A vector field Σ V_i ∂_i.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VectorField(pub Vec<RationalField>);

impl VectorField {
    pub fn zero(n: usize) -> Self {
        VectorField(vec![RationalField::zero(); n])
    }

    /// c ∂_i on an n-chart.
    pub fn coordinate(n: usize, i: usize, c: Rational) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = RationalField::constant(c);
        v
    }

    pub fn validate(&self, chart: &Chart) -> Result<()> {
        if self.0.len() != chart.dim() {
            return Err(Error::Structural("vector field dimension differs from chart".into()));
        }
        self.0.iter().try_for_each(|f| f.validate(chart))
    }
}

/// Convenience: a scalar field as a 0-form.
impl From<ScalarField> for Form {
    fn from(f: ScalarField) -> Self {
        Form::scalar(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn cos_x() -> ScalarField {
        ScalarField::cos(&[(0, 1)])
    }

    fn y() -> ScalarField {
        ScalarField::coord(1)
    }

    #[test]
    fn exterior_derivative_examples() {
        let f = Form::scalar(ScalarField::sin(&[(0, 1)]));
        assert_eq!(f.d(), Form::one_form(0, cos_x()));
        // d(y cos x dx) = -cos x dx∧dy
        let w = Form::one_form(0, y().mul(&cos_x()));
        assert_eq!(w.d(), Form::component(0b11, cos_x().neg().into()));
        assert!(Form::basis(0).d().is_zero());
    }

    #[test]
    fn wedge_examples() {
        let dx = Form::basis(0);
        let dy = Form::basis(1);
        assert_eq!(dx.wedge(&dy), dy.wedge(&dx).neg());
        let c = Form::one_form(0, cos_x());
        assert!(c.wedge(&c).is_zero());
        assert_eq!(dx.add(&dy).wedge(&dy), dx.wedge(&dy));
    }

    #[test]
    fn contraction_examples() {
        let dxdy = Form::basis(0).wedge(&Form::basis(1));
        let dy_vec = VectorField::coordinate(2, 1, int(1));
        assert_eq!(dxdy.contract(&dy_vec).unwrap(), Form::basis(0).neg());
        let mdy = VectorField::coordinate(2, 1, int(-1));
        assert_eq!(Form::basis(1).contract(&mdy).unwrap(), Form::constant(int(-1)));
        let dx_vec = VectorField::coordinate(2, 0, int(1));
        let w = Form::one_form(0, y().mul(&cos_x()));
        assert_eq!(w.contract(&dx_vec).unwrap(), Form::scalar(y().mul(&cos_x())));
        assert!(Form::constant(int(1)).contract(&dx_vec).is_err());
    }

    #[test]
    fn lie_derivative_examples() {
        let a0 = Form::basis(1).add(&Form::one_form(0, y().mul(&cos_x())));
        let v = VectorField::coordinate(2, 1, int(-1));
        assert_eq!(a0.lie(&v), Form::one_form(0, cos_x().neg()));
        let f = Form::scalar(ScalarField::sin(&[(0, 1)]));
        assert_eq!(f.lie(&VectorField::coordinate(2, 0, int(1))), Form::scalar(cos_x()));
    }

    #[test]
    fn split_last_reassembles() {
        let w = Form::basis(0).wedge(&Form::basis(2)).add(&Form::basis(1).wedge(&Form::basis(0)));
        let (a, b) = w.split_last(2);
        assert_eq!(a.add(&b.wedge(&Form::basis(2))), w);
    }
}
