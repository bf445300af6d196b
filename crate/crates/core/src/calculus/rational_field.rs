//! Quotients `num / Π atom^e` of trigonometric polynomials.
//!
//! Denominators are kept factored into "atoms" (normalized trig polynomials),
//! so sums only need the per-atom maximum exponent. Equality is decided by
//! cross-multiplication, which is exact because the trig-polynomial ring has
//! no zero divisors.

use std::fmt;

use num_traits::One;

use crate::calculus::chart::Chart;
use crate::calculus::scalar::ScalarField;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Default)]
pub struct RationalField {
    num: ScalarField,
    /// sorted by atom, exponents positive
    den: Vec<(ScalarField, u32)>,
}

/// Split `f = c · f̂` with the first coefficient of f̂ equal to 1.
fn normalize_atom(f: &ScalarField) -> (Rational, ScalarField) {
    let c = f.terms().next().map(|(_, c)| c.clone()).unwrap_or_else(Rational::one);
    let inv = Rational::one() / &c;
    (c, f.scale(&inv))
}

fn expand(den: &[(ScalarField, u32)]) -> ScalarField {
    let mut acc = ScalarField::one();
    for (a, e) in den {
        acc = acc.mul(&a.pow(*e));
    }
    acc
}

/// Π atom^(e_lcm − e_own) for each atom of `lcm`.
fn cofactor(lcm: &[(ScalarField, u32)], own: &[(ScalarField, u32)]) -> ScalarField {
    let mut acc = ScalarField::one();
    for (a, e) in lcm {
        let mine = own.iter().find(|(b, _)| b == a).map(|(_, e)| *e).unwrap_or(0);
        if *e > mine {
            acc = acc.mul(&a.pow(e - mine));
        }
    }
    acc
}

fn lcm(a: &[(ScalarField, u32)], b: &[(ScalarField, u32)]) -> Vec<(ScalarField, u32)> {
    let mut out = a.to_vec();
    for (atom, e) in b {
        match out.iter_mut().find(|(x, _)| x == atom) {
            Some(slot) => slot.1 = slot.1.max(*e),
            None => out.push((atom.clone(), *e)),
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

impl RationalField {
    pub fn zero() -> Self {
        RationalField::default()
    }

    pub fn one() -> Self {
        ScalarField::one().into()
    }

    pub fn constant(c: Rational) -> Self {
        ScalarField::constant(c).into()
    }

    pub fn numerator(&self) -> &ScalarField {
        &self.num
    }

    pub fn denominator_atoms(&self) -> &[(ScalarField, u32)] {
        &self.den
    }

    pub fn denominator(&self) -> ScalarField {
        expand(&self.den)
    }

    /// The underlying trig polynomial, if there is no denominator.
    pub fn as_scalar(&self) -> Option<&ScalarField> {
        self.den.is_empty().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn build(num: ScalarField, den: Vec<(ScalarField, u32)>) -> Self {
        if num.is_zero() {
            return RationalField::zero();
        }
        let mut r = RationalField { num, den };
        r.cancel();
        r
    }

    /// Cancel atoms of which the numerator is a constant multiple.
    fn cancel(&mut self) {
        while let Some(pos) = self.den.iter().position(|(a, _)| {
            a.num_terms() == self.num.num_terms() && normalize_atom(&self.num).1 == *a
        }) {
            let (c, _) = normalize_atom(&self.num);
            self.num = ScalarField::constant(c);
            self.den[pos].1 -= 1;
            if self.den[pos].1 == 0 {
                self.den.remove(pos);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Self::build(self.num.add(&other.num), self.den.clone());
        }
        let l = lcm(&self.den, &other.den);
        let num = self.num.mul(&cofactor(&l, &self.den)).add(&other.num.mul(&cofactor(&l, &other.den)));
        Self::build(num, l)
    }

    pub fn neg(&self) -> Self {
        RationalField { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::build(self.num.scale(r), self.den.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RationalField::zero();
        }
        let mut den = self.den.clone();
        for (a, e) in &other.den {
            match den.iter_mut().find(|(x, _)| x == a) {
                Some(slot) => slot.1 += e,
                None => den.push((a.clone(), *e)),
            }
        }
        den.sort_by(|x, y| x.0.cmp(&y.0));
        Self::build(self.num.mul(&other.num), den)
    }

    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        Self::build(self.num.mul(f), self.den.clone())
    }

    /// Multiplicative inverse; `None` for the zero field.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let top = expand(&self.den);
        if let Some(c) = self.num.as_constant() {
            return Some(Self::build(top.scale(&(Rational::one() / c)), Vec::new()));
        }
        let (c, atom) = normalize_atom(&self.num);
        Some(Self::build(top.scale(&(Rational::one() / c)), vec![(atom, 1)]))
    }

    /// ∂/∂x_i by the quotient rule; each atom depending on x_i gains one power.
    pub fn partial(&self, i: u8) -> Self {
        let dnum = self.num.partial(i);
        let moving: Vec<usize> = (0..self.den.len()).filter(|&j| !self.den[j].0.partial(i).is_zero()).collect();
        if moving.is_empty() {
            return Self::build(dnum, self.den.clone());
        }
        // d(n / Π p_j^e_j) = [n' Π p_j − n Σ e_j p_j' Π_{l≠j} p_l] / Π p_j^(e_j+1), j over moving atoms
        let prod_all = moving.iter().fold(ScalarField::one(), |acc, &j| acc.mul(&self.den[j].0));
        let mut num = dnum.mul(&prod_all);
        for &j in &moving {
            let (p, e) = &self.den[j];
            let others = moving
                .iter()
                .filter(|&&l| l != j)
                .fold(ScalarField::one(), |acc, &l| acc.mul(&self.den[l].0));
            let term = self.num.mul(&p.partial(i)).mul(&others).scale(&Rational::from_integer((*e).into()));
            num = num.sub(&term);
        }
        let mut den = self.den.clone();
        for &j in &moving {
            den[j].1 += 1;
        }
        Self::build(num, den)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.num.eval(x);
        for (a, e) in &self.den {
            v /= a.eval(x).powi(*e as i32);
        }
        v
    }

    pub fn support(&self) -> Vec<u8> {
        let mut v = self.num.support();
        for (a, _) in &self.den {
            v.extend(a.support());
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn validate(&self, chart: &Chart) -> Result<()> {
        self.num.validate(chart)?;
        for (a, _) in &self.den {
            a.validate(chart)?;
        }
        Ok(())
    }

    /// Apply `f` to the numerator and every atom (a ring homomorphism such as
    /// a substitution). Fails if an atom maps to zero.
    pub fn map_ring(&self, f: impl Fn(&ScalarField) -> Result<ScalarField>) -> Result<Self> {
        let num = f(&self.num)?;
        let mut out = RationalField::from(num);
        for (a, e) in &self.den {
            let img = f(a)?;
            if img.is_zero() {
                return Err(Error::UnsupportedMap("a denominator vanishes identically after substitution".into()));
            }
            let inv = RationalField::from(img).recip().unwrap();
            for _ in 0..*e {
                out = out.mul(&inv);
            }
        }
        Ok(out)
    }

    pub fn display(&self, chart: &Chart) -> String {
        let n = self.num.display(chart);
        if self.den.is_empty() {
            return n;
        }
        let d: Vec<String> = self
            .den
            .iter()
            .map(|(a, e)| {
                let s = format!("({})", a.display(chart));
                if *e == 1 {
                    s
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect();
        format!("({n})/{}", d.join("*"))
    }
}

impl From<ScalarField> for RationalField {
    fn from(num: ScalarField) -> Self {
        RationalField { num, den: Vec::new() }
    }
}

impl PartialEq for RationalField {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        let l = lcm(&self.den, &other.den);
        self.num.mul(&cofactor(&l, &self.den)) == other.num.mul(&cofactor(&l, &other.den))
    }
}

impl fmt::Debug for RationalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{:?}", self.num);
        }
        write!(f, "({:?})/", self.num)?;
        for (a, e) in &self.den {
            write!(f, "({a:?})^{e}")?;
        }
        Ok(())
    }
}

impl crate::series::Coeff for RationalField {
    fn zero() -> Self {
        RationalField::zero()
    }
    fn one() -> Self {
        RationalField::one()
    }
    fn from_rational(r: &Rational) -> Self {
        RationalField::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        RationalField::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        RationalField::add(self, other)
    }
    fn neg(&self) -> Self {
        RationalField::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        RationalField::mul(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        RationalField::scale(self, r)
    }
    fn recip(&self) -> Option<Self> {
        RationalField::recip(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn two_plus_cos() -> ScalarField {
        ScalarField::constant(int(2)).add(&ScalarField::cos(&[(0, 1)]))
    }

    #[test]
    fn reciprocal_roundtrip() {
        let g = RationalField::from(two_plus_cos());
        let inv = g.recip().unwrap();
        assert_eq!(g.mul(&inv), RationalField::one());
        assert_eq!(inv.recip().unwrap(), g);
    }

    #[test]
    fn quotient_rule_by_clearing_denominators() {
        let f = RationalField::from(ScalarField::sin(&[(0, 1)]).add(&ScalarField::coord(1)));
        let g = two_plus_cos();
        let q = f.mul(&RationalField::from(g.clone()).recip().unwrap());
        let dq = q.partial(0);
        // dq * g^2 == f' g - f g'
        let lhs = dq.mul(&RationalField::from(g.mul(&g)));
        let rhs = f.partial(0).mul_scalar(&g).sub(&f.mul_scalar(&g.partial(0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn sums_over_different_denominators() {
        let a = RationalField::from(two_plus_cos()).recip().unwrap();
        let b = RationalField::constant(rat(1, 3));
        let s = a.add(&b);
        let expect_num = ScalarField::constant(int(3)).add(&two_plus_cos());
        assert_eq!(s.mul_scalar(&two_plus_cos()).scale(&int(3)), RationalField::from(expect_num));
        assert!(s.sub(&a).sub(&b).is_zero());
    }

    #[test]
    fn eval_matches() {
        let a = RationalField::from(two_plus_cos()).recip().unwrap();
        assert!((a.eval(&[1.0]) - 1.0 / (2.0 + 1f64.cos())).abs() < 1e-14);
    }
}
