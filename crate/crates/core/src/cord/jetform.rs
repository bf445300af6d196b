//! Jet-valued differential forms A = Σ a_{i,I} (t − s)^I ∂_i.

use crate::calculus::{ChartMap, Form, RationalField, VectorField};
use crate::error::{structural, Error, Result};
use crate::rational::int;
use crate::series::{substitute, MultiIndex, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct JetForm {
    degree: u32,
    source: Vec<RationalField>,
    comps: Vec<Series<Form>>,
}

impl JetForm {
    pub fn new(degree: u32, source: Vec<RationalField>, comps: Vec<Series<Form>>) -> Result<Self> {
        let k = source.len();
        if k == 0 || comps.len() != k {
            return Err(structural(format!("codimension {k} needs {k} components")));
        }
        let order = comps[0].order();
        for c in &comps {
            if c.k() != k || c.order() != order {
                return Err(structural("components disagree on shape"));
            }
            for (_, f) in c.terms() {
                if !f.has_degree(degree) {
                    return Err(Error::Degree(format!("coefficient is not a {degree}-form")));
                }
            }
        }
        Ok(JetForm { degree, source, comps })
    }

    pub fn zero(k: usize, degree: u32, order: u32) -> Self {
        JetForm { degree, source: vec![RationalField::zero(); k], comps: vec![Series::zero(k, order); k] }
    }

    /// Codimension-one jet form with source 0 from coefficients a_0, a_1, …
    pub fn univariate(degree: u32, order: u32, coeffs: Vec<Form>) -> Result<Self> {
        Self::new(degree, vec![RationalField::zero()], vec![Series::univariate(order, coeffs)])
    }

    pub fn k(&self) -> usize {
        self.source.len()
    }

    pub fn order(&self) -> u32 {
        self.comps[0].order()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn source(&self) -> &[RationalField] {
        &self.source
    }

    pub fn components(&self) -> &[Series<Form>] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Series<Form> {
        &self.comps[i]
    }

    /// a_{i,I}
    pub fn coeff(&self, i: usize, m: &MultiIndex) -> Form {
        self.comps[i].coeff(m)
    }

    /// a_m for codimension one.
    pub fn coeff1(&self, m: u32) -> Form {
        self.comps[0].coeff1(m)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn with_components(&self, degree: u32, comps: Vec<Series<Form>>) -> Result<Self> {
        JetForm::new(degree, self.source.clone(), comps)
    }

    fn same_source(&self, other: &Self) -> Result<()> {
        if self.source != other.source {
            return Err(Error::Domain("source maps differ".into()));
        }
        Ok(())
    }

    fn check_sum(&self, other: &Self) -> Result<()> {
        self.same_source(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!("adding a {}-form to a {}-form", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_sum(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        self.with_components(self.degree, comps)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        JetForm { degree: self.degree, source: self.source.clone(), comps: self.comps.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale(&self, r: &crate::Rational) -> Self {
        JetForm { degree: self.degree, source: self.source.clone(), comps: self.comps.iter().map(|c| c.scale(r)).collect() }
    }

    pub fn truncate(&self, n: u32) -> Self {
        JetForm { degree: self.degree, source: self.source.clone(), comps: self.comps.iter().map(|c| c.truncate(n)).collect() }
    }

    /// Both operands cut to their common order.
    pub fn common_order(&self, other: &Self) -> (Self, Self) {
        let n = self.order().min(other.order());
        (self.truncate(n), other.truncate(n))
    }

    /// Equality through the lower of the two orders.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let (a, b) = self.common_order(other);
        a == b
    }

    fn source_is_constant(&self) -> bool {
        self.source.iter().all(|s| s.support().is_empty())
    }

    /// Exterior derivative, acting on coefficients and on (t − s)^I through
    /// d(t−s)^I = −Σ I_l (t−s)^{I−e_l} ds_l. Loses one order when the source moves.
    pub fn d(&self) -> Self {
        let n = if self.source_is_constant() { self.order() } else { self.order() - 1 };
        let ds: Vec<Form> = self.source.iter().map(|s| Form::scalar(s.clone()).d()).collect();
        let k = self.k();
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut out = Series::<Form>::zero(k, n);
                for (m, a) in c.terms() {
                    if m.degree() <= n {
                        let v = out.coeff(m).add(&a.d());
                        out.set(*m, v);
                    }
                    for (l, dsl) in ds.iter().enumerate() {
                        if dsl.is_zero() {
                            continue;
                        }
                        if let Some(lo) = m.lower(l) {
                            if lo.degree() <= n {
                                let term = dsl.wedge(a).scale(&int(-(m.get(l) as i64)));
                                let v = out.coeff(&lo).add(&term);
                                out.set(lo, v);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        JetForm { degree: self.degree + 1, source: self.source.clone(), comps }
    }

    /// ∂/∂t_l of every component (order N−1).
    pub fn partial_t(&self, l: usize) -> Self {
        JetForm { degree: self.degree, source: self.source.clone(), comps: self.comps.iter().map(|c| c.partial(l)).collect() }
    }

    /// ι_V on every coefficient.
    pub fn contract(&self, v: &VectorField) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Degree("cannot contract a jet of functions".into()));
        }
        let comps = self.comps.iter().map(|c| c.map(|f| f.contract_raw(v))).collect();
        Ok(JetForm { degree: self.degree - 1, source: self.source.clone(), comps })
    }

    /// L_V = d ι_V + ι_V d.
    pub fn lie(&self, v: &VectorField) -> Result<Self> {
        let d_then_i = self.d().contract(v)?;
        if self.degree == 0 {
            return Ok(d_then_i);
        }
        let i_then_d = self.contract(v)?.d();
        let (a, b) = i_then_d.common_order(&d_then_i);
        a.add(&b)
    }

    /// Multiply every coefficient of every component by a function.
    pub fn mul_function(&self, g: &RationalField) -> Self {
        JetForm {
            degree: self.degree,
            source: self.source.clone(),
            comps: self.comps.iter().map(|c| c.map(|f| f.mul_function(g))).collect(),
        }
    }

    /// Composition A∘Y with the jet components of a map whose constant terms
    /// equal the source of A.
    pub fn compose_with(&self, y: &[Series<Form>]) -> Result<Self> {
        let shift: Vec<Form> = self.source.iter().map(|s| Form::scalar(s.clone())).collect();
        for (yc, s) in y.iter().zip(&shift) {
            if yc.constant_term() != *s {
                return Err(Error::Domain("target of the map differs from the source of the form".into()));
            }
        }
        let comps = self.comps.iter().map(|c| substitute(c, y, &shift)).collect::<Result<Vec<_>>>()?;
        Ok(JetForm { degree: self.degree, source: self.source.clone(), comps })
    }

    /// Replace the source map (used after composition, where the result is
    /// expanded at the map's source).
    pub(crate) fn with_source(mut self, source: Vec<RationalField>) -> Self {
        self.source = source;
        self
    }

    pub fn pullback(&self, f: &ChartMap) -> Result<Self> {
        let source = self.source.iter().map(|s| f.pull_field(s)).collect::<Result<_>>()?;
        let comps = self.comps.iter().map(|c| c.try_map(|w| f.pull_form(w))).collect::<Result<_>>()?;
        Ok(JetForm { degree: self.degree, source, comps })
    }

    /// Coefficientwise map on forms (same degree).
    pub fn map_forms(&self, f: impl Fn(&Form) -> Result<Form>) -> Result<Self> {
        let comps = self.comps.iter().map(|c| c.try_map(&f)).collect::<Result<_>>()?;
        Ok(JetForm { degree: self.degree, source: self.source.clone(), comps })
    }

    /// Lowest-order nonzero coefficient, as (component, index, form).
    pub fn first_nonzero(&self) -> Option<(usize, MultiIndex, Form)> {
        let mut best: Option<(usize, MultiIndex, Form)> = None;
        for (i, c) in self.comps.iter().enumerate() {
            if let Some((m, f)) = c.terms().next() {
                if best.as_ref().map_or(true, |(_, bm, _)| m < bm) {
                    best = Some((i, *m, f.clone()));
                }
            }
        }
        best
    }
}

/// Graded bracket [A,B]_j = Σ_i (A_i ∧ ∂_iB_j − (−1)^{pq} B_i ∧ ∂_iA_j), at order N−1.
pub fn bracket(a: &JetForm, b: &JetForm) -> Result<JetForm> {
    a.same_source(b)?;
    if a.order() != b.order() || a.k() != b.k() {
        return Err(structural("bracket operands disagree on order or codimension"));
    }
    let n = a.order().saturating_sub(1);
    let k = a.k();
    let sign = if (a.degree * b.degree) % 2 == 0 { 1 } else { -1 };
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        let mut acc = Series::zero(k, n);
        for i in 0..k {
            let ai = a.comps[i].truncate(n);
            let bi = b.comps[i].truncate(n);
            let t1 = ai.mul(&b.comps[j].partial(i))?;
            let t2 = bi.mul(&a.comps[j].partial(i))?;
            acc = acc.add(&t1)?;
            acc = if sign == 1 { acc.sub(&t2)? } else { acc.add(&t2)? };
        }
        comps.push(acc);
    }
    JetForm::new(a.degree + b.degree, a.source.clone(), comps)
}

/// F_A = dA + ½[A,A], at order N−1.
pub fn curvature(a: &JetForm) -> Result<JetForm> {
    if a.degree != 1 {
        return Err(Error::Degree("curvature is defined for 1-forms".into()));
    }
    let br = bracket(a, a)?.scale(&crate::rational::rat(1, 2));
    let (da, br) = a.d().common_order(&br);
    da.add(&br)
}

/// Source ≡ 0 and all constant-term coefficients vanish.
pub fn is_impotent(a: &JetForm) -> bool {
    a.source.iter().all(|s| s.is_zero()) && a.comps.iter().all(|c| c.constant_term().is_zero())
}

/// A 1-form whose curvature vanishes through the order at which it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCord {
    form: JetForm,
    flat_through: u32,
}

impl QuantumCord {
    /// Check flatness; fails with the first nonzero curvature coefficient.
    pub fn certify(form: JetForm) -> Result<Self> {
        let f = curvature(&form)?;
        if let Some((i, m, w)) = f.first_nonzero() {
            return Err(Error::Domain(format!(
                "not flat: curvature component {i} at index {m:?} is {w:?}"
            )));
        }
        Ok(QuantumCord { flat_through: f.order(), form })
    }

    pub fn form(&self) -> &JetForm {
        &self.form
    }

    pub fn into_form(self) -> JetForm {
        self.form
    }

    /// Highest order through which the curvature was checked to vanish.
    pub fn flat_through(&self) -> u32 {
        self.flat_through
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;

    fn dy() -> Form {
        Form::basis(1)
    }

    fn dx() -> Form {
        Form::basis(0)
    }

    #[test]
    fn bracket_degree_zero_example() {
        let f = JetForm::univariate(0, 3, vec![Form::zero(), Form::one()]).unwrap();
        let g = JetForm::univariate(0, 3, vec![Form::zero(), Form::zero(), Form::one()]).unwrap();
        let b = bracket(&f, &g).unwrap();
        assert_eq!(b, JetForm::univariate(0, 2, vec![Form::zero(), Form::zero(), Form::one()]).unwrap());
    }

    #[test]
    fn bracket_one_forms() {
        let a = JetForm::univariate(1, 3, vec![Form::zero(), dy()]).unwrap();
        let b = JetForm::univariate(1, 3, vec![dx()]).unwrap();
        let r = bracket(&a, &b).unwrap();
        assert_eq!(r.coeff1(0), dx().wedge(&dy()));
        // [A,A] = 2 A∧A′
        let c = JetForm::univariate(1, 3, vec![dx(), dy(), dx().scale(&int(3))]).unwrap();
        let aa = bracket(&c, &c).unwrap();
        let direct = c.components()[0].truncate(2).mul(&c.components()[0].partial(0)).unwrap().scale(&int(2));
        assert_eq!(aa.components()[0], direct);
    }

    #[test]
    fn curvature_examples() {
        let a = JetForm::univariate(1, 4, vec![dy()]).unwrap();
        assert!(curvature(&a).unwrap().is_zero());
        // A = x t dy on R^2: F = t dx∧dy
        let x = ScalarField::coord(0);
        let a = JetForm::univariate(1, 4, vec![Form::zero(), Form::one_form(1, x)]).unwrap();
        let f = curvature(&a).unwrap();
        assert_eq!(f, JetForm::univariate(2, 3, vec![Form::zero(), dx().wedge(&dy())]).unwrap());
        assert!(QuantumCord::certify(a).is_err());
    }

    #[test]
    fn one_plus_t_squared_ds_is_flat() {
        // A = (1 + t²) ds on the real line
        let ds = Form::basis(0);
        let a = JetForm::univariate(1, 6, vec![ds.clone(), Form::zero(), ds]).unwrap();
        assert!(curvature(&a).unwrap().is_zero());
    }

    #[test]
    fn moving_source_d() {
        // d of the jet (t − s) with source s(x) = x: d(t − x) = −dx
        let src = vec![RationalField::from(ScalarField::coord(0))];
        let w = JetForm::new(0, src, vec![Series::univariate(2, vec![Form::zero(), Form::one()])]).unwrap();
        let dw = w.d();
        assert_eq!(dw.order(), 1);
        assert_eq!(dw.coeff1(0), dx().neg());
    }

    #[test]
    fn impotency() {
        let a = JetForm::univariate(1, 3, vec![Form::zero(), Form::basis(0)]).unwrap();
        assert!(is_impotent(&a));
        let b = JetForm::univariate(1, 3, vec![dy(), Form::basis(0)]).unwrap();
        assert!(!is_impotent(&b));
    }
}
