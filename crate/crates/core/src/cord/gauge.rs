//! Sections of the groupoid over a chart and their action on jet forms.

use crate::calculus::{check_positive, Chart, Form, Positivity, RationalField, SampleDomain};
use crate::cord::jetform::JetForm;
use crate::error::{structural, Error, Result};
use crate::jet::{compose_components, determinant, invert_components, jacobian, jet_matrix_inverse, linear_part, matvec};
use crate::series::{MultiIndex, Series};

/// Y: a field of arrows, Y_j = Σ_I y_{j,I}(x) (t − s_Y(x))^I, with target
/// t_Y = (y_{j,0}).
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSection {
    source: Vec<RationalField>,
    comps: Vec<Series<Form>>,
}

fn to_forms(s: &Series<RationalField>) -> Series<Form> {
    s.map(|f| Form::scalar(f.clone()))
}

impl GaugeSection {
    pub fn new(source: Vec<RationalField>, comps: Vec<Series<RationalField>>) -> Result<Self> {
        let k = source.len();
        if k == 0 || comps.len() != k || comps.iter().any(|c| c.k() != k) {
            return Err(structural(format!("a section of Q_{k} needs {k} components in {k} variables")));
        }
        let order = comps[0].order();
        if order == 0 || comps.iter().any(|c| c.order() != order) {
            return Err(structural("section components need a common order ≥ 1"));
        }
        let comps: Vec<Series<Form>> = comps.iter().map(to_forms).collect();
        let det = determinant(&linear_part(&comps)).and_then(|d| d.as_function());
        if det.map_or(true, |d| d.is_zero()) {
            return Err(Error::Domain("linear part is singular".into()));
        }
        Ok(GaugeSection { source, comps })
    }

    /// Codimension-one section from coefficients y_0, y_1, … at source 0.
    pub fn univariate(order: u32, coeffs: Vec<RationalField>) -> Result<Self> {
        Self::new(vec![RationalField::zero()], vec![Series::univariate(order, coeffs)])
    }

    pub fn identity(source: Vec<RationalField>, order: u32) -> Self {
        let k = source.len();
        let comps = (0..k)
            .map(|i| {
                let mut s = Series::variable(k, order, i);
                s.set(MultiIndex::zero(), Form::scalar(source[i].clone()));
                s
            })
            .collect();
        GaugeSection { source, comps }
    }

    /// Y(t) = t + s: from source 0 to target s.
    pub fn translation(target: Vec<RationalField>, order: u32) -> Self {
        let k = target.len();
        let comps = (0..k)
            .map(|i| {
                let mut s = Series::variable(k, order, i);
                s.set(MultiIndex::zero(), Form::scalar(target[i].clone()));
                s
            })
            .collect();
        GaugeSection { source: vec![RationalField::zero(); k], comps }
    }

    pub fn k(&self) -> usize {
        self.source.len()
    }

    pub fn order(&self) -> u32 {
        self.comps[0].order()
    }

    pub fn source(&self) -> &[RationalField] {
        &self.source
    }

    pub fn target(&self) -> Vec<RationalField> {
        self.comps.iter().map(|c| c.constant_term().as_function().unwrap_or_default()).collect()
    }

    pub fn components(&self) -> &[Series<Form>] {
        &self.comps
    }

    /// y_{j,I}
    pub fn coeff(&self, j: usize, m: &MultiIndex) -> RationalField {
        self.comps[j].coeff(m).as_function().unwrap_or_default()
    }

    pub fn coeff1(&self, m: u32) -> RationalField {
        self.coeff(0, &MultiIndex::new(&[m]))
    }

    pub fn truncate(&self, n: u32) -> Self {
        GaugeSection { source: self.source.clone(), comps: self.comps.iter().map(|c| c.truncate(n)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        *self == GaugeSection::identity(self.source.clone(), self.order())
    }

    /// Determinant of the linear part, as a function.
    pub fn linear_determinant(&self) -> RationalField {
        determinant(&linear_part(&self.comps)).and_then(|d| d.as_function()).unwrap_or_default()
    }

    pub fn positivity(&self, chart: &Chart, domain: &SampleDomain) -> Positivity {
        check_positive(&self.linear_determinant(), chart, domain)
    }

    /// The section as a degree-0 jet form (for dY).
    pub fn as_jet_form(&self) -> JetForm {
        JetForm::new(0, self.source.clone(), self.comps.clone()).expect("section components are functions")
    }

    /// Jacobian inverse (Y′)^{-1} at order N−1.
    fn jacobian_inverse(&self) -> Result<Vec<Vec<Series<Form>>>> {
        jet_matrix_inverse(&jacobian(&self.comps))
    }

    /// Map the coefficients through a ring homomorphism on functions.
    pub fn map_fields(&self, f: impl Fn(&RationalField) -> Result<RationalField>) -> Result<Self> {
        let source = self.source.iter().map(&f).collect::<Result<_>>()?;
        let comps = self
            .comps
            .iter()
            .map(|c| c.try_map(|w| Ok(Form::scalar(f(&w.as_function().unwrap_or_default())?))))
            .collect::<Result<_>>()?;
        Ok(GaugeSection { source, comps })
    }
}

/// Composition Y∘Z = Y(Z(t)): Z acts first. Requires t_Z = s_Y.
pub fn compose_sections(inner: &GaugeSection, outer: &GaugeSection) -> Result<GaugeSection> {
    if inner.target() != outer.source {
        return Err(Error::Composition { target: "t_Z".into(), source_pt: "s_Y".into() });
    }
    if inner.order() != outer.order() {
        return Err(structural("sections of different order"));
    }
    Ok(GaugeSection { source: inner.source.clone(), comps: compose_components(&inner.comps, &outer.comps)? })
}

pub fn invert_section(y: &GaugeSection) -> Result<GaugeSection> {
    let src: Vec<Form> = y.source.iter().map(|s| Form::scalar(s.clone())).collect();
    Ok(GaugeSection { source: y.target(), comps: invert_components(&y.comps, &src)? })
}

/// Y⋆A = (Y′)^{-1}(A∘Y − dY), expanded at s_Y, at order N−1.
pub fn gauge(y: &GaugeSection, a: &JetForm) -> Result<JetForm> {
    if a.degree() != 1 {
        return Err(Error::Degree("the gauge action is on 1-forms".into()));
    }
    if y.target() != a.source() {
        return Err(Error::Domain("target of the section differs from the source of the cord".into()));
    }
    if y.order() != a.order() || y.k() != a.k() {
        return Err(structural("section and cord disagree on order or codimension"));
    }
    let n = a.order() - 1;
    let composed = a.compose_with(&y.comps)?.with_source(y.source.clone()).truncate(n);
    let dy = y.as_jet_form().d().truncate(n);
    let numer = composed.sub(&dy)?;
    let jinv = y.jacobian_inverse()?;
    let comps = matvec(&jinv, numer.components())?;
    JetForm::new(1, y.source.clone(), comps)
}

/// (Y′)^{-1}(W∘Y) for a form of any degree, at order N−1.
pub fn transport_form(y: &GaugeSection, w: &JetForm) -> Result<JetForm> {
    if y.target() != w.source() {
        return Err(Error::Domain("target of the section differs from the source of the form".into()));
    }
    if y.order() != w.order() {
        return Err(structural("section and form disagree on order"));
    }
    let n = w.order() - 1;
    let composed = w.compose_with(&y.comps)?.with_source(y.source.clone()).truncate(n);
    let jinv = y.jacobian_inverse()?;
    let comps = matvec(&jinv, composed.components())?;
    JetForm::new(w.degree(), y.source.clone(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;
    use crate::rational::{int, rat};

    fn c(r: crate::Rational) -> RationalField {
        RationalField::constant(r)
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let a = JetForm::univariate(1, 4, vec![Form::basis(1), Form::one_form(0, ScalarField::cos(&[(0, 1)]))]).unwrap();
        let id = GaugeSection::identity(vec![RationalField::zero()], 4);
        assert_eq!(gauge(&id, &a).unwrap(), a.truncate(3));
    }

    #[test]
    fn constant_arrow_fixes_zero_cord() {
        let y = GaugeSection::univariate(4, vec![c(int(0)), c(rat(1, 2))]).unwrap();
        let zero = JetForm::zero(1, 1, 4);
        assert!(gauge(&y, &zero).unwrap().is_zero());
    }

    #[test]
    fn translation_moves_source_to_zero() {
        // A with source s(x) = sin x: translation gives b_0 = a_0 − ds, the
        // 1-form whose flatness reads da_0 = a_1 ∧ (a_0 − ds)
        let s = RationalField::from(ScalarField::sin(&[(0, 1)]));
        let a = JetForm::new(
            1,
            vec![s.clone()],
            vec![Series::univariate(3, vec![Form::basis(1), Form::basis(0)])],
        )
        .unwrap();
        let y = GaugeSection::translation(vec![s.clone()], 3);
        let b = gauge(&y, &a).unwrap();
        assert!(b.source()[0].is_zero());
        assert_eq!(b.coeff1(0), Form::basis(1).sub(&Form::scalar(s).d()));
        assert_eq!(b.coeff1(1), Form::basis(0));
    }

    #[test]
    fn source_target_mismatch() {
        let y = GaugeSection::translation(vec![c(int(1))], 3);
        let a = JetForm::univariate(1, 3, vec![Form::basis(0)]).unwrap();
        assert!(gauge(&y, &a).is_err());
    }

    #[test]
    fn section_inverse() {
        let y = GaugeSection::univariate(4, vec![c(int(0)), RationalField::from(ScalarField::constant(int(2)).add(&ScalarField::cos(&[(0, 1)]))), c(int(1))]).unwrap();
        let yi = invert_section(&y).unwrap();
        assert!(compose_sections(&yi, &y).unwrap().is_identity());
        assert!(compose_sections(&y, &yi).unwrap().is_identity());
    }
}
