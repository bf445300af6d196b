//! Order-by-order solvers for gauge sections in codimension one.

use crate::calculus::{check_positive, Chart, Form, RationalField, SampleDomain, VectorField};
use crate::cord::gauge::{gauge, GaugeSection};
use crate::cord::jetform::{is_impotent, JetForm, QuantumCord};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::series::Series;

fn functions(j: &JetForm, upto: u32) -> Vec<RationalField> {
    (0..=upto).map(|n| j.coeff1(n).as_function().unwrap_or_default()).collect()
}

fn lie_fn(f: &RationalField, v: &VectorField) -> RationalField {
    Form::scalar(f.clone()).lie(v).as_function().unwrap_or_default()
}

fn recip_n(n: u32) -> Rational {
    Rational::new(1.into(), (n as i64).into())
}

/// Solve X·Y′ = C∘Y − L_V Y with y₀ = 0, where C = ι_V A and the source of A
/// is 0. This is ι_V(Y⋆A) = X written without the division by Y′.
fn solve_contracted(a: &JetForm, v: &VectorField, x: &[RationalField]) -> Result<GaugeSection> {
    let order = a.order();
    let c = a.contract(v)?;
    let inv_x0 = x[0].recip().ok_or_else(|| Error::Domain("x0 vanishes".into()))?;
    let mut ys: Vec<RationalField> = vec![RationalField::zero(); order as usize + 1];
    for n in 0..order as usize {
        let series = Series::univariate(order, ys.iter().map(|f| Form::scalar(f.clone())).collect());
        let cy = c.compose_with(&[series])?;
        let mut rhs = cy.coeff1(n as u32).as_function().unwrap_or_default().sub(&lie_fn(&ys[n], v));
        for i in 1..=n {
            let j = n - i + 1;
            rhs = rhs.sub(&x[i].mul(&ys[j]).scale(&int(j as i64)));
        }
        ys[n + 1] = rhs.mul(&inv_x0).scale(&recip_n(n as u32 + 1));
    }
    GaugeSection::univariate(order, ys)
}

fn check_codim_one(a: &JetForm, v: &VectorField) -> Result<()> {
    if a.k() != 1 || !a.source()[0].is_zero() {
        return Err(Error::Domain("the fiber solvers need a codimension-one cord with source 0".into()));
    }
    let c0 = a.coeff1(0).contract(v)?;
    if c0 != Form::constant(int(-1)) {
        return Err(Error::Normalization(format!("ι_V(a0) = {c0:?}, expected -1")));
    }
    Ok(())
}

/// The section Y with ι_V(Y⋆A) = X. X must be known to order N−1 and have
/// x₀ < 0, which makes y₁ = −1/x₀ positive.
pub fn fiber_solve(
    a: &QuantumCord,
    v: &VectorField,
    x: &JetForm,
    chart: &Chart,
    domain: &SampleDomain,
) -> Result<GaugeSection> {
    let a = a.form();
    check_codim_one(a, v)?;
    if x.degree() != 0 || x.k() != 1 || x.order() + 1 < a.order() {
        return Err(Error::Domain("X must be a codimension-one jet of functions of order ≥ N−1".into()));
    }
    let xs = functions(x, a.order() - 1);
    let neg = check_positive(&xs[0].neg(), chart, domain);
    if !neg.holds() {
        return Err(Error::Domain(format!("x0 is not negative: {neg:?}")));
    }
    let y = solve_contracted(a, v, &xs)?;
    let achieved = gauge(&y, a)?.contract(v)?;
    let wanted = x.truncate(achieved.order());
    if achieved != wanted {
        return Err(Error::Domain("fiber solution fails ι_V(Y⋆A) = X".into()));
    }
    Ok(y)
}

/// The solution of Y⋆A = A. For a nonsingular normalized cord it is the
/// identity; any other outcome is an error.
pub fn stabilizer_solve(a: &QuantumCord, v: &VectorField) -> Result<GaugeSection> {
    let form = a.form();
    if is_impotent(form) {
        return Err(Error::Domain("impotent cord: every constant arrow fixing 0 stabilizes it".into()));
    }
    check_codim_one(form, v)?;
    let c = form.contract(v)?;
    let y = solve_contracted(form, v, &functions(&c, form.order() - 1))?;
    if !y.is_identity() {
        return Err(Error::Domain("stabilizer solution is not the identity".into()));
    }
    if !gauge(&y, form)?.agrees_with(form) {
        return Err(Error::Domain("stabilizer solution does not fix A".into()));
    }
    Ok(y)
}

/// For A = f(t,x) dx_i on a chart where dx_i is the only direction, with
/// source 0 and f₀ invertible: the section Y with Y⋆0 = A, starting from
/// y₀. Order m of f·Y′ = −∂_i Y gives
/// y_{m+1} = −(∂_i y_m + Σ_{j<m} (j+1) y_{j+1} f_{m−j}) / ((m+1) f₀).
pub fn local_trivialization(a: &QuantumCord, i: usize, y0: RationalField) -> Result<GaugeSection> {
    let form = a.form();
    if form.k() != 1 || !form.source()[0].is_zero() {
        return Err(Error::Domain("local trivialization needs a codimension-one cord with source 0".into()));
    }
    let order = form.order();
    let mask = 1u32 << i;
    let mut f = Vec::with_capacity(order as usize + 1);
    for m in 0..=order {
        let c = form.coeff1(m);
        if c.components().any(|(k, _)| *k != mask) {
            return Err(Error::Domain(format!("cord has components off dx_{i}")));
        }
        f.push(c.get(mask));
    }
    let inv_f0 = f[0].recip().ok_or_else(|| Error::Domain("f0 vanishes".into()))?;
    let mut ys = vec![y0];
    for m in 0..order as usize {
        let mut acc = ys[m].partial(i as u8);
        for j in 0..m {
            acc = acc.add(&ys[j + 1].mul(&f[m - j]).scale(&int(j as i64 + 1)));
        }
        ys.push(acc.neg().mul(&inv_f0).scale(&recip_n(m as u32 + 1)));
    }
    let y = GaugeSection::univariate(order, ys)?;
    let trivial = JetForm::zero(1, 1, order).with_source(y.target());
    if !gauge(&y, &trivial)?.agrees_with(form) {
        return Err(Error::Domain("trivialization fails Y⋆0 = A".into()));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;
    use crate::cord::gv::gv_cord;
    use crate::rational::rat;

    fn c(r: Rational) -> RationalField {
        RationalField::constant(r)
    }

    fn minus_dy() -> VectorField {
        VectorField::coordinate(2, 1, int(-1))
    }

    fn xjet(order: u32, coeffs: Vec<Rational>) -> JetForm {
        JetForm::univariate(0, order, coeffs.into_iter().map(Form::constant).collect()).unwrap()
    }

    fn cylinder() -> QuantumCord {
        let a0 = Form::basis(1).add(&Form::one_form(0, ScalarField::coord(1).mul(&ScalarField::cos(&[(0, 1)]))));
        gv_cord(&a0, &minus_dy(), 8).unwrap()
    }

    #[test]
    fn fiber_solutions() {
        let chart = Chart::cylinder();
        let dom = SampleDomain::default();
        let a = gv_cord(&Form::basis(1), &minus_dy(), 6).unwrap();
        let id = fiber_solve(&a, &minus_dy(), &xjet(5, vec![int(-1)]), &chart, &dom).unwrap();
        assert!(id.is_identity());
        let half = fiber_solve(&a, &minus_dy(), &xjet(5, vec![int(-2)]), &chart, &dom).unwrap();
        assert_eq!(half, GaugeSection::univariate(6, vec![c(int(0)), c(rat(1, 2))]).unwrap());
        // Y′ = 1/(1−t)
        let log = fiber_solve(&a, &minus_dy(), &xjet(5, vec![int(-1), int(1)]), &chart, &dom).unwrap();
        let expect = (0..=6).map(|m| if m == 0 { c(int(0)) } else { c(rat(1, m)) }).collect();
        assert_eq!(log, GaugeSection::univariate(6, expect).unwrap());
        assert!(fiber_solve(&a, &minus_dy(), &xjet(5, vec![int(1)]), &chart, &dom).is_err());
    }

    #[test]
    fn fiber_then_stabilizer_is_unique() {
        let chart = Chart::cylinder();
        let a = cylinder();
        let x = xjet(7, vec![int(-2), int(1), rat(1, 3)]);
        let y = fiber_solve(&a, &minus_dy(), &x, &chart, &SampleDomain::default()).unwrap();
        let b = gauge(&y, a.form()).unwrap();
        let xb = b.contract(&minus_dy()).unwrap();
        // re-solve against the order-8 cord with X = ι_V(Y⋆A)
        let y2 = fiber_solve(&a, &minus_dy(), &xb, &chart, &SampleDomain::default()).unwrap();
        assert_eq!(y, y2);
    }

    #[test]
    fn stabilizers() {
        let dy = gv_cord(&Form::basis(1), &minus_dy(), 8).unwrap();
        assert!(stabilizer_solve(&dy, &minus_dy()).unwrap().is_identity());
        assert!(stabilizer_solve(&cylinder(), &minus_dy()).unwrap().is_identity());
        let zero = QuantumCord::certify(JetForm::zero(1, 1, 8)).unwrap();
        assert!(stabilizer_solve(&zero, &minus_dy()).is_err());
    }

    #[test]
    fn arctan_trivialization() {
        // A = (1+t²) ds on the line, Y = −s + arctan t
        let a = JetForm::univariate(1, 7, vec![Form::basis(0), Form::zero(), Form::basis(0)]).unwrap();
        let a = QuantumCord::certify(a).unwrap();
        let y0 = RationalField::from(ScalarField::coord(0)).neg();
        let y = local_trivialization(&a, 0, y0.clone()).unwrap();
        let arctan = [int(0), int(1), int(0), rat(-1, 3), int(0), rat(1, 5), int(0), rat(-1, 7)];
        for (m, r) in arctan.iter().enumerate() {
            let want = if m == 0 { y0.clone() } else { c(r.clone()) };
            assert_eq!(y.coeff1(m as u32), want);
        }
    }
}
