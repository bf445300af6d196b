//! Cords built from a defining 1-form a₀ and a transverse vector field V.

use crate::calculus::{check_positive, Chart, Form, Positivity, RationalField, SampleDomain, VectorField};
use crate::cord::jetform::{JetForm, QuantumCord};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

fn check_normalized(a0: &Form, v: &VectorField) -> Result<()> {
    let iv = a0.contract(v)?;
    if iv != Form::constant(int(-1)) {
        return Err(Error::Normalization(format!("ι_V(a0) = {iv:?}, expected -1")));
    }
    Ok(())
}

/// A = Σ L_V^n(a₀) tⁿ/n!, source 0.
pub fn gv_cord(a0: &Form, v: &VectorField, order: u32) -> Result<QuantumCord> {
    check_normalized(a0, v)?;
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    let mut cur = a0.clone();
    for n in 0..=order {
        if n > 0 {
            cur = cur.lie(v).scale(&Rational::new(1.into(), (n as i64).into()));
        }
        coeffs.push(cur.clone());
    }
    QuantumCord::certify(JetForm::univariate(1, order, coeffs)?)
}

/// Solve L_V(B) + [B,X] + dX = 0 with b₀ = x₀·a₀. The result satisfies
/// ι_V(B) + X = 0. Also returns how negativity of x₀ was established.
pub fn mc_cord(
    a0: &Form,
    v: &VectorField,
    x: &JetForm,
    order: u32,
    chart: &Chart,
    domain: &SampleDomain,
) -> Result<(QuantumCord, Positivity)> {
    check_normalized(a0, v)?;
    if x.degree() != 0 || x.k() != 1 || !x.source()[0].is_zero() {
        return Err(Error::Domain("X must be a codimension-one jet of functions with source 0".into()));
    }
    if x.order() < order {
        return Err(Error::Structural(format!("X is known to order {} < {order}", x.order())));
    }
    let xs: Vec<RationalField> = (0..=order).map(|n| x.coeff1(n).as_function().unwrap_or_default()).collect();
    let neg = check_positive(&xs[0].neg(), chart, domain);
    if !neg.holds() {
        return Err(Error::Domain(format!("x0 is not negative: {neg:?}")));
    }
    let inv_x0 = xs[0].recip().ok_or_else(|| Error::Domain("x0 vanishes".into()))?;
    let dx: Vec<Form> = xs.iter().map(|f| Form::scalar(f.clone()).d()).collect();
    let mut b: Vec<Form> = vec![a0.mul_function(&xs[0])];
    for n in 0..order as usize {
        // (n+1) x0 b_{n+1} = L_V b_n + Σ_{i+j=n} (j+1) x_{j+1} b_i − Σ_{i+j=n, i≥1} (j+1) x_i b_{j+1} + dx_n
        let mut rhs = b[n].lie(v).add(&dx[n]);
        for i in 0..=n {
            let j = n - i;
            rhs = rhs.add(&b[i].mul_function(&xs[j + 1]).scale(&int(j as i64 + 1)));
            if i >= 1 {
                rhs = rhs.sub(&b[j + 1].mul_function(&xs[i]).scale(&int(j as i64 + 1)));
            }
        }
        let next = rhs.mul_function(&inv_x0).scale(&Rational::new(1.into(), (n as i64 + 1).into()));
        b.push(next);
    }
    let cord = QuantumCord::certify(JetForm::univariate(1, order, b)?)?;
    Ok((cord, neg))
}

/// How the quadratic term of the coefficient flatness recursion is weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecursionFactor {
    /// ½ Σ_{p+q=m+1} (p−q) a_p a_q, matching dA + ½[A,A]
    Derived,
    /// Σ_{p+q=m+1} (p−q) a_p a_q, the weight as printed in the source text
    AsPrinted,
}

/// Codimension-one curvature via F_m = da_m + (m+1) a_{m+1}∧ds − w Σ_{p+q=m+1} (p−q) a_p∧a_q.
pub fn curvature_by_recursion(a: &JetForm, factor: RecursionFactor) -> Result<JetForm> {
    if a.k() != 1 || a.degree() != 1 {
        return Err(Error::Domain("the coefficient recursion is for codimension-one 1-forms".into()));
    }
    let n = a.order() - 1;
    let ds = Form::scalar(a.source()[0].clone()).d();
    let w = match factor {
        RecursionFactor::Derived => crate::rational::rat(1, 2),
        RecursionFactor::AsPrinted => int(1),
    };
    let coeffs = (0..=n)
        .map(|m| {
            let mut f = a.coeff1(m).d().add(&a.coeff1(m + 1).wedge(&ds).scale(&int(m as i64 + 1)));
            for p in 0..=m + 1 {
                let q = m + 1 - p;
                let term = a.coeff1(p).wedge(&a.coeff1(q)).scale(&(int(p as i64 - q as i64) * &w));
                f = f.sub(&term);
            }
            f
        })
        .collect();
    JetForm::new(2, a.source().to_vec(), vec![crate::series::Series::univariate(n, coeffs)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;
    use crate::cord::jetform::curvature;

    fn cylinder_a0() -> Form {
        Form::basis(1).add(&Form::one_form(0, ScalarField::coord(1).mul(&ScalarField::cos(&[(0, 1)]))))
    }

    fn minus_dy() -> VectorField {
        VectorField::coordinate(2, 1, int(-1))
    }

    #[test]
    fn gv_trivial_and_cylinder() {
        let a = gv_cord(&Form::basis(1), &minus_dy(), 6).unwrap();
        assert_eq!(a.form(), &JetForm::univariate(1, 6, vec![Form::basis(1)]).unwrap());
        let c = gv_cord(&cylinder_a0(), &minus_dy(), 6).unwrap();
        assert_eq!(c.form().coeff1(1), Form::one_form(0, ScalarField::cos(&[(0, 1)]).neg()));
        for m in 2..=6 {
            assert!(c.form().coeff1(m).is_zero());
        }
        assert!(gv_cord(&Form::basis(1), &VectorField::coordinate(2, 1, int(1)), 3).is_err());
    }

    #[test]
    fn recursion_cross_check() {
        let c = gv_cord(&cylinder_a0(), &minus_dy(), 5).unwrap();
        let f = curvature(c.form()).unwrap();
        assert_eq!(curvature_by_recursion(c.form(), RecursionFactor::Derived).unwrap(), f);
        // the printed weight double counts: residual −cos x dy∧dx = cos x dx∧dy at order 0
        let printed = curvature_by_recursion(c.form(), RecursionFactor::AsPrinted).unwrap();
        assert_eq!(
            printed.coeff1(0),
            Form::component(0b11, ScalarField::cos(&[(0, 1)]).into())
        );
    }

    #[test]
    fn mc_cord_constant_x() {
        let chart = Chart::cylinder();
        let x = JetForm::univariate(0, 4, vec![Form::constant(int(-1))]).unwrap();
        let (b, pos) = mc_cord(&Form::basis(1), &minus_dy(), &x, 4, &chart, &SampleDomain::default()).unwrap();
        assert!(matches!(pos, Positivity::Certified(_)));
        assert_eq!(b.form(), &JetForm::univariate(1, 4, vec![Form::basis(1).neg()]).unwrap());
        let zero = JetForm::univariate(0, 4, vec![Form::constant(int(1))]).unwrap();
        assert!(mc_cord(&Form::basis(1), &minus_dy(), &zero, 4, &chart, &SampleDomain::default()).is_err());
    }

    #[test]
    fn mc_cord_reproduces_gv_up_to_sign_flip() {
        let chart = Chart::cylinder();
        let x = JetForm::univariate(0, 5, vec![Form::constant(int(-1))]).unwrap();
        let (b, _) = mc_cord(&cylinder_a0(), &minus_dy(), &x, 5, &chart, &SampleDomain::default()).unwrap();
        let a = gv_cord(&cylinder_a0(), &minus_dy(), 5).unwrap();
        for n in 0..=5u32 {
            let sign = if n % 2 == 0 { -1 } else { 1 };
            assert_eq!(b.form().coeff1(n), a.form().coeff1(n).scale(&int(sign)));
        }
    }
}
