//! Exact jets and the groupoid of quantized diffeomorphisms.

use std::fmt;

use crate::error::{structural, Error, Result};
use crate::rational::{fmt_rational, Rational};
use crate::series::{substitute, Coeff, MultiIndex, Series};

/// A truncated series in k variables expanded at `basepoint`.
#[derive(Clone, PartialEq, Debug)]
pub struct Jet {
    pub basepoint: Vec<Rational>,
    pub series: Series<Rational>,
}

impl Jet {
    pub fn new(basepoint: Vec<Rational>, series: Series<Rational>) -> Result<Self> {
        if basepoint.len() != series.k() {
            return Err(structural("basepoint dimension differs from series dimension"));
        }
        Ok(Jet { basepoint, series })
    }

    pub fn k(&self) -> usize {
        self.series.k()
    }

    pub fn order(&self) -> u32 {
        self.series.order()
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.basepoint != other.basepoint {
            return Err(structural("jets at different basepoints"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet { basepoint: self.basepoint.clone(), series: self.series.add(&other.series)? })
    }
}

/// Truncated product of two jets sharing basepoint and order.
pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.check(b)?;
    Ok(Jet { basepoint: a.basepoint.clone(), series: a.series.mul(&b.series)? })
}

/// k jets sharing basepoint and order.
#[derive(Clone, PartialEq, Debug)]
pub struct JetVector {
    pub basepoint: Vec<Rational>,
    pub components: Vec<Series<Rational>>,
}

/// An arrow of 𝒬_k: components expanded at `source`, whose constant terms
/// form the target. The linear part has positive determinant.
#[derive(Clone, PartialEq)]
pub struct GroupoidArrow {
    source: Vec<Rational>,
    components: Vec<Series<Rational>>,
}

impl GroupoidArrow {
    pub fn new(source: Vec<Rational>, components: Vec<Series<Rational>>) -> Result<Self> {
        let k = source.len();
        if components.len() != k || components.iter().any(|c| c.k() != k) {
            return Err(structural(format!("an arrow of Q_{k} needs {k} components in {k} variables")));
        }
        let order = components[0].order();
        if components.iter().any(|c| c.order() != order) {
            return Err(structural("arrow components disagree on order"));
        }
        if order == 0 {
            return Err(structural("arrows need order at least 1"));
        }
        let det = determinant(&linear_part(&components))
            .ok_or_else(|| Error::Domain("linear part could not be evaluated".into()))?;
        if det <= num_traits::Zero::zero() {
            return Err(Error::Domain(format!("linear part has determinant {}", fmt_rational(&det))));
        }
        Ok(GroupoidArrow { source, components })
    }

    pub fn identity(point: Vec<Rational>, order: u32) -> Self {
        let k = point.len();
        let components = (0..k)
            .map(|i| {
                let mut s = Series::variable(k, order, i);
                s.set(MultiIndex::zero(), point[i].clone());
                s
            })
            .collect();
        GroupoidArrow { source: point, components }
    }

    /// Univariate arrow from coefficients y_0, y_1, ... (y_0 is the target).
    pub fn univariate(source: Rational, order: u32, coeffs: Vec<Rational>) -> Result<Self> {
        Self::new(vec![source], vec![Series::univariate(order, coeffs)])
    }

    pub fn k(&self) -> usize {
        self.source.len()
    }

    pub fn order(&self) -> u32 {
        self.components[0].order()
    }

    pub fn source(&self) -> &[Rational] {
        &self.source
    }

    pub fn target(&self) -> Vec<Rational> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn components(&self) -> &[Series<Rational>] {
        &self.components
    }

    pub fn as_jet_vector(&self) -> JetVector {
        JetVector { basepoint: self.source.clone(), components: self.components.clone() }
    }

    pub fn linear_matrix(&self) -> Vec<Vec<Rational>> {
        linear_part(&self.components)
    }

    pub fn truncate(&self, n: u32) -> Self {
        GroupoidArrow {
            source: self.source.clone(),
            components: self.components.iter().map(|c| c.truncate(n)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target() && *self == GroupoidArrow::identity(self.source.clone(), self.order())
    }
}

impl fmt::Debug for GroupoidArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src: Vec<String> = self.source.iter().map(fmt_rational).collect();
        write!(f, "Arrow[{}] ", src.join(","))?;
        f.debug_list().entries(self.components.iter()).finish()
    }
}

/// Compose arrows: the result is `outer(inner(t))`, from source(inner) to target(outer).
pub fn arrow_compose(inner: &GroupoidArrow, outer: &GroupoidArrow) -> Result<GroupoidArrow> {
    let t = inner.target();
    if t != outer.source {
        return Err(Error::Composition {
            target: fmt_point(&t),
            source_pt: fmt_point(&outer.source),
        });
    }
    let components = compose_components(&inner.components, &outer.components)?;
    Ok(GroupoidArrow { source: inner.source.clone(), components })
}

pub fn arrow_invert(y: &GroupoidArrow) -> Result<GroupoidArrow> {
    let components = invert_components(&y.components, &y.source)?;
    Ok(GroupoidArrow { source: y.target(), components })
}

fn fmt_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

/// Linear-part matrix L[j][l] = coefficient of u_l in component j.
pub fn linear_part<C: Coeff>(components: &[Series<C>]) -> Vec<Vec<C>> {
    let k = components.len();
    components
        .iter()
        .map(|c| (0..k).map(|l| c.coeff(&MultiIndex::unit(l))).collect())
        .collect()
}

/// Determinant by elimination; `None` only if a pivot has no inverse.
pub fn determinant<C: Coeff>(m: &[Vec<C>]) -> Option<C> {
    let k = m.len();
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut det = C::one();
    for col in 0..k {
        let Some(p) = (col..k).find(|&r| !a[r][col].is_zero()) else {
            return Some(C::zero());
        };
        if p != col {
            a.swap(p, col);
            det = det.neg();
        }
        det = det.mul(&a[col][col]);
        let inv = a[col][col].recip()?;
        for r in col + 1..k {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&inv);
            for c in col..k {
                let v = a[r][c].sub(&f.mul(&a[col][c]));
                a[r][c] = v;
            }
        }
    }
    Some(det)
}

/// Inverse of a constant matrix by Gauss–Jordan elimination.
pub fn constant_matrix_inverse<C: Coeff>(m: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let k = m.len();
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut inv: Vec<Vec<C>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { C::one() } else { C::zero() }).collect())
        .collect();
    for col in 0..k {
        let p = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Domain("singular constant matrix".into()))?;
        a.swap(p, col);
        inv.swap(p, col);
        let piv = a[col][col]
            .recip()
            .ok_or_else(|| Error::Domain("pivot is not invertible".into()))?;
        for c in 0..k {
            a[col][c] = piv.mul(&a[col][c]);
            inv[col][c] = piv.mul(&inv[col][c]);
        }
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..k {
                a[r][c] = a[r][c].sub(&f.mul(&a[col][c]));
                inv[r][c] = inv[r][c].sub(&f.mul(&inv[col][c]));
            }
        }
    }
    Ok(inv)
}

/// Substitute `inner` into `outer`; the shift is inner's constant terms, i.e.
/// outer is expanded at inner's target.
pub fn compose_components<C: Coeff>(inner: &[Series<C>], outer: &[Series<C>]) -> Result<Vec<Series<C>>> {
    let shift: Vec<C> = inner.iter().map(|s| s.constant_term()).collect();
    outer.iter().map(|o| substitute(o, inner, &shift)).collect()
}

/// Inverse of an invertible jet map expanded at `source`. The result is
/// expanded at the target and has `source` as its constant terms.
pub fn invert_components<C: Coeff>(y: &[Series<C>], source: &[C]) -> Result<Vec<Series<C>>> {
    let k = y.len();
    let order = y[0].order();
    let linv = constant_matrix_inverse(&linear_part(y))?;
    let mut g: Vec<Series<C>> = (0..k)
        .map(|i| {
            let mut s = Series::constant(k, order, source[i].clone());
            for (l, c) in linv[i].iter().enumerate() {
                if order >= 1 {
                    s.set(MultiIndex::unit(l), c.clone());
                }
            }
            s
        })
        .collect();
    for m in 2..=order {
        let gm: Vec<Series<C>> = g.iter().map(|s| s.truncate(m)).collect();
        let ym: Vec<Series<C>> = y.iter().map(|s| s.truncate(m)).collect();
        let shift: Vec<C> = source.to_vec();
        let e: Vec<Series<C>> = ym
            .iter()
            .map(|o| substitute(o, &gm, &shift))
            .collect::<Result<_>>()?;
        for (i, gi) in g.iter_mut().enumerate() {
            let idx: Vec<MultiIndex> = e
                .iter()
                .flat_map(|s| s.terms().filter(|(mi, _)| mi.degree() == m).map(|(mi, _)| *mi))
                .collect();
            for mi in idx {
                let mut v = C::zero();
                for (j, ej) in e.iter().enumerate() {
                    v = v.sub(&linv[i][j].mul(&ej.coeff(&mi)));
                }
                gi.set(mi, v);
            }
        }
    }
    Ok(g)
}

/// Jacobian J[j][l] = ∂Y_j/∂u_l, at order N−1.
pub fn jacobian<C: Coeff>(y: &[Series<C>]) -> Vec<Vec<Series<C>>> {
    let k = y.len();
    y.iter().map(|s| (0..k).map(|l| s.partial(l)).collect()).collect()
}

/// Inverse of a square matrix of series: exact constant inverse, then the
/// geometric series in the nilpotent remainder.
pub fn jet_matrix_inverse<C: Coeff>(m: &[Vec<Series<C>>]) -> Result<Vec<Vec<Series<C>>>> {
    let k = m.len();
    if k == 0 || m.iter().any(|row| row.len() != k) {
        return Err(structural("matrix must be square and nonempty"));
    }
    let (kv, order) = (m[0][0].k(), m[0][0].order());
    let m0: Vec<Vec<C>> = m.iter().map(|r| r.iter().map(|s| s.constant_term()).collect()).collect();
    let inv0 = constant_matrix_inverse(&m0)?;
    let inv0s: Vec<Vec<Series<C>>> = inv0
        .iter()
        .map(|r| r.iter().map(|c| Series::constant(kv, order, c.clone())).collect())
        .collect();
    // M = M0 (1 + Q), Q = M0^{-1} R
    let rem: Vec<Vec<Series<C>>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.set(MultiIndex::zero(), C::zero());
                    s
                })
                .collect()
        })
        .collect();
    let q = matmul(&inv0s, &rem)?;
    let ident = identity_matrix::<C>(k, kv, order);
    let mut acc = ident.clone();
    let mut power = ident;
    for _ in 0..order {
        power = matneg(&matmul(&power, &q)?);
        acc = matadd(&acc, &power)?;
    }
    matmul(&acc, &inv0s)
}

pub fn identity_matrix<C: Coeff>(k: usize, kv: usize, order: u32) -> Vec<Vec<Series<C>>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { Series::constant(kv, order, C::one()) } else { Series::zero(kv, order) })
                .collect()
        })
        .collect()
}

pub fn matmul<C: Coeff>(a: &[Vec<Series<C>>], b: &[Vec<Series<C>>]) -> Result<Vec<Vec<Series<C>>>> {
    let n = a.len();
    let inner = b.len();
    let cols = b[0].len();
    let (kv, order) = (a[0][0].k(), a[0][0].order());
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = Series::zero(kv, order);
            for l in 0..inner {
                if row[l].is_zero() || b[l][j].is_zero() {
                    continue;
                }
                acc = acc.add(&row[l].mul(&b[l][j])?)?;
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

/// Matrix times column vector of series.
pub fn matvec<C: Coeff>(a: &[Vec<Series<C>>], v: &[Series<C>]) -> Result<Vec<Series<C>>> {
    let col: Vec<Vec<Series<C>>> = v.iter().map(|s| vec![s.clone()]).collect();
    Ok(matmul(a, &col)?.into_iter().map(|mut r| r.remove(0)).collect())
}

fn matadd<C: Coeff>(a: &[Vec<Series<C>>], b: &[Vec<Series<C>>]) -> Result<Vec<Vec<Series<C>>>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

fn matneg<C: Coeff>(a: &[Vec<Series<C>>]) -> Vec<Vec<Series<C>>> {
    a.iter().map(|r| r.iter().map(|s| s.neg()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn arrow1(src: i64, order: u32, c: &[Rational]) -> GroupoidArrow {
        GroupoidArrow::univariate(int(src), order, c.to_vec()).unwrap()
    }

    #[test]
    fn jet_mul_difference_of_squares() {
        let a = Jet::new(vec![int(0)], Series::univariate(2, vec![int(1), int(1)])).unwrap();
        let b = Jet::new(vec![int(0)], Series::univariate(2, vec![int(1), int(-1)])).unwrap();
        let p = jet_mul(&a, &b).unwrap();
        assert_eq!(p.series, Series::univariate(2, vec![int(1), int(0), int(-1)]));
        let c = Jet::new(vec![int(1)], a.series.clone()).unwrap();
        assert!(jet_mul(&a, &c).is_err());
    }

    #[test]
    fn compose_example() {
        let z = arrow1(0, 3, &[int(0), int(1), int(0), int(1)]);
        let y = arrow1(0, 3, &[int(0), int(2), int(1)]);
        let r = arrow_compose(&z, &y).unwrap();
        assert_eq!(r, arrow1(0, 3, &[int(0), int(2), int(1), int(2)]));
    }

    #[test]
    fn compose_affine_translations() {
        // Z(t) = t + 1 : 0 -> 1, Y(t) = t - 1 written at 1 : 1 -> 0
        let z = arrow1(0, 3, &[int(1), int(1)]);
        let y = arrow1(1, 3, &[int(0), int(1)]);
        let r = arrow_compose(&z, &y).unwrap();
        assert!(r.is_identity());
        assert!(arrow_compose(&y, &y).is_err());
    }

    #[test]
    fn invert_example() {
        let y = arrow1(0, 3, &[int(0), int(2), int(1)]);
        let g = arrow_invert(&y).unwrap();
        assert_eq!(g, arrow1(0, 3, &[int(0), rat(1, 2), rat(-1, 8), rat(1, 16)]));
        assert!(arrow_compose(&g, &y).unwrap().is_identity());
        assert!(arrow_compose(&y, &g).unwrap().is_identity());
    }

    #[test]
    fn negative_linear_part_rejected() {
        assert!(GroupoidArrow::univariate(int(0), 2, vec![int(0), int(-1)]).is_err());
    }

    #[test]
    fn matrix_inverse_geometric() {
        let t1 = Series::<Rational>::variable(2, 3, 0);
        let one = Series::constant(2, 3, int(1));
        let zero = Series::zero(2, 3);
        let m = vec![vec![one.add(&t1).unwrap(), zero.clone()], vec![zero.clone(), one.clone()]];
        let inv = jet_matrix_inverse(&m).unwrap();
        let expect = Series::from_terms(
            2,
            3,
            (0..=3).map(|d| (MultiIndex::new(&[d, 0]), int(if d % 2 == 0 { 1 } else { -1 }))),
        );
        assert_eq!(inv[0][0], expect);
        assert_eq!(inv[1][1], one);
        assert!(inv[0][1].is_zero() && inv[1][0].is_zero());

        let c = vec![
            vec![Series::constant(2, 3, int(2)), zero.clone()],
            vec![zero.clone(), Series::constant(2, 3, int(3))],
        ];
        let ci = jet_matrix_inverse(&c).unwrap();
        assert_eq!(ci[0][0].constant_term(), rat(1, 2));
        assert_eq!(ci[1][1].constant_term(), rat(1, 3));
    }

    #[test]
    fn singular_matrix_rejected() {
        let z = Series::<Rational>::zero(1, 2);
        assert!(jet_matrix_inverse(&[vec![z]]).is_err());
    }
}
