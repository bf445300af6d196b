//! Truncated multivariate power series over a generic coefficient ring.
//!
//! Storage is sparse (`BTreeMap<MultiIndex, C>`); products and substitution
//! go through a dense buffer laid out by [`IndexTable`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{structural, Result};
use crate::rational::Rational;

/// Largest number of series variables supported.
pub const MAX_VARS: usize = 4;

/// Coefficient ring of a series. Multiplication need not be commutative
/// (forms use the wedge product).
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    /// Multiplicative inverse, when `self` is a unit.
    fn recip(&self) -> Option<Self>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn recip(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(num_traits::Inv::inv(self.clone()))
        }
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        crate::rational::to_f64(r)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, r: &Rational) -> Self {
        self * crate::rational::to_f64(r)
    }
    fn recip(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

/// Exponent vector of a monomial in at most [`MAX_VARS`] variables.
/// Unused trailing slots are zero. Ordered graded-lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex([u8; MAX_VARS]);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex([0; MAX_VARS])
    }

    pub fn new(exps: &[u32]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        let mut e = [0u8; MAX_VARS];
        for (slot, &x) in e.iter_mut().zip(exps) {
            *slot = u8::try_from(x).expect("exponent fits in u8");
        }
        MultiIndex(e)
    }

    /// `e_i`, the index of the i-th variable to the first power.
    pub fn unit(i: usize) -> Self {
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&x| x as u32).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        MultiIndex(e)
    }

    /// `self - e_i`, if that is still a valid index.
    pub fn lower(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0;
        e[i] -= 1;
        Some(MultiIndex(e))
    }

    pub fn exponents(&self, k: usize) -> Vec<u32> {
        self.0[..k].iter().map(|&x| x as u32).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0)
    }
}

/// All multi-indices of degree ≤ N in k variables, graded-lex ordered,
/// together with the product table used by the dense kernels.
pub struct IndexTable {
    pub k: usize,
    pub order: u32,
    pub indices: Vec<MultiIndex>,
    pos: HashMap<MultiIndex, usize>,
    /// (i, j, i+j) position triples with deg(i)+deg(j) ≤ N.
    products: Vec<(u32, u32, u32)>,
    /// first position of each degree, plus a final sentinel
    degree_start: Vec<usize>,
}

impl IndexTable {
    fn build(k: usize, order: u32) -> Self {
        let mut indices = Vec::new();
        let mut degree_start = Vec::new();
        for d in 0..=order {
            degree_start.push(indices.len());
            let mut level = Vec::new();
            gen_degree(k, d, &mut vec![0; k], 0, &mut level);
            level.sort();
            indices.extend(level);
        }
        degree_start.push(indices.len());
        let pos: HashMap<_, _> = indices.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if a.degree() + b.degree() <= order {
                    products.push((i as u32, j as u32, pos[&a.add(b)] as u32));
                }
            }
        }
        IndexTable { k, order, indices, pos, products, degree_start }
    }

    /// Shared table for (k, order).
    pub fn get(k: usize, order: u32) -> Arc<IndexTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<IndexTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap();
        map.entry((k, order))
            .or_insert_with(|| Arc::new(IndexTable::build(k, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.pos.get(m).copied()
    }

    /// Positions of all indices of exactly degree d.
    pub fn degree_range(&self, d: u32) -> std::ops::Range<usize> {
        if d > self.order {
            return 0..0;
        }
        self.degree_start[d as usize]..self.degree_start[d as usize + 1]
    }

    pub fn dense_mul<C: Coeff>(&self, a: &[C], b: &[C]) -> Vec<C> {
        let mut out = vec![C::zero(); self.len()];
        let az: Vec<bool> = a.iter().map(|c| c.is_zero()).collect();
        let bz: Vec<bool> = b.iter().map(|c| c.is_zero()).collect();
        for &(i, j, r) in &self.products {
            let (i, j) = (i as usize, j as usize);
            if az[i] || bz[j] {
                continue;
            }
            out[r as usize].add_assign(&a[i].mul(&b[j]));
        }
        out
    }
}

fn gen_degree(k: usize, d: u32, cur: &mut Vec<u32>, slot: usize, out: &mut Vec<MultiIndex>) {
    if slot + 1 == k {
        cur[slot] = d;
        out.push(MultiIndex::new(cur));
        return;
    }
    if k == 0 {
        return;
    }
    for e in 0..=d {
        cur[slot] = e;
        gen_degree(k, d - e, cur, slot + 1, out);
    }
    cur[slot] = 0;
}

/// A power series in k variables truncated above total degree `order`.
#[derive(Clone, PartialEq)]
pub struct Series<C> {
    k: usize,
    order: u32,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Series<C> {
    pub fn zero(k: usize, order: u32) -> Self {
        assert!(k <= MAX_VARS);
        Series { k, order, terms: BTreeMap::new() }
    }

    pub fn constant(k: usize, order: u32, c: C) -> Self {
        let mut s = Self::zero(k, order);
        s.set(MultiIndex::zero(), c);
        s
    }

    /// The i-th variable u_i.
    pub fn variable(k: usize, order: u32, i: usize) -> Self {
        let mut s = Self::zero(k, order);
        if order >= 1 {
            s.set(MultiIndex::unit(i), C::one());
        }
        s
    }

    /// Univariate series from coefficients c_0, c_1, ...
    pub fn univariate(order: u32, coeffs: Vec<C>) -> Self {
        let mut s = Self::zero(1, order);
        for (m, c) in coeffs.into_iter().enumerate() {
            if m as u32 <= order {
                s.set(MultiIndex::new(&[m as u32]), c);
            }
        }
        s
    }

    pub fn from_terms(k: usize, order: u32, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Self {
        let mut s = Self::zero(k, order);
        for (m, c) in terms {
            if m.degree() <= order {
                let sum = s.coeff(&m).add(&c);
                s.set(m, sum);
            }
        }
        s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, m: &MultiIndex) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of u^m in one variable.
    pub fn coeff1(&self, m: u32) -> C {
        self.coeff(&MultiIndex::new(&[m]))
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&MultiIndex::zero())
    }

    pub fn set(&mut self, m: MultiIndex, c: C) {
        debug_assert!(m.degree() <= self.order);
        if c.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_terms(self.k, self.order, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn try_map<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<Series<D>> {
        let mut out = Series::zero(self.k, self.order);
        for (m, c) in &self.terms {
            out.set(*m, f(c)?);
        }
        Ok(out)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.order != other.order {
            return Err(structural(format!(
                "series shape (k={}, N={}) vs (k={}, N={})",
                self.k, self.order, other.k, other.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let s = out.coeff(m).add(c);
            out.set(*m, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.map(|c| c.scale(r))
    }

    /// Multiply every coefficient on the left by `c`.
    pub fn lmul_coeff(&self, c: &C) -> Self {
        self.map(|x| c.mul(x))
    }

    /// Multiply every coefficient on the right by `c`.
    pub fn rmul_coeff(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn to_dense(&self, table: &IndexTable) -> Vec<C> {
        let mut v = vec![C::zero(); table.len()];
        for (m, c) in &self.terms {
            v[table.position(m).expect("index within table")] = c.clone();
        }
        v
    }

    pub fn from_dense(table: &IndexTable, v: Vec<C>) -> Self {
        let mut s = Self::zero(table.k, table.order);
        for (m, c) in table.indices.iter().zip(v) {
            s.set(*m, c);
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let table = IndexTable::get(self.k, self.order);
        let out = table.dense_mul(&self.to_dense(&table), &other.to_dense(&table));
        Ok(Self::from_dense(&table, out))
    }

    /// Drop all terms above degree `n` (n ≤ current order).
    pub fn truncate(&self, n: u32) -> Self {
        assert!(n <= self.order, "truncate can only lower the order");
        Series {
            k: self.k,
            order: n,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= n).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Homogeneous part of degree d, as a series of the same shape.
    pub fn homogeneous(&self, d: u32) -> Self {
        Series {
            k: self.k,
            order: self.order,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// ∂/∂u_i; the result is exact only through order N−1, and is returned at that order.
    pub fn partial(&self, i: usize) -> Self {
        let n = self.order.saturating_sub(1);
        let mut out = Series::zero(self.k, n);
        for (m, c) in &self.terms {
            if let Some(lo) = m.lower(i) {
                if lo.degree() <= n {
                    out.set(lo, c.scale(&crate::rational::int(m.get(i) as i64)));
                }
            }
        }
        out
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    /// Multiplicative inverse, when the constant term is a unit.
    pub fn recip(&self) -> Option<Self> {
        let c0 = self.constant_term();
        let inv0 = c0.recip()?;
        // 1/(c0 + r) = (1 + inv0 r)^{-1} inv0 with inv0 r nilpotent
        let mut q = self.clone();
        q.set(MultiIndex::zero(), C::zero());
        let q = q.lmul_coeff(&inv0);
        let mut acc = Series::constant(self.k, self.order, C::one());
        let mut power = acc.clone();
        for _ in 0..self.order {
            power = power.mul(&q).ok()?.neg();
            acc = acc.add(&power).ok()?;
        }
        Some(acc.rmul_coeff(&inv0))
    }
}

impl<C: Coeff> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(k={}, N={}) ", self.k, self.order)?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Substitute `inner` into `outer`: returns Σ_J outer_J · Π_l (inner_l − shift_l)^{J_l}.
///
/// `outer` has one variable per inner component; every inner series must have
/// `inner_l − shift_l` without constant term so the result is exact through the
/// common order.
pub fn substitute<C: Coeff>(outer: &Series<C>, inner: &[Series<C>], shift: &[C]) -> Result<Series<C>> {
    if outer.k != inner.len() || shift.len() != inner.len() {
        return Err(structural(format!(
            "substitution of {} series into a {}-variable series",
            inner.len(),
            outer.k
        )));
    }
    let Some(first) = inner.first() else {
        return Ok(outer.clone());
    };
    let (kin, order) = (first.k, first.order);
    for s in inner {
        if s.k != kin || s.order != order {
            return Err(structural("inner series disagree on shape"));
        }
    }
    if outer.order != order {
        return Err(structural(format!("outer order {} vs inner order {}", outer.order, order)));
    }
    let tin = IndexTable::get(kin, order);
    let tout = IndexTable::get(outer.k, order);
    let w: Vec<Vec<C>> = inner
        .iter()
        .zip(shift)
        .map(|(s, c)| {
            let mut d = s.to_dense(&tin);
            d[0] = d[0].sub(c);
            d
        })
        .collect();
    for wl in &w {
        if !wl[0].is_zero() {
            return Err(structural("substituted series has a constant term after shifting"));
        }
    }
    // Powers P(J) = P(J - e_l) * w_l, l = first nonzero slot of J.
    let mut powers: Vec<Option<Vec<C>>> = vec![None; tout.len()];
    let mut unit = vec![C::zero(); tin.len()];
    unit[0] = C::one();
    powers[0] = Some(unit);
    let needed = needed_indices(outer, &tout);
    let mut acc = vec![C::zero(); tin.len()];
    for (p, m) in tout.indices.iter().enumerate() {
        if !needed[p] {
            continue;
        }
        if p > 0 {
            let l = (0..outer.k).find(|&l| m.get(l) > 0).unwrap();
            let prev = tout.position(&m.lower(l).unwrap()).unwrap();
            let base = powers[prev].as_ref().expect("ancestor power computed");
            powers[p] = Some(tin.dense_mul(base, &w[l]));
        }
        if let Some(c) = outer.terms.get(m) {
            for (slot, x) in acc.iter_mut().zip(powers[p].as_ref().unwrap()) {
                if !x.is_zero() {
                    slot.add_assign(&c.mul(x));
                }
            }
        }
    }
    Ok(Series::from_dense(&tin, acc))
}

/// Indices whose power is needed: every index present in `outer` and its
/// chain of ancestors under "lower the first nonzero slot".
fn needed_indices<C: Coeff>(outer: &Series<C>, table: &IndexTable) -> Vec<bool> {
    let mut needed = vec![false; table.len()];
    for m in outer.terms.keys() {
        let mut cur = *m;
        loop {
            let p = table.position(&cur).unwrap();
            if needed[p] {
                break;
            }
            needed[p] = true;
            match (0..outer.k).find(|&l| cur.get(l) > 0) {
                Some(l) => cur = cur.lower(l).unwrap(),
                None => break,
            }
        }
    }
    needed
}
