//! Trigonometric polynomials: sums of `c · x^e · {1, cos, sin}(f·θ)` where the
//! monomial runs over real coordinates and the harmonic over periodic ones.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::calculus::chart::{Chart, Unwrapped};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Harmonic {
    One,
    Cos,
    Sin,
}

/// Monomial and harmonic part of a term; the coefficient lives outside.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    /// (coordinate, exponent), sorted, exponents positive
    pub mono: Vec<(u8, u32)>,
    pub kind: Harmonic,
    /// (coordinate, frequency), sorted, nonzero; first entry positive
    pub freq: Vec<(u8, i64)>,
}

impl TermKey {
    pub fn one() -> Self {
        TermKey { mono: Vec::new(), kind: Harmonic::One, freq: Vec::new() }
    }

    pub fn is_constant(&self) -> bool {
        self.mono.is_empty() && self.kind == Harmonic::One
    }

    pub fn mono_degree(&self) -> u32 {
        self.mono.iter().map(|(_, e)| e).sum()
    }

    /// Largest |frequency| entry.
    pub fn freq_norm(&self) -> i64 {
        self.freq.iter().map(|(_, f)| f.abs()).max().unwrap_or(0)
    }
}

/// Build a canonical (sign, key) for `kind(freq·θ)`; `None` if the term vanishes.
fn canonical_harmonic(kind: Harmonic, freq: Vec<(u8, i64)>) -> Option<(i64, Harmonic, Vec<(u8, i64)>)> {
    let freq: Vec<(u8, i64)> = freq.into_iter().filter(|(_, f)| *f != 0).collect();
    if freq.is_empty() {
        return match kind {
            Harmonic::Sin => None,
            _ => Some((1, Harmonic::One, freq)),
        };
    }
    if kind == Harmonic::One {
        return Some((1, Harmonic::One, Vec::new()));
    }
    if freq[0].1 < 0 {
        let flipped = freq.into_iter().map(|(i, f)| (i, -f)).collect();
        let sign = if kind == Harmonic::Sin { -1 } else { 1 };
        return Some((sign, kind, flipped));
    }
    Some((1, kind, freq))
}

fn merge_freq(a: &[(u8, i64)], b: &[(u8, i64)], sign: i64) -> Vec<(u8, i64)> {
    let mut m: BTreeMap<u8, i64> = a.iter().copied().collect();
    for &(i, f) in b {
        *m.entry(i).or_insert(0) += sign * f;
    }
    m.into_iter().filter(|(_, f)| *f != 0).collect()
}

fn merge_mono(a: &[(u8, u32)], b: &[(u8, u32)]) -> Vec<(u8, u32)> {
    let mut m: BTreeMap<u8, u32> = a.iter().copied().collect();
    for &(i, e) in b {
        *m.entry(i).or_insert(0) += e;
    }
    m.into_iter().collect()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ScalarField {
    terms: BTreeMap<TermKey, Rational>,
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut s = ScalarField::zero();
        s.push(TermKey::one(), c);
        s
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The real coordinate x_i.
    pub fn coord(i: u8) -> Self {
        Self::monomial(Rational::one(), &[(i, 1)])
    }

    pub fn monomial(c: Rational, mono: &[(u8, u32)]) -> Self {
        let mut s = ScalarField::zero();
        let mono = merge_mono(mono, &[]).into_iter().filter(|(_, e)| *e > 0).collect();
        s.push(TermKey { mono, kind: Harmonic::One, freq: Vec::new() }, c);
        s
    }

    pub fn cos(freq: &[(u8, i64)]) -> Self {
        Self::harmonic(Rational::one(), Harmonic::Cos, freq)
    }

    pub fn sin(freq: &[(u8, i64)]) -> Self {
        Self::harmonic(Rational::one(), Harmonic::Sin, freq)
    }

    pub fn harmonic(c: Rational, kind: Harmonic, freq: &[(u8, i64)]) -> Self {
        let mut s = ScalarField::zero();
        if let Some((sign, kind, freq)) = canonical_harmonic(kind, merge_freq(freq, &[], 1)) {
            s.push(TermKey { mono: Vec::new(), kind, freq }, c * int(sign));
        }
        s
    }

    fn push(&mut self, key: TermKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (TermKey, Rational)>) -> Self {
        let mut s = ScalarField::zero();
        for (k, c) in terms {
            s.push(k, c);
        }
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` if the field is the constant c.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                k.is_constant().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Coefficient of the constant term.
    pub fn constant_term(&self) -> Rational {
        self.terms.get(&TermKey::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ScalarField { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return ScalarField::zero();
        }
        ScalarField { terms: self.terms.iter().map(|(k, c)| (k.clone(), c * r)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<TermKey, Rational> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let c = ca * cb;
                for (sign2, key) in mul_keys(ka, kb) {
                    let e = acc.entry(key).or_insert_with(Rational::zero);
                    *e += &c * &sign2;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        ScalarField { terms: acc }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = ScalarField::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// ∂/∂x_i.
    pub fn partial(&self, i: u8) -> Self {
        let mut out = ScalarField::zero();
        for (k, c) in &self.terms {
            if let Some(pos) = k.mono.iter().position(|(j, _)| *j == i) {
                let e = k.mono[pos].1;
                let mut mono = k.mono.clone();
                if e == 1 {
                    mono.remove(pos);
                } else {
                    mono[pos].1 -= 1;
                }
                out.push(TermKey { mono, kind: k.kind, freq: k.freq.clone() }, c * int(e as i64));
            }
            if let Some(&(_, f)) = k.freq.iter().find(|(j, _)| *j == i) {
                let (kind, sign) = match k.kind {
                    Harmonic::Cos => (Harmonic::Sin, -f),
                    Harmonic::Sin => (Harmonic::Cos, f),
                    Harmonic::One => continue,
                };
                out.push(TermKey { mono: k.mono.clone(), kind, freq: k.freq.clone() }, c * int(sign));
            }
        }
        out
    }

    /// Antiderivative in coordinate `i`, which must be unwrapped (the result
    /// can contain a polynomial term in `i`).
    pub fn antiderivative(&self, i: u8, token: &Unwrapped) -> Result<Self> {
        if token.coord() != i as usize {
            return Err(Error::Domain("antiderivative token is for a different coordinate".into()));
        }
        let mut out = ScalarField::zero();
        for (k, c) in &self.terms {
            let e = k.mono.iter().find(|(j, _)| *j == i).map(|(_, e)| *e).unwrap_or(0);
            let f = k.freq.iter().find(|(j, _)| *j == i).map(|(_, f)| *f).unwrap_or(0);
            let rest: Vec<(u8, u32)> = k.mono.iter().filter(|(j, _)| *j != i).copied().collect();
            integrate_term(&mut out, c.clone(), e, &rest, k.kind, &k.freq, i, f);
        }
        Ok(out)
    }

    /// Coordinates the field depends on.
    pub fn support(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self
            .terms
            .keys()
            .flat_map(|k| k.mono.iter().map(|(i, _)| *i).chain(k.freq.iter().map(|(i, _)| *i)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let mut v = crate::rational::to_f64(c);
                for &(i, e) in &k.mono {
                    v *= x[i as usize].powi(e as i32);
                }
                let arg: f64 = k.freq.iter().map(|&(i, f)| f as f64 * x[i as usize]).sum();
                match k.kind {
                    Harmonic::One => v,
                    Harmonic::Cos => v * arg.cos(),
                    Harmonic::Sin => v * arg.sin(),
                }
            })
            .sum()
    }

    /// Check the field only uses monomials in real coordinates and harmonics
    /// in periodic ones of `chart`.
    pub fn validate(&self, chart: &Chart) -> Result<()> {
        for k in self.terms.keys() {
            for &(i, _) in &k.mono {
                if (i as usize) >= chart.dim() || !chart.allows_monomial(i as usize) {
                    return Err(Error::Domain(format!(
                        "monomial in coordinate {} which is not a real coordinate of the chart",
                        chart.label(i as usize)
                    )));
                }
            }
            for &(i, _) in &k.freq {
                if (i as usize) >= chart.dim() || !chart.allows_harmonic(i as usize) {
                    return Err(Error::Domain(format!(
                        "harmonic in coordinate {} which is not periodic",
                        chart.label(i as usize)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn display(&self, chart: &Chart) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || k.is_constant() {
                factors.push(fmt_rational(&mag));
            }
            for &(i, e) in &k.mono {
                let name = chart.label(i as usize);
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            if k.kind != Harmonic::One {
                let arg = fmt_freq(&k.freq, chart);
                let f = if k.kind == Harmonic::Cos { "cos" } else { "sin" };
                factors.push(format!("{f}({arg})"));
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

fn fmt_freq(freq: &[(u8, i64)], chart: &Chart) -> String {
    let mut s = String::new();
    for (n, &(i, f)) in freq.iter().enumerate() {
        let name = chart.label(i as usize);
        let mag = f.abs();
        if n == 0 {
            if f < 0 {
                s.push('-');
            }
        } else {
            s.push_str(if f < 0 { " - " } else { " + " });
        }
        if mag == 1 {
            s.push_str(&name);
        } else {
            s.push_str(&format!("{mag}*{name}"));
        }
    }
    s
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
        let chart = Chart::generic(labels);
        write!(f, "{}", self.display(&chart))
    }
}

/// Product of two term keys as a list of (coefficient, key) pairs.
fn mul_keys(a: &TermKey, b: &TermKey) -> Vec<(Rational, TermKey)> {
    use Harmonic::*;
    let mono = merge_mono(&a.mono, &b.mono);
    let half = Rational::new(1.into(), 2.into());
    let raw: Vec<(Rational, Harmonic, Vec<(u8, i64)>)> = match (a.kind, b.kind) {
        (One, k) => vec![(Rational::one(), k, b.freq.clone())],
        (k, One) => vec![(Rational::one(), k, a.freq.clone())],
        (Cos, Cos) => vec![
            (half.clone(), Cos, merge_freq(&a.freq, &b.freq, -1)),
            (half, Cos, merge_freq(&a.freq, &b.freq, 1)),
        ],
        (Sin, Sin) => vec![
            (half.clone(), Cos, merge_freq(&a.freq, &b.freq, -1)),
            (-half, Cos, merge_freq(&a.freq, &b.freq, 1)),
        ],
        (Sin, Cos) => vec![
            (half.clone(), Sin, merge_freq(&a.freq, &b.freq, 1)),
            (half, Sin, merge_freq(&a.freq, &b.freq, -1)),
        ],
        (Cos, Sin) => vec![
            (half.clone(), Sin, merge_freq(&a.freq, &b.freq, 1)),
            (-half, Sin, merge_freq(&a.freq, &b.freq, -1)),
        ],
    };
    raw.into_iter()
        .filter_map(|(c, kind, freq)| {
            canonical_harmonic(kind, freq)
                .map(|(sign, kind, freq)| (c * int(sign), TermKey { mono: mono.clone(), kind, freq }))
        })
        .collect()
}

/// Push ∫ c·x_i^e·rest·kind(freq·θ) dx_i, where `f` is the frequency of x_i.
#[allow(clippy::too_many_arguments)]
fn integrate_term(
    out: &mut ScalarField,
    c: Rational,
    e: u32,
    rest: &[(u8, u32)],
    kind: Harmonic,
    freq: &[(u8, i64)],
    i: u8,
    f: i64,
) {
    let with_power = |p: u32| {
        let mut m = rest.to_vec();
        if p > 0 {
            m.push((i, p));
            m.sort_unstable();
        }
        m
    };
    if f == 0 {
        let key = TermKey { mono: with_power(e + 1), kind, freq: freq.to_vec() };
        out.push(key, c / int(e as i64 + 1));
        return;
    }
    let fr = int(f);
    // ∫ x^e cos = x^e sin / f − (e/f) ∫ x^{e−1} sin ;  ∫ x^e sin = −x^e cos / f + (e/f) ∫ x^{e−1} cos
    let (other, sign) = match kind {
        Harmonic::Cos => (Harmonic::Sin, 1),
        Harmonic::Sin => (Harmonic::Cos, -1),
        Harmonic::One => unreachable!("a harmonic with nonzero frequency"),
    };
    let key = TermKey { mono: with_power(e), kind: other, freq: freq.to_vec() };
    out.push(key, &c * int(sign) / &fr);
    if e > 0 {
        let c2 = &c * int(-sign) * int(e as i64) / &fr;
        integrate_term(out, c2, e - 1, rest, other, freq, i, f);
    }
}
