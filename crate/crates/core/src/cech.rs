//! Čech cocycles of cords on S¹ over cyclic covers by arcs.
//!
//! Positions on the circle are measured in turns ρ = θ/2π. Arc α overlaps
//! only arcs α ± 1, so there are no triple overlaps and the class of a
//! cocycle is the conjugacy class of its full-loop product.

use num_bigint::BigInt;
use num_traits::FromPrimitive;
use rayon::prelude::*;

use crate::calculus::{Chart, CoordKind, RationalField, ScalarField};
use crate::cord::{gauge, invert_section, GaugeSection, JetForm, QuantumCord};
use crate::error::{Error, Result};
use crate::holonomy::{compose, invert, transport_path, HolonomyJet, TransportOptions};
use crate::jet::{arrow_compose, arrow_invert, GroupoidArrow};
use crate::rational::{fmt_rational, int, rat, to_f64, zero, Rational};

/// Arcs [s_α, e_α] (in turns) with s_0 < s_1 < … < s_{m−1} < s_0 + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    arcs: Vec<(Rational, Rational)>,
}

impl Cover {
    pub fn new(arcs: Vec<(Rational, Rational)>) -> Result<Self> {
        let m = arcs.len();
        if m < 3 {
            return Err(Error::Domain("cyclic covers need at least three arcs".into()));
        }
        for (s, e) in &arcs {
            if e <= s || e - s >= int(1) {
                return Err(Error::Domain(format!("arc [{}, {}] is empty or wraps", fmt_rational(s), fmt_rational(e))));
            }
        }
        let cover = Cover { arcs };
        for a in 0..m {
            let next_start = cover.start_after(a);
            if a + 1 < m && cover.arcs[a + 1].0 <= cover.arcs[a].0 || a + 1 == m && next_start <= cover.arcs[a].0 {
                return Err(Error::Domain("arc starts must increase around the circle".into()));
            }
            if cover.arcs[a].1 <= next_start {
                return Err(Error::Domain(format!("arcs {a} and {} do not overlap", (a + 1) % m)));
            }
            let (lo, hi) = cover.core(a);
            if lo >= hi {
                return Err(Error::Domain(format!("arc {a} lies inside its neighbours' union: triple overlap")));
            }
        }
        Ok(cover)
    }

    /// m arcs [α/m − δ, (α+1)/m + δ].
    pub fn uniform(m: usize, delta: Rational) -> Result<Self> {
        let mm = m as i64;
        Self::new((0..mm).map(|a| (rat(a, mm) - &delta, rat(a + 1, mm) + &delta)).collect())
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arcs(&self) -> &[(Rational, Rational)] {
        &self.arcs
    }

    fn next(&self, a: usize) -> usize {
        (a + 1) % self.len()
    }

    /// s_{α+1} in α's unwrapped coordinates.
    fn start_after(&self, a: usize) -> Rational {
        let b = self.next(a);
        if b == 0 {
            &self.arcs[0].0 + int(1)
        } else {
            self.arcs[b].0.clone()
        }
    }

    /// U_α ∩ U_{α+1} in α's coordinates.
    pub fn overlap(&self, a: usize) -> (Rational, Rational) {
        (self.start_after(a), self.arcs[a].1.clone())
    }

    /// Part of U_α met by no other arc.
    pub fn core(&self, a: usize) -> (Rational, Rational) {
        let m = self.len();
        let prev = (a + m - 1) % m;
        let prev_end = if a == 0 { &self.arcs[prev].1 - int(1) } else { self.arcs[prev].1.clone() };
        (prev_end, self.start_after(a))
    }

    pub fn anchor(&self, a: usize) -> Rational {
        let (lo, hi) = self.core(a);
        (lo + hi) / int(2)
    }

    /// Anchor of α+1 in α's coordinates.
    fn anchor_after(&self, a: usize) -> Rational {
        if self.next(a) == 0 {
            self.anchor(0) + int(1)
        } else {
            self.anchor(a + 1)
        }
    }
}

/// An impotent cord on the circle that can transport holonomy jets between
/// two positions (in turns, unwrapped).
pub trait CircleCord: Sync {
    fn order(&self) -> u32;
    fn transport(&self, from: f64, to: f64, opts: &TransportOptions) -> Result<HolonomyJet>;
}

/// A cord on the circle chart with coordinate θ.
pub struct SmoothCircleCord {
    form: JetForm,
    chart: Chart,
}

impl SmoothCircleCord {
    pub fn new(form: JetForm) -> Self {
        SmoothCircleCord { form, chart: Chart::circle() }
    }
}

impl CircleCord for SmoothCircleCord {
    fn order(&self) -> u32 {
        self.form.order()
    }

    fn transport(&self, from: f64, to: f64, opts: &TransportOptions) -> Result<HolonomyJet> {
        let tau = std::f64::consts::TAU;
        let path = |s: f64| (vec![tau * (from + s * (to - from))], vec![tau * (to - from)]);
        transport_path(&self.form, &self.chart, path, opts)
    }
}

/// Float cocycle: `forward[α]` = c_{α+1,α}, from anchor α to anchor α+1.
#[derive(Clone, Debug)]
pub struct Cocycle {
    cover: Cover,
    forward: Vec<HolonomyJet>,
}

impl Cocycle {
    pub fn new(cover: Cover, forward: Vec<HolonomyJet>) -> Result<Self> {
        if forward.len() != cover.len() {
            return Err(Error::Structural("one arrow per consecutive overlap".into()));
        }
        Ok(Cocycle { cover, forward })
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn forward(&self) -> &[HolonomyJet] {
        &self.forward
    }

    /// c_{α,α+1} = c_{α+1,α}⁻¹.
    pub fn backward(&self, a: usize) -> Result<HolonomyJet> {
        invert(&self.forward[a])
    }

    /// c_{0,m−1} ∘ … ∘ c_{1,0}: once around from anchor 0.
    pub fn full_loop(&self) -> Result<HolonomyJet> {
        let mut acc = HolonomyJet::identity(self.forward[0].order());
        for f in &self.forward {
            acc = compose(&acc, f)?;
        }
        Ok(acc)
    }

    /// c′_{αβ} = d_α ∘ c_{αβ} ∘ d_β⁻¹.
    pub fn coboundary(&self, d: &[HolonomyJet]) -> Result<Cocycle> {
        if d.len() != self.cover.len() {
            return Err(Error::Structural("one coboundary arrow per arc".into()));
        }
        let forward = (0..self.cover.len())
            .map(|a| {
                let b = self.cover.next(a);
                compose(&compose(&invert(&d[a])?, &self.forward[a])?, &d[b])
            })
            .collect::<Result<_>>()?;
        Ok(Cocycle { cover: self.cover.clone(), forward })
    }

    /// Largest relative coefficient gap between two cocycles on one cover.
    pub fn residual(&self, other: &Cocycle) -> f64 {
        self.forward.iter().zip(&other.forward).map(|(a, b)| a.residual(b)).fold(0.0, f64::max)
    }

    /// Dyadic rational approximations (40 fractional bits) of the arrows.
    pub fn to_exact(&self) -> Result<ExactCocycle> {
        let forward = self
            .forward
            .iter()
            .map(|j| {
                let coeffs = j.coeffs().iter().map(|c| dyadic(*c)).collect::<Result<Vec<_>>>()?;
                GroupoidArrow::univariate(zero(), j.order(), coeffs)
            })
            .collect::<Result<_>>()?;
        ExactCocycle::new(self.cover.clone(), forward)
    }
}

fn dyadic(x: f64) -> Result<Rational> {
    let scale = 2f64.powi(40);
    let n = BigInt::from_f64((x * scale).round()).ok_or_else(|| Error::Domain(format!("{x} is not finite")))?;
    Ok(Rational::new(n, BigInt::from(1u64 << 40)))
}

/// Y_α(x) = transport from x to the anchor of α, so c_{βα} is transport from
/// anchor α to anchor β through a point of the overlap. Each overlap is
/// sampled at three points and the arrows must agree within `tol`.
pub fn extract_cocycle(cord: &dyn CircleCord, cover: &Cover, opts: &TransportOptions, tol: f64) -> Result<Cocycle> {
    let forward = (0..cover.len())
        .into_par_iter()
        .map(|a| {
            let (lo, hi) = cover.overlap(a);
            let (lo, hi) = (to_f64(&lo), to_f64(&hi));
            let from = to_f64(&cover.anchor(a));
            let to = to_f64(&cover.anchor_after(a));
            let arrows = [0.25, 0.5, 0.75]
                .iter()
                .map(|f| {
                    let x = lo + f * (hi - lo);
                    compose(&cord.transport(from, x, opts)?, &cord.transport(x, to, opts)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let dev = arrows.iter().map(|j| j.residual(&arrows[1])).fold(0.0, f64::max);
            if dev > tol {
                return Err(Error::Tolerance { what: format!("constancy of c on overlap {a}"), achieved: dev, wanted: tol });
            }
            Ok(arrows[1].clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Cocycle::new(cover.clone(), forward)
}

/// Exact cocycle of arrows fixing 0: `forward[α]` = c_{α+1,α}.
#[derive(Clone, Debug)]
pub struct ExactCocycle {
    cover: Cover,
    forward: Vec<GroupoidArrow>,
}

fn check_fixes_zero(g: &GroupoidArrow) -> Result<()> {
    if g.k() != 1 || g.source()[0] != zero() || g.target()[0] != zero() {
        return Err(Error::Domain("cocycle arrows must be codimension one and fix 0".into()));
    }
    Ok(())
}

impl ExactCocycle {
    pub fn new(cover: Cover, forward: Vec<GroupoidArrow>) -> Result<Self> {
        if forward.len() != cover.len() {
            return Err(Error::Structural("one arrow per consecutive overlap".into()));
        }
        for g in &forward {
            check_fixes_zero(g)?;
        }
        if forward.iter().any(|g| g.order() != forward[0].order()) {
            return Err(Error::Structural("cocycle arrows disagree on order".into()));
        }
        Ok(ExactCocycle { cover, forward })
    }

    /// From arrows c_{αβ} on ordered pairs. Every consecutive pair needs at
    /// least one direction; pairs given both ways must be mutually inverse,
    /// c_{αα} must be the identity, and non-overlapping pairs are rejected.
    pub fn from_pairs(cover: Cover, pairs: Vec<((usize, usize), GroupoidArrow)>) -> Result<Self> {
        let m = cover.len();
        let mut forward: Vec<Option<GroupoidArrow>> = vec![None; m];
        let mut backward: Vec<Option<GroupoidArrow>> = vec![None; m];
        for ((a, b), g) in pairs {
            check_fixes_zero(&g)?;
            if a >= m || b >= m {
                return Err(Error::Structural(format!("pair ({a}, {b}) out of range")));
            }
            if a == b {
                if !g.is_identity() {
                    return Err(Error::Domain(format!("c_{{{a}{a}}} is not the identity")));
                }
            } else if a == (b + 1) % m {
                forward[b] = Some(g);
            } else if b == (a + 1) % m {
                backward[a] = Some(g);
            } else {
                return Err(Error::Domain(format!("arcs {a} and {b} do not overlap")));
            }
        }
        let forward = (0..m)
            .map(|a| match (forward[a].take(), backward[a].take()) {
                (Some(f), Some(g)) => {
                    if !arrow_compose(&f, &g)?.is_identity() {
                        return Err(Error::Domain(format!("c_{{{a},{}}} is not the inverse of c_{{{},{a}}}", (a + 1) % m, (a + 1) % m)));
                    }
                    Ok(f)
                }
                (Some(f), None) => Ok(f),
                (None, Some(g)) => arrow_invert(&g),
                (None, None) => Err(Error::Domain(format!("no arrow on overlap {a}"))),
            })
            .collect::<Result<_>>()?;
        Self::new(cover, forward)
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn forward(&self) -> &[GroupoidArrow] {
        &self.forward
    }

    pub fn to_float(&self) -> Cocycle {
        let forward = self
            .forward
            .iter()
            .map(|g| {
                let coeffs = (0..=g.order()).map(|m| to_f64(&g.components()[0].coeff1(m))).collect::<Vec<_>>();
                HolonomyJet::new(coeffs, vec![0.0; g.order() as usize + 1]).expect("arrow fixes 0 with positive slope")
            })
            .collect();
        Cocycle { cover: self.cover.clone(), forward }
    }
}

/// One overlap [start, end] of a reconstructed cord: a jet form in the
/// local coordinate u = (ρ − start)/(end − start) ∈ [0, 1].
#[derive(Clone, Debug)]
pub struct Piece {
    pub start: Rational,
    pub end: Rational,
    pub cord: QuantumCord,
}

/// Cord glued from overlap pieces; it vanishes on the cores of the arcs.
#[derive(Clone, Debug)]
pub struct PiecewiseCord {
    pieces: Vec<Piece>,
    order: u32,
    chart: Chart,
}

impl PiecewiseCord {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    fn forward(&self, from: f64, to: f64, opts: &TransportOptions) -> Result<HolonomyJet> {
        let mut segments: Vec<(f64, f64, f64, &Piece)> = Vec::new();
        for shift in (from.floor() as i64 - 1)..=(to.ceil() as i64 + 1) {
            for p in &self.pieces {
                let (s, e) = (to_f64(&p.start) + shift as f64, to_f64(&p.end) + shift as f64);
                let (lo, hi) = (s.max(from), e.min(to));
                if lo < hi {
                    segments.push((lo, hi, shift as f64, p));
                }
            }
        }
        segments.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = HolonomyJet::identity(self.order);
        for (lo, hi, shift, p) in segments {
            let (start, width) = (to_f64(&p.start), to_f64(&(&p.end - &p.start)));
            let path = |s: f64| (vec![(lo + s * (hi - lo) - shift - start) / width], vec![(hi - lo) / width]);
            acc = compose(&acc, &transport_path(p.cord.form(), &self.chart, path, opts)?)?;
        }
        Ok(acc)
    }
}

impl CircleCord for PiecewiseCord {
    fn order(&self) -> u32 {
        self.order
    }

    fn transport(&self, from: f64, to: f64, opts: &TransportOptions) -> Result<HolonomyJet> {
        if from <= to {
            self.forward(from, to, opts)
        } else {
            invert(&self.forward(to, from, opts)?)
        }
    }
}

fn arrow_fields(g: &GroupoidArrow) -> Vec<RationalField> {
    (0..=g.order()).map(|m| RationalField::constant(g.components()[0].coeff1(m))).collect()
}

/// (1 − h)·p + h·q coefficientwise, for arrows p, q fixing 0.
fn blend(h: &RationalField, p: &[RationalField], q: &[RationalField]) -> Vec<RationalField> {
    let one_minus = RationalField::one().sub(h);
    p.iter().zip(q).map(|(a, b)| one_minus.mul(a).add(&h.mul(b))).collect()
}

/// On U_α ∩ U_β (β = α+1) with λ_β = h and λ_α = 1 − h:
/// Y_α⁻¹ = (1−h)·t + h·c_{βα}(t) and Y_β⁻¹ = (1−h)·c_{αβ}(t) + h·t.
/// A = Y_α⋆0 = Y_β⋆0 exactly; on the cores Y_α = id and A = 0.
pub fn reconstruct_cord(c: &ExactCocycle) -> Result<PiecewiseCord> {
    let chart = Chart::new(vec![("u".to_string(), CoordKind::Real)])?;
    let order = c.forward[0].order();
    let cover = &c.cover;
    let pieces = (0..cover.len())
        .map(|a| {
            let (lo, hi) = cover.overlap(a);
            let u = ScalarField::coord(0);
            // h(u) = 3u² − 2u³
            let h = RationalField::from(u.pow(2).scale(&int(3)).sub(&u.pow(3).scale(&int(2))));
            let id = arrow_fields(&GroupoidArrow::identity(vec![zero()], order));
            let fwd = arrow_fields(&c.forward[a]);
            let bwd = arrow_fields(&arrow_invert(&c.forward[a])?);
            let y_a = invert_section(&GaugeSection::univariate(order, blend(&h, &id, &fwd))?)?;
            let y_b = invert_section(&GaugeSection::univariate(order, blend(&h, &bwd, &id))?)?;
            let trivial = JetForm::zero(1, 1, order);
            let from_a = gauge(&y_a, &trivial)?;
            let from_b = gauge(&y_b, &trivial)?;
            if from_a != from_b {
                return Err(Error::Domain(format!("trivializations disagree on overlap {a}")));
            }
            Ok(Piece { start: lo, end: hi, cord: QuantumCord::certify(from_a)? })
        })
        .collect::<Result<_>>()?;
    Ok(PiecewiseCord { pieces, order: order - 1, chart })
}

/// Conjugacy normal form of a jet fixing 0.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassKind {
    Identity,
    /// linearizable: t ↦ λt
    Hyperbolic { lambda: f64 },
    /// t ↦ t ± t^k + residue·t^{2k−1}; residue is None when 2k−1 exceeds the order
    Parabolic { k: u32, sign: i8, residue: Option<f64> },
}

#[derive(Clone, Debug)]
pub struct HaefligerClass {
    pub kind: ClassKind,
    pub normal_form: HolonomyJet,
    /// h with h ∘ P ∘ h⁻¹ = normal form
    pub conjugator: HolonomyJet,
}

fn conjugate(h: &HolonomyJet, p: &HolonomyJet) -> Result<HolonomyJet> {
    compose(&compose(&invert(h)?, p)?, h)
}

/// c₁t + c_j t^j
fn monomial_jet(order: u32, c1: f64, j: u32, cj: f64) -> Result<HolonomyJet> {
    let mut coeffs = vec![0.0; order as usize + 1];
    coeffs[1] = c1;
    if (2..=order).contains(&j) {
        coeffs[j as usize] += cj;
    }
    HolonomyJet::new(coeffs, vec![0.0; order as usize + 1])
}

/// Normal form of P by successive conjugations; coefficients below `tol`
/// count as zero.
pub fn classify(p: &HolonomyJet, tol: f64) -> Result<HaefligerClass> {
    let n = p.order();
    let mut h = HolonomyJet::identity(n);
    let lambda = p.linear();
    if (lambda - 1.0).abs() > tol {
        for m in 2..=n {
            let q = conjugate(&h, p)?;
            let g = monomial_jet(n, 1.0, m, -q.coeff(m) / (lambda.powi(m as i32) - lambda))?;
            h = compose(&h, &g)?;
        }
        let normal_form = conjugate(&h, p)?;
        return Ok(HaefligerClass { kind: ClassKind::Hyperbolic { lambda }, normal_form, conjugator: h });
    }
    let q = conjugate(&h, p)?;
    let Some(k) = (2..=n).find(|&m| q.coeff(m).abs() > tol) else {
        return Ok(HaefligerClass { kind: ClassKind::Identity, normal_form: q, conjugator: h });
    };
    let a = q.coeff(k);
    let sign: i8 = if a > 0.0 { 1 } else { -1 };
    // t ↦ ct scales the t^k coefficient by c^{1−k}
    let c = a.abs().powf(1.0 / (k as f64 - 1.0));
    h = compose(&h, &monomial_jet(n, c, 1, 0.0)?)?;
    let mut residue = None;
    for m in k + 1..=n {
        let q = conjugate(&h, p)?;
        if m == 2 * k - 1 {
            residue = Some(q.coeff(m));
            continue;
        }
        // t + εt^j changes the t^{k+j−1} coefficient by ε(j − k)·(±1)
        let j = m - k + 1;
        let eps = -q.coeff(m) / ((j as f64 - k as f64) * sign as f64);
        h = compose(&h, &monomial_jet(n, 1.0, j, eps)?)?;
    }
    let normal_form = conjugate(&h, p)?;
    Ok(HaefligerClass { kind: ClassKind::Parabolic { k, sign, residue }, normal_form, conjugator: h })
}

pub fn same_class(a: &HaefligerClass, b: &HaefligerClass, tol: f64) -> bool {
    match (&a.kind, &b.kind) {
        (ClassKind::Identity, ClassKind::Identity) => true,
        (ClassKind::Hyperbolic { lambda: x }, ClassKind::Hyperbolic { lambda: y }) => (x - y).abs() <= tol * x.abs().max(1.0),
        (ClassKind::Parabolic { k: k1, sign: s1, residue: r1 }, ClassKind::Parabolic { k: k2, sign: s2, residue: r2 }) => {
            k1 == k2
                && s1 == s2
                && match (r1, r2) {
                    (Some(x), Some(y)) => (x - y).abs() <= tol * x.abs().max(1.0),
                    (None, None) => true,
                    _ => false,
                }
        }
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub struct RoundtripReport {
    pub product: HolonomyJet,
    pub monodromy: HolonomyJet,
    pub extracted_product: HolonomyJet,
    pub linear_rel_err: f64,
    pub quadratic_rel_err: f64,
    pub input_class: HaefligerClass,
    pub extracted_class: HaefligerClass,
    pub same_class: bool,
}

/// Reconstruct a cord from `c`, compute its monodromy from anchor 0,
/// extract a cocycle from it, and compare with the input.
pub fn roundtrip_class(c: &ExactCocycle, opts: &TransportOptions, tol: f64) -> Result<RoundtripReport> {
    let cord = reconstruct_cord(c)?;
    let order = cord.order();
    let cut = |j: &HolonomyJet| -> Result<HolonomyJet> {
        HolonomyJet::new(j.coeffs()[..=order as usize].to_vec(), j.errors()[..=order as usize].to_vec())
    };
    let product = cut(&c.to_float().full_loop()?)?;
    let base = to_f64(&c.cover.anchor(0));
    let monodromy = cord.transport(base, base + 1.0, opts)?;
    let extracted = extract_cocycle(&cord, &c.cover, opts, tol)?;
    let extracted_product = extracted.full_loop()?;
    let rel = |m: u32| (product.coeff(m) - monodromy.coeff(m)).abs() / product.coeff(m).abs().max(1.0);
    let input_class = classify(&product, tol)?;
    let extracted_class = classify(&extracted_product, tol)?;
    let same = same_class(&input_class, &extracted_class, tol);
    Ok(RoundtripReport {
        linear_rel_err: rel(1),
        quadratic_rel_err: if order >= 2 { rel(2) } else { 0.0 },
        product,
        monodromy,
        extracted_product,
        input_class,
        extracted_class,
        same_class: same,
    })
}
