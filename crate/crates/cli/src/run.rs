use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qcord_core::calculus::Loop;
use qcord_core::cech::{extract_cocycle, ClassKind, roundtrip_class, SmoothCircleCord};
use qcord_core::cohomology::{bott_diagnostics, chain_map_defect, gv_integral, h0_dimension, nabla};
use qcord_core::cord::{
    compose_sections, concord_from_gauge, curvature, curvature_by_recursion, gauge, is_impotent, local_trivialization,
    transport_form, GaugeSection, JetForm, QuantumCord, RecursionFactor,
};
use qcord_core::holonomy::{compose, first_order_check, monodromy_word, transport, HolonomyJet, TransportOptions, Word};
use qcord_core::sample;
use rayon::prelude::*;

use crate::model::{Item, Scenario, Task, MAX_CUTOFF, MAX_ORDER};
use crate::report::{Report, Status, TaskReport, Value};
use crate::syntax::{parse_expr, Diagnostic, Span};

pub const TASK_KINDS: [&str; 6] = ["verify", "holonomy", "gv", "cohomology", "cech", "concord"];

/// Cursor over the words of a task line.
struct Args<'a> {
    words: &'a [(String, Span)],
    pos: usize,
    end: Span,
}

impl<'a> Args<'a> {
    fn new(task: &'a Task) -> Self {
        let end = task.args.last().map(|(_, s)| *s).unwrap_or(task.span);
        Args { words: &task.args, pos: 0, end }
    }

    fn name(&mut self, what: &str) -> Result<(&'a str, Span), Diagnostic> {
        match self.words.get(self.pos) {
            Some((w, s)) if w.chars().next().is_some_and(|c| c.is_alphabetic()) => {
                self.pos += 1;
                Ok((w.as_str(), *s))
            }
            Some((_, s)) => Err(Diagnostic::new(*s, format!("expected {what}"))),
            None => Err(Diagnostic::new(self.end, format!("missing {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.words.get(self.pos).is_some_and(|(w, _)| w == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.pos).map(|(w, _)| w.as_str())
    }

    fn rest(&mut self) -> &'a [(String, Span)] {
        let r = &self.words[self.pos..];
        self.pos = self.words.len();
        r
    }

    fn done(&self) -> Result<(), Diagnostic> {
        match self.words.get(self.pos) {
            Some((w, s)) => Err(Diagnostic::new(*s, format!("unexpected argument '{w}'"))),
            None => Ok(()),
        }
    }
}

fn options(s: &Scenario) -> TransportOptions {
    TransportOptions { step: s.settings.step, tol: s.settings.tol }
}

fn certify(s: &Scenario, rep: &mut TaskReport, a: &JetForm) -> Option<QuantumCord> {
    match QuantumCord::certify(a.clone()) {
        Ok(q) => {
            rep.value("flat_through", Value::Int(q.flat_through() as i64));
            Some(q)
        }
        Err(e) => {
            let first = curvature(a).ok().and_then(|f| {
                f.first_nonzero().map(|(_, m, w)| format!("order {}: {}", m.degree(), w.display(&s.chart)))
            });
            match first {
                Some(c) => {
                    rep.value("first_nonzero_curvature", Value::Text(c.clone()));
                    rep.fail(format!("not flat: curvature at {c}"));
                }
                None => rep.fail(e.to_string()),
            }
            None
        }
    }
}

fn jet_floats(j: &HolonomyJet) -> Value {
    Value::List(j.coeffs().iter().zip(j.errors()).map(|(c, e)| Value::float(*c, *e)).collect())
}

fn verify(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    let (name, span) = args.name("a cord")?;
    let a = s.cord(name, span)?;
    let mut y: Option<GaugeSection> = None;
    let mut triv: Option<(usize, Span, &[(String, Span)])> = None;
    while let Some(w) = args.peek() {
        if args.keyword("gauge") {
            let (g, gs) = args.name("a gauge")?;
            y = Some(s.gauge(g, gs)?);
        } else if args.keyword("trivialize") {
            let (c, cs) = args.name("a coordinate")?;
            let i = s.chart.index_of(c).ok_or_else(|| Diagnostic::new(cs, format!("unknown coordinate '{c}'")))?;
            if !args.keyword("from") {
                return Err(Diagnostic::new(cs, "expected 'from' and the initial section"));
            }
            triv = Some((i, cs, args.rest()));
        } else {
            return Err(Diagnostic::new(args.words[args.pos].1, format!("unexpected argument '{w}'")));
        }
    }
    args.done()?;
    rep.value("order", Value::Int(a.order() as i64));
    rep.value("impotent", Value::Bool(is_impotent(&a)));
    let cord = certify(s, rep, &a);

    if let Some(y) = &y {
        match gauge(y, &a) {
            Ok(b) => {
                let n = a.order() - 1;
                let fb = curvature(&b).map_err(|e| Diagnostic::new(span, e.to_string()))?;
                let fa = curvature(&a).map_err(|e| Diagnostic::new(span, e.to_string()))?;
                let moved = transport_form(&y.truncate(n), &fa).map_err(|e| Diagnostic::new(span, e.to_string()))?;
                let (l, r) = fb.common_order(&moved);
                let covariant = l == r;
                rep.value("gauge_covariance", Value::Bool(covariant));
                rep.check(covariant, || "F_(Y*A) differs from (F_A o Y)(Y')^-1".into());
                rep.value("gauged_flat", Value::Bool(fb.is_zero()));
                if cord.is_some() {
                    rep.check(fb.is_zero(), || "Y*A is not flat".into());
                }
                if y.target() == y.source() {
                    let twice = gauge(&y.truncate(n), &b).and_then(|bb| Ok((bb, gauge(&compose_sections(y, y)?, &a)?)));
                    match twice {
                        Ok((lhs, rhs)) => {
                            let ok = lhs.agrees_with(&rhs);
                            rep.value("group_law", Value::Bool(ok));
                            rep.check(ok, || "Y*(Y*A) differs from (Y o Y)*A".into());
                        }
                        Err(e) => rep.fail(e.to_string()),
                    }
                }
            }
            Err(e) => rep.fail(format!("gauge action: {e}")),
        }
    }

    if let Some((i, cs, expr_words)) = triv {
        let text: Vec<&str> = expr_words.iter().map(|(w, _)| w.as_str()).collect();
        let expr = parse_expr(&text.join(" ")).map_err(|d| Diagnostic::new(expr_words.first().map(|w| w.1).unwrap_or(cs), d.message))?;
        let y0 = s.eval(&expr)?;
        let y0 = match (y0.iter().skip(1).all(|w| w.is_zero()), y0[0].as_function()) {
            (true, Some(f)) => f,
            _ => return Err(Diagnostic::new(cs, "the initial section must be a function")),
        };
        if let Some(q) = &cord {
            match local_trivialization(q, i, y0) {
                Ok(y) => {
                    let shown: Vec<Value> =
                        (0..=y.order()).map(|m| Value::Text(y.coeff1(m).display(&s.chart))).collect();
                    rep.value("trivialization", Value::List(shown));
                    rep.value("trivialization_checked", Value::Bool(true));
                    rep.flag("the formal recursion Y*0 = A is checked to the scenario order; convergence of the germ is out of scope");
                }
                Err(e) => rep.fail(format!("trivialization: {e}")),
            }
        }
    }
    Ok(())
}

fn parse_word(words: &[(String, Span)], loops: &[&str]) -> Result<Word, Diagnostic> {
    let mut letters = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let (w, sp) = &words[i];
        let idx = loops.iter().position(|l| l == w).ok_or_else(|| Diagnostic::new(*sp, format!("'{w}' is not one of the task's loops")))?;
        i += 1;
        let mut exp = 1i8;
        if words.get(i).is_some_and(|(x, _)| x == "^") {
            match (words.get(i + 1).map(|x| x.0.as_str()), words.get(i + 2).map(|x| x.0.as_str())) {
                (Some("-"), Some("1")) => {
                    exp = -1;
                    i += 3;
                }
                (Some("1"), _) => i += 2,
                _ => return Err(Diagnostic::new(words[i].1, "loop exponents are 1 or -1")),
            }
        }
        letters.push((idx, exp));
    }
    if letters.is_empty() {
        return Err(Diagnostic::new(words.first().map(|w| w.1).unwrap_or(Span { line: 0, col: 0 }), "empty word"));
    }
    Ok(Word(letters))
}

fn holonomy(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    let (name, span) = args.name("a cord")?;
    let a = s.cord(name, span)?;
    if !args.keyword("loops") {
        return Err(Diagnostic::new(args.end, "expected 'loops' and loop names"));
    }
    let mut names = Vec::new();
    let mut loops: Vec<Loop> = Vec::new();
    while let Some(w) = args.peek() {
        if w == "word" {
            break;
        }
        let (l, ls) = args.name("a loop")?;
        loops.push(s.loop_(l, ls)?);
        names.push(l);
    }
    if loops.is_empty() {
        return Err(Diagnostic::new(args.end, "no loops given"));
    }
    let word = if args.keyword("word") { Some(parse_word(args.rest(), &names)?) } else { None };
    args.done()?;
    if !is_impotent(&a) {
        rep.abort("holonomy is defined for impotent cords (source 0, zero constant term)");
        return Ok(());
    }
    certify(s, rep, &a);
    let opts = options(s);
    let tol = s.settings.tol;
    let mut singles = Vec::new();
    for (l, g) in names.iter().zip(&loops) {
        match transport(&a, &s.chart, g, &opts) {
            Ok(j) => {
                rep.value(&format!("{l}.jet"), jet_floats(&j));
                singles.push(Some(j));
            }
            Err(e) => {
                rep.fail(format!("{l}: {e}"));
                singles.push(None);
            }
        }
        match first_order_check(&a, &s.chart, g, &opts) {
            Ok(r) => {
                rep.value(&format!("{l}.first_order_rel_err"), Value::float(r.rel_err, 0.0));
                rep.check(r.rel_err <= tol, || format!("{l}: first-order check off by {:.3e}", r.rel_err));
            }
            Err(e) => rep.flag(format!("{l}: first-order check unavailable: {e}")),
        }
    }
    if let Some(w) = word {
        match monodromy_word(&a, &s.chart, &loops, &w, &opts) {
            Ok(whole) => {
                rep.value("word.jet", jet_floats(&whole));
                let mut prod = Some(HolonomyJet::identity(whole.order()));
                for (i, e) in &w.0 {
                    let letter = match (&singles[*i], e) {
                        (Some(j), 1) => Some(j.clone()),
                        (Some(_), _) => monodromy_word(&a, &s.chart, &loops, &Word(vec![(*i, -1)]), &opts).ok(),
                        _ => None,
                    };
                    prod = match (prod, letter) {
                        (Some(p), Some(l)) => compose(&p, &l).ok(),
                        _ => None,
                    };
                }
                match prod {
                    Some(p) => {
                        let r = whole.residual(&p);
                        rep.value("word.homomorphism_residual", Value::float(r, 0.0));
                        rep.check(r <= tol, || format!("word differs from the product of its letters by {r:.3e}"));
                    }
                    None => rep.fail("could not transport every letter of the word"),
                }
            }
            Err(e) => rep.fail(format!("word: {e}")),
        }
    }
    Ok(())
}

fn gv(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    let (name, span) = args.name("a cord")?;
    args.done()?;
    let a = s.cord(name, span)?;
    let mut checked = false;
    if let Item::GvCord { a0, .. } = s.item(name, span)? {
        checked = true;
        rep.value("a0", Value::Text(a0.display(&s.chart)));
        rep.value("a1", Value::Text(a.coeff1(1).display(&s.chart)));
        let nonzero = (2..=a.order()).filter(|&m| !a.coeff1(m).is_zero()).count();
        rep.value("nonzero_higher_coefficients", Value::Int(nonzero as i64));
        certify(s, rep, &a);
        match (curvature_by_recursion(&a, RecursionFactor::Derived), curvature_by_recursion(&a, RecursionFactor::AsPrinted)) {
            (Ok(derived), Ok(printed)) => {
                rep.value("recursion_half_weight_zero", Value::Bool(derived.is_zero()));
                rep.check(derived.is_zero(), || "coefficient recursion with weight 1/2 is nonzero".into());
                let residual = printed
                    .first_nonzero()
                    .map(|(_, m, w)| format!("order {}: {}", m.degree(), w.display(&s.chart)))
                    .unwrap_or_else(|| "0".into());
                rep.value("recursion_unit_weight_residual", Value::Text(residual));
            }
            (Err(e), _) | (_, Err(e)) => rep.fail(e.to_string()),
        }
    }
    if s.chart.dim() == 3 && s.chart.fully_periodic() {
        checked = true;
        match gv_integral(&a, &s.chart) {
            Ok(v) => {
                rep.value("gv_integral_float", Value::float(v.to_f64(), 0.0));
                rep.value("gv_integral", Value::TwoPi(v));
            }
            Err(e) => rep.fail(e.to_string()),
        }
    }
    if !checked {
        rep.abort("nothing to check: the cord is not built by gv(...) and the chart is not a 3-torus");
    }
    Ok(())
}

fn cohomology(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    if args.keyword("bott") {
        let (f, fs) = args.name("a form")?;
        let (v, vs) = args.name("a vector field")?;
        let expect = if args.keyword("expect") {
            let (w, ws) = args.words.get(args.pos).ok_or_else(|| Diagnostic::new(args.end, "missing expected dimension"))?;
            args.pos += 1;
            Some(w.parse::<usize>().map_err(|_| Diagnostic::new(*ws, "expected a dimension"))?)
        } else {
            None
        };
        args.done()?;
        let (a, v) = (s.form(f, fs)?, s.vector(v, vs)?);
        if s.settings.cutoff > MAX_CUTOFF {
            rep.abort(format!("resource limit: cutoff {} exceeds {MAX_CUTOFF}", s.settings.cutoff));
            return Ok(());
        }
        rep.value("cutoff", Value::Int(s.settings.cutoff as i64));
        match h0_dimension(&a, &v, &s.chart, s.settings.cutoff) {
            Ok(h0) => {
                rep.value("h0", Value::Int(h0 as i64));
                if let Some(e) = expect {
                    rep.check(h0 == e, || format!("H0 has dimension {h0}, expected {e}"));
                }
            }
            Err(e) => rep.fail(e.to_string()),
        }
        if let Ok(diag) = bott_diagnostics(&a, &v, &s.chart, s.settings.cutoff) {
            let kernels = diag.iter().map(|d| Value::Int(d.kernel as i64)).collect();
            rep.value("kernel_by_degree", Value::List(kernels));
        }
        return Ok(());
    }
    let (name, span) = args.name("a cord or 'bott'")?;
    let a = s.cord(name, span)?;
    let y = if args.keyword("gauge") {
        let (g, gs) = args.name("a gauge")?;
        Some(s.gauge(g, gs)?)
    } else {
        None
    };
    args.done()?;
    if certify(s, rep, &a).is_none() {
        return Ok(());
    }
    let mut rng = sample::rng(s.settings.seed);
    let samples = 3;
    let mut nabla_ok = true;
    let mut chain_ok = true;
    for p in 0..=1u32.min(s.chart.dim() as u32) {
        for _ in 0..samples {
            let w = sample::jet_form(&mut rng, &s.chart, a.source().to_vec(), p, a.order());
            match nabla(&a, &w).and_then(|dw| nabla(&a, &dw)) {
                Ok(z) => nabla_ok &= z.is_zero(),
                Err(e) => {
                    rep.fail(e.to_string());
                    nabla_ok = false;
                }
            }
            if let Some(y) = &y {
                match chain_map_defect(y, &a, &w) {
                    Ok(d) => chain_ok &= d.is_zero(),
                    Err(e) => {
                        rep.fail(e.to_string());
                        chain_ok = false;
                    }
                }
            }
        }
    }
    rep.value("random_samples", Value::Int(2 * samples));
    rep.value("nabla_squared_zero", Value::Bool(nabla_ok));
    rep.check(nabla_ok, || "nabla_A^2 W is nonzero for a sampled W".into());
    if y.is_some() {
        rep.value("chain_map", Value::Bool(chain_ok));
        rep.check(chain_ok, || "nabla_B Phi W differs from Phi nabla_A W".into());
    }
    Ok(())
}

fn cech(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    let (name, span) = args.name("a cord")?;
    let a = s.cord(name, span)?;
    if !args.keyword("cover") {
        return Err(Diagnostic::new(args.end, "expected 'cover' and a cover name"));
    }
    let (c, cs) = args.name("a cover")?;
    let cover = s.cover(c, cs)?;
    args.done()?;
    if s.chart.dim() != 1 || !s.chart.fully_periodic() {
        rep.abort("Cech classes are computed on the circle only");
        return Ok(());
    }
    if !is_impotent(&a) {
        rep.abort("the cocycle of a cord is taken for impotent cords");
        return Ok(());
    }
    let opts = options(s);
    let tol = s.settings.tol;
    let result = extract_cocycle(&SmoothCircleCord::new(a), &cover, &opts, tol)
        .and_then(|c| c.to_exact())
        .and_then(|c| roundtrip_class(&c, &opts, tol));
    match result {
        Ok(r) => {
            rep.value("arcs", Value::Int(cover.len() as i64));
            rep.value("cocycle_loop", jet_floats(&r.product));
            rep.value("reconstructed_monodromy", jet_floats(&r.monodromy));
            rep.value("linear_rel_err", Value::float(r.linear_rel_err, 0.0));
            rep.value("quadratic_rel_err", Value::float(r.quadratic_rel_err, 0.0));
            match &r.input_class.kind {
                ClassKind::Identity => rep.value("class", Value::Text("identity".into())),
                ClassKind::Hyperbolic { lambda } => {
                    rep.value("class", Value::Text("hyperbolic".into()));
                    rep.value("multiplier", Value::float(*lambda, 0.0));
                }
                ClassKind::Parabolic { k, sign, residue } => {
                    rep.value("class", Value::Text("parabolic".into()));
                    rep.value("tangency", Value::Int(*k as i64));
                    rep.value("sign", Value::Int(*sign as i64));
                    if let Some(res) = residue {
                        rep.value("residue", Value::float(*res, 0.0));
                    }
                }
            }
            rep.check(r.linear_rel_err <= tol, || format!("linear parts differ by {:.3e}", r.linear_rel_err));
            rep.check(r.same_class, || "the reconstructed cord has a different class".into());
        }
        Err(e) => rep.fail(e.to_string()),
    }
    Ok(())
}

fn concord(s: &Scenario, task: &Task, rep: &mut TaskReport) -> Result<(), Diagnostic> {
    let mut args = Args::new(task);
    let (name, span) = args.name("a cord")?;
    let a = s.cord(name, span)?;
    if !args.keyword("gauge") {
        return Err(Diagnostic::new(args.end, "expected 'gauge' and a gauge name"));
    }
    let (g, gs) = args.name("a gauge")?;
    let y = s.gauge(g, gs)?;
    args.done()?;
    let Some(q) = certify(s, rep, &a) else {
        return Ok(());
    };
    let c = match concord_from_gauge(&q, &y, &s.chart) {
        Ok(c) => c,
        Err(e) => {
            rep.fail(e.to_string());
            return Ok(());
        }
    };
    rep.value("concord_flat_through", Value::Int(c.cord().flat_through() as i64));
    let start = c.restrict(&qcord_core::rational::zero()).map(|a0| a0.agrees_with(&a));
    let end = c.restrict(&qcord_core::rational::one()).and_then(|a1| Ok(a1 == gauge(&y, &a)?));
    let defect = c.split_defect().map(|d| d.is_zero());
    for (key, r, msg) in [
        ("start_is_A", start, "A_0 differs from A"),
        ("end_is_gauged", end, "A_1 differs from Y*A"),
        ("decomposition_exact", defect, "d_s A_s differs from nabla_(A_s) B_s"),
    ] {
        match r {
            Ok(ok) => {
                rep.value(key, Value::Bool(ok));
                rep.check(ok, || msg.into());
            }
            Err(e) => rep.fail(e.to_string()),
        }
    }
    Ok(())
}

fn run_task(s: &Scenario, task: &Task) -> TaskReport {
    let label = std::iter::once(task.kind.as_str()).chain(task.args.iter().map(|(w, _)| w.as_str())).collect::<Vec<_>>().join(" ").replace(" ^ - 1", "^-1");
    let mut rep = TaskReport::new(label);
    let jet_free = task.kind == "cohomology" && task.args.first().is_some_and(|(w, _)| w == "bott");
    if !jet_free && s.settings.order > MAX_ORDER {
        rep.abort(format!("resource limit: order {} exceeds {MAX_ORDER}", s.settings.order));
        return rep;
    }
    let t = Instant::now();
    let body = |rep: &mut TaskReport| -> Result<(), Diagnostic> {
        match task.kind.as_str() {
            "verify" => verify(s, task, rep),
            "holonomy" => holonomy(s, task, rep),
            "gv" => gv(s, task, rep),
            "cohomology" => cohomology(s, task, rep),
            "cech" => cech(s, task, rep),
            "concord" => concord(s, task, rep),
            other => Err(Diagnostic::new(task.span, format!("unknown task '{other}'"))),
        }
    };
    match catch_unwind(AssertUnwindSafe(|| body(&mut rep))) {
        Ok(Ok(())) => {}
        Ok(Err(d)) => rep.abort(d.to_string()),
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            rep.abort(format!("internal error: {}", msg.unwrap_or_default()));
        }
    }
    rep.seconds = t.elapsed().as_secs_f64();
    rep
}

/// Run the scenario's tasks, or only those of one kind. Tasks run in
/// parallel; the report lists them in file order.
pub fn run_scenario(s: &Scenario, only: Option<&str>, timing: bool) -> Report {
    let tasks: Vec<&Task> = s.tasks.iter().filter(|t| only.is_none_or(|k| t.kind == k)).collect();
    let mut reports: Vec<TaskReport> = tasks.par_iter().map(|t| run_task(s, t)).collect();
    if !timing {
        for r in &mut reports {
            r.seconds = 0.0;
        }
    }
    Report { scenario: s.name.clone(), tasks: reports }
}

pub fn status_counts(r: &Report) -> (usize, usize) {
    let pass = r.tasks.iter().filter(|t| t.status == Status::Pass).count();
    (pass, r.tasks.len() - pass)
}
