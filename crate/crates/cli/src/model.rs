//! Turns a parsed program into chart-aware values and a task list.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, ToPrimitive, Zero};
use qcord_core::calculus::{Chart, Form, Loop, ScalarField, VectorField};
use qcord_core::cech::Cover;
use qcord_core::cord::{gv_cord, GaugeSection, JetForm};
use qcord_core::rational::Rational;

use crate::syntax::{parse_program, BinOp, DeclKind, Diagnostic, Expr, ExprKind, Span, Statement};

/// Run parameters. Scenario `set` lines override the defaults; explicit
/// command-line flags override both.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub order: u32,
    pub cutoff: u32,
    pub step: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { order: 8, cutoff: 4, step: 1e-3, tol: 1e-6, seed: 0 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<u32>,
    pub cutoff: Option<u32>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// A polynomial in t with form coefficients, truncated at the scenario order.
pub type TSeries = Vec<Form>;

#[derive(Clone, Debug)]
pub enum Item {
    Jet { kind: DeclKind, coeffs: TSeries },
    /// A cord produced by gv(a0, V); the generating data is kept for the gv task.
    GvCord { a0: Form, v: VectorField, form: JetForm },
    Vector(VectorField),
    Loop(Loop),
    Cover(Cover),
}

#[derive(Clone, Debug)]
pub struct Task {
    pub kind: String,
    pub args: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub chart: Chart,
    pub settings: Settings,
    pub items: HashMap<String, Item>,
    pub tasks: Vec<Task>,
}

impl Scenario {
    pub fn item(&self, name: &str, span: Span) -> Result<&Item, Diagnostic> {
        self.items.get(name).ok_or_else(|| Diagnostic::new(span, format!("unknown name '{name}'")))
    }

    /// A declared 1-form jet as a cord of the scenario order.
    pub fn cord(&self, name: &str, span: Span) -> Result<JetForm, Diagnostic> {
        match self.item(name, span)? {
            Item::GvCord { form, .. } => Ok(form.clone()),
            Item::Jet { coeffs, .. } => {
                if !coeffs.iter().all(|w| w.is_zero() || w.has_degree(1)) {
                    return Err(Diagnostic::new(span, format!("'{name}' is not a 1-form")));
                }
                Ok(JetForm::univariate(1, self.settings.order, coeffs.clone()).expect("1-form coefficients"))
            }
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a cord"))),
        }
    }

    pub fn jet(&self, name: &str, span: Span) -> Result<JetForm, Diagnostic> {
        match self.item(name, span)? {
            Item::Jet { coeffs, .. } => {
                let degree = coeffs.iter().find_map(|w| w.degree()).unwrap_or(0);
                JetForm::univariate(degree, self.settings.order, coeffs.clone()).map_err(|e| Diagnostic::new(span, e.to_string()))
            }
            _ => self.cord(name, span),
        }
    }

    pub fn form(&self, name: &str, span: Span) -> Result<Form, Diagnostic> {
        match self.item(name, span)? {
            Item::Jet { coeffs, .. } if coeffs.iter().skip(1).all(|w| w.is_zero()) => Ok(coeffs[0].clone()),
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a form"))),
        }
    }

    pub fn gauge(&self, name: &str, span: Span) -> Result<GaugeSection, Diagnostic> {
        match self.item(name, span)? {
            Item::Jet { kind: DeclKind::Gauge, coeffs } => {
                let fields = coeffs.iter().map(|w| w.as_function().unwrap_or_default()).collect();
                GaugeSection::univariate(self.settings.order, fields).map_err(|e| Diagnostic::new(span, e.to_string()))
            }
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a gauge"))),
        }
    }

    pub fn vector(&self, name: &str, span: Span) -> Result<VectorField, Diagnostic> {
        match self.item(name, span)? {
            Item::Vector(v) => Ok(v.clone()),
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a vector field"))),
        }
    }

    pub fn loop_(&self, name: &str, span: Span) -> Result<Loop, Diagnostic> {
        match self.item(name, span)? {
            Item::Loop(l) => Ok(l.clone()),
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a loop"))),
        }
    }

    /// Evaluate an expression against the scenario's chart, order and names.
    pub fn eval(&self, e: &Expr) -> Result<TSeries, Diagnostic> {
        Env { chart: &self.chart, order: self.settings.order, items: &self.items }.eval(e)
    }

    pub fn cover(&self, name: &str, span: Span) -> Result<Cover, Diagnostic> {
        match self.item(name, span)? {
            Item::Cover(c) => Ok(c.clone()),
            _ => Err(Diagnostic::new(span, format!("'{name}' is not a cover"))),
        }
    }
}

struct Env<'a> {
    chart: &'a Chart,
    order: u32,
    items: &'a HashMap<String, Item>,
}

fn mul_series(a: &TSeries, b: &TSeries, order: u32, wedge: bool, span: Span) -> Result<TSeries, Diagnostic> {
    let positive = |s: &TSeries| s.iter().any(|w| w.components().any(|(m, _)| *m != 0));
    if !wedge && positive(a) && positive(b) {
        return Err(Diagnostic::new(span, "'*' needs a function on one side; use /\\ for the wedge of forms"));
    }
    let mut out = vec![Form::zero(); (order + 1) as usize];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= order as usize && !x.is_zero() && !y.is_zero() {
                out[i + j] = out[i + j].add(&x.wedge(y));
            }
        }
    }
    Ok(out)
}

fn constant_of(s: &TSeries) -> Option<Rational> {
    if s.iter().skip(1).any(|w| !w.is_zero()) {
        return None;
    }
    s[0].as_function()?.as_constant()
}

impl Env<'_> {
    fn constant(&self, c: Rational) -> TSeries {
        let mut v = vec![Form::zero(); (self.order + 1) as usize];
        v[0] = Form::constant(c);
        v
    }

    fn eval(&self, e: &Expr) -> Result<TSeries, Diagnostic> {
        match &e.kind {
            ExprKind::Int(n) => Ok(self.constant(Rational::from_integer(n.clone()))),
            ExprKind::Ident(name) => self.ident(name, e.span),
            ExprKind::Neg(x) => Ok(self.eval(x)?.iter().map(|w| w.neg()).collect()),
            ExprKind::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => Ok(x.iter().zip(&y).map(|(p, q)| p.add(q)).collect()),
                    BinOp::Sub => Ok(x.iter().zip(&y).map(|(p, q)| p.sub(q)).collect()),
                    BinOp::Mul => mul_series(&x, &y, self.order, false, e.span),
                    BinOp::Wedge => mul_series(&x, &y, self.order, true, e.span),
                    BinOp::Div => {
                        let c = constant_of(&y).ok_or_else(|| Diagnostic::new(b.span, "can only divide by a rational constant"))?;
                        if c.is_zero() {
                            return Err(Diagnostic::new(b.span, "division by zero"));
                        }
                        Ok(x.iter().map(|w| w.scale(&c.recip())).collect())
                    }
                }
            }
            ExprKind::Pow(x, n) => {
                if matches!(&x.kind, ExprKind::Ident(s) if s == "t") && *n > self.order {
                    return Err(Diagnostic::new(e.span, format!("degree overflow: t^{n} exceeds order {}", self.order)));
                }
                let base = self.eval(x)?;
                let mut acc = self.constant(Rational::one());
                for _ in 0..*n {
                    acc = mul_series(&acc, &base, self.order, false, e.span)?;
                }
                Ok(acc)
            }
            ExprKind::Call(f, args) if f == "sin" || f == "cos" => {
                if args.len() != 1 {
                    return Err(Diagnostic::new(e.span, format!("{f} takes one argument")));
                }
                let freq: Vec<(u8, i64)> = self.frequency(&args[0])?.into_iter().collect();
                let s = if f == "sin" { ScalarField::sin(&freq) } else { ScalarField::cos(&freq) };
                let mut out = self.constant(Rational::zero());
                out[0] = Form::scalar(s);
                Ok(out)
            }
            ExprKind::Call(f, _) => Err(Diagnostic::new(e.span, format!("unknown function '{f}'"))),
        }
    }

    fn ident(&self, name: &str, span: Span) -> Result<TSeries, Diagnostic> {
        if name == "t" {
            if self.order == 0 {
                return Err(Diagnostic::new(span, "degree overflow: t at order 0"));
            }
            let mut v = self.constant(Rational::zero());
            v[1] = Form::one();
            return Ok(v);
        }
        if let Some(i) = self.chart.index_of(name) {
            if !self.chart.allows_monomial(i) {
                return Err(Diagnostic::new(span, format!("periodic coordinate '{name}' may only appear inside sin or cos")));
            }
            let mut v = self.constant(Rational::zero());
            v[0] = Form::scalar(ScalarField::coord(i as u8));
            return Ok(v);
        }
        if let Some(c) = name.strip_prefix('d') {
            if let Some(i) = self.chart.index_of(c) {
                let mut v = self.constant(Rational::zero());
                v[0] = Form::basis(i);
                return Ok(v);
            }
        }
        match self.items.get(name) {
            Some(Item::Jet { coeffs, .. }) => Ok(coeffs.clone()),
            Some(Item::GvCord { form, .. }) => Ok((0..=self.order).map(|m| form.coeff1(m)).collect()),
            Some(_) => Err(Diagnostic::new(span, format!("'{name}' cannot be used in an expression"))),
            None if name.starts_with('d') && name.len() > 1 => {
                Err(Diagnostic::new(span, format!("unknown coordinate '{}' in basis form '{name}'", &name[1..])))
            }
            None => Err(Diagnostic::new(span, format!("unknown coordinate or name '{name}'"))),
        }
    }

    /// Integer linear combination of periodic coordinates.
    fn frequency(&self, e: &Expr) -> Result<BTreeMap<u8, i64>, Diagnostic> {
        let mut out = BTreeMap::new();
        self.collect_frequency(e, &Rational::one(), &mut out)?;
        let mut freq = BTreeMap::new();
        for (i, c) in out {
            if !c.is_integer() {
                return Err(Diagnostic::new(e.span, format!("non-integer frequency {c}")));
            }
            let n = c.to_integer().to_i64().ok_or_else(|| Diagnostic::new(e.span, "frequency too large"))?;
            if n != 0 {
                freq.insert(i, n);
            }
        }
        Ok(freq)
    }

    fn collect_frequency(&self, e: &Expr, scale: &Rational, out: &mut BTreeMap<u8, Rational>) -> Result<(), Diagnostic> {
        let bad = |msg: &str| Err(Diagnostic::new(e.span, msg.to_string()));
        match &e.kind {
            ExprKind::Ident(name) => match self.chart.index_of(name) {
                Some(i) if self.chart.is_periodic(i) => {
                    *out.entry(i as u8).or_insert_with(Rational::zero) += scale;
                    Ok(())
                }
                Some(_) => Err(Diagnostic::new(e.span, format!("sin/cos of non-periodic coordinate '{name}'"))),
                None => Err(Diagnostic::new(e.span, format!("unknown coordinate '{name}'"))),
            },
            ExprKind::Int(n) if n.is_zero() => Ok(()),
            ExprKind::Int(_) => bad("sin/cos arguments cannot have a constant phase"),
            ExprKind::Neg(x) => self.collect_frequency(x, &-scale.clone(), out),
            ExprKind::Bin(BinOp::Add, a, b) => {
                self.collect_frequency(a, scale, out)?;
                self.collect_frequency(b, scale, out)
            }
            ExprKind::Bin(BinOp::Sub, a, b) => {
                self.collect_frequency(a, scale, out)?;
                self.collect_frequency(b, &-scale.clone(), out)
            }
            ExprKind::Bin(BinOp::Mul, a, b) => {
                if let Some(c) = literal(a) {
                    self.collect_frequency(b, &(scale * c), out)
                } else if let Some(c) = literal(b) {
                    self.collect_frequency(a, &(scale * c), out)
                } else {
                    bad("sin/cos arguments must be linear in the coordinates")
                }
            }
            ExprKind::Bin(BinOp::Div, a, b) => match literal(b) {
                Some(c) if !c.is_zero() => self.collect_frequency(a, &(scale / c), out),
                _ => bad("sin/cos arguments must be linear in the coordinates"),
            },
            _ => bad("sin/cos arguments must be linear in the coordinates"),
        }
    }
}

/// A numeric literal: an integer, −literal, or a quotient of literals.
fn literal(e: &Expr) -> Option<Rational> {
    match &e.kind {
        ExprKind::Int(n) => Some(Rational::from_integer(n.clone())),
        ExprKind::Neg(x) => literal(x).map(|r| -r),
        ExprKind::Bin(BinOp::Div, a, b) => {
            let d = literal(b)?;
            (!d.is_zero()).then(|| literal(a).map(|n| n / d))?
        }
        _ => None,
    }
}

fn check_kind(kind: DeclKind, coeffs: &TSeries, chart: &Chart, span: Span) -> Result<(), Diagnostic> {
    for w in coeffs {
        w.validate(chart).map_err(|e| Diagnostic::new(span, e.to_string()))?;
    }
    let degrees: Vec<u32> = coeffs.iter().filter(|w| !w.is_zero()).map(|w| w.degree()).collect::<Option<_>>().ok_or_else(|| {
        Diagnostic::new(span, "expression mixes forms of different degrees")
    })?;
    if degrees.windows(2).any(|p| p[0] != p[1]) {
        return Err(Diagnostic::new(span, "expression mixes forms of different degrees"));
    }
    let degree = degrees.first().copied();
    match kind {
        DeclKind::Form if coeffs.iter().skip(1).any(|w| !w.is_zero()) => Err(Diagnostic::new(span, "a form cannot depend on t; declare a jet")),
        DeclKind::Cord if degree.is_some_and(|d| d != 1) => Err(Diagnostic::new(span, "a cord must be a 1-form")),
        DeclKind::Gauge if degree.is_some_and(|d| d != 0) => Err(Diagnostic::new(span, "a gauge must be a function of t")),
        _ => Ok(()),
    }
}

fn parse_setting<T: std::str::FromStr>(value: &str, span: Span) -> Result<T, Diagnostic> {
    value.parse().map_err(|_| Diagnostic::new(span, format!("invalid value '{value}'")))
}

/// Largest order and cutoff a scenario may request.
pub const MAX_ORDER: u32 = 16;
pub const MAX_CUTOFF: u32 = 12;

pub fn build_scenario(text: &str, overrides: &Overrides) -> Result<Scenario, Diagnostic> {
    let program = parse_program(text)?;
    let mut name = String::from("unnamed");
    let mut chart: Option<Chart> = None;
    let mut settings = Settings::default();
    // settings first, so every expression sees the final order
    for s in &program.statements {
        if let Statement::Set(key, value) = &s.stmt {
            match key.as_str() {
                "order" => settings.order = parse_setting(value, s.span)?,
                "cutoff" => settings.cutoff = parse_setting(value, s.span)?,
                "step" => settings.step = parse_setting(value, s.span)?,
                "tol" => settings.tol = parse_setting(value, s.span)?,
                "seed" => settings.seed = parse_setting(value, s.span)?,
                other => return Err(Diagnostic::new(s.span, format!("unknown setting '{other}'"))),
            }
        }
    }
    settings.order = overrides.order.unwrap_or(settings.order);
    settings.cutoff = overrides.cutoff.unwrap_or(settings.cutoff);
    settings.step = overrides.step.unwrap_or(settings.step);
    settings.tol = overrides.tol.unwrap_or(settings.tol);
    settings.seed = overrides.seed.unwrap_or(settings.seed);

    let mut items: HashMap<String, Item> = HashMap::new();
    let mut tasks = Vec::new();
    for s in &program.statements {
        let need_chart = || chart.clone().ok_or_else(|| Diagnostic::new(s.span, "declare the chart first"));
        let fresh = |n: &str, items: &HashMap<String, Item>, chart: &Option<Chart>| {
            let clash = items.contains_key(n)
                || n == "t"
                || chart.as_ref().is_some_and(|c| c.index_of(n).is_some() || n.strip_prefix('d').is_some_and(|r| c.index_of(r).is_some()));
            if clash {
                Err(Diagnostic::new(s.span, format!("'{n}' is already defined")))
            } else {
                Ok(())
            }
        };
        match &s.stmt {
            Statement::Scenario(n) => name = n.clone(),
            Statement::Set(..) => {}
            Statement::Chart(coords) => {
                if chart.is_some() {
                    return Err(Diagnostic::new(s.span, "the chart is declared twice"));
                }
                if coords.iter().any(|(l, _)| l == "t" || l.starts_with('d')) {
                    return Err(Diagnostic::new(s.span, "coordinate names cannot be 't' or start with 'd'"));
                }
                let c = Chart::from_flags(&coords.iter().map(|(l, p)| (l.as_str(), *p)).collect::<Vec<_>>())
                    .map_err(|e| Diagnostic::new(s.span, e.to_string()))?;
                chart = Some(c);
            }
            Statement::Decl { kind, name: n, expr } => {
                let c = need_chart()?;
                fresh(n, &items, &chart)?;
                let item = match (&expr.kind, kind) {
                    (ExprKind::Call(f, args), DeclKind::Cord) if f == "gv" => {
                        let (a0, v) = match args.as_slice() {
                            [Expr { kind: ExprKind::Ident(a), span: sa }, Expr { kind: ExprKind::Ident(v), span: sv }] => {
                                let env = Env { chart: &c, order: settings.order, items: &items };
                                let a0 = env.ident(a, *sa)?;
                                if a0.iter().skip(1).any(|w| !w.is_zero()) {
                                    return Err(Diagnostic::new(*sa, format!("'{a}' is not a form")));
                                }
                                match items.get(v) {
                                    Some(Item::Vector(vf)) => (a0[0].clone(), vf.clone()),
                                    _ => return Err(Diagnostic::new(*sv, format!("'{v}' is not a vector field"))),
                                }
                            }
                            _ => return Err(Diagnostic::new(expr.span, "gv takes a form name and a vector field name")),
                        };
                        let cord = gv_cord(&a0, &v, settings.order).map_err(|e| Diagnostic::new(expr.span, e.to_string()))?;
                        Item::GvCord { a0, v, form: cord.into_form() }
                    }
                    _ => {
                        let env = Env { chart: &c, order: settings.order, items: &items };
                        let coeffs = env.eval(expr)?;
                        check_kind(*kind, &coeffs, &c, expr.span)?;
                        Item::Jet { kind: *kind, coeffs }
                    }
                };
                items.insert(n.clone(), item);
            }
            Statement::Vector { name: n, comps } => {
                let c = need_chart()?;
                fresh(n, &items, &chart)?;
                if comps.len() != c.dim() {
                    return Err(Diagnostic::new(s.span, format!("a vector field on this chart has {} components", c.dim())));
                }
                let env = Env { chart: &c, order: settings.order, items: &items };
                let mut fields = Vec::new();
                for e in comps {
                    let v = env.eval(e)?;
                    let f = match (v.iter().skip(1).all(|w| w.is_zero()), v[0].as_function()) {
                        (true, Some(f)) => f,
                        _ => return Err(Diagnostic::new(e.span, "vector components must be functions")),
                    };
                    fields.push(f);
                }
                let vf = VectorField(fields);
                vf.validate(&c).map_err(|e| Diagnostic::new(s.span, e.to_string()))?;
                items.insert(n.clone(), Item::Vector(vf));
            }
            Statement::Loop { name: n, coord, base } => {
                let c = need_chart()?;
                fresh(n, &items, &chart)?;
                let i = c.index_of(coord).ok_or_else(|| Diagnostic::new(s.span, format!("unknown coordinate '{coord}'")))?;
                if base.len() != c.dim() {
                    return Err(Diagnostic::new(s.span, format!("the basepoint needs {} coordinates", c.dim())));
                }
                let pt: Vec<Rational> = base
                    .iter()
                    .map(|e| literal(e).ok_or_else(|| Diagnostic::new(e.span, "basepoint coordinates must be rational literals")))
                    .collect::<Result<_, _>>()?;
                let l = Loop::generator(&c, i, &pt).map_err(|e| Diagnostic::new(s.span, e.to_string()))?;
                items.insert(n.clone(), Item::Loop(l));
            }
            Statement::Cover { name: n, arcs, overlap } => {
                fresh(n, &items, &chart)?;
                let delta = literal(overlap).filter(|d| d.is_positive()).ok_or_else(|| {
                    Diagnostic::new(overlap.span, "the overlap must be a positive rational literal")
                })?;
                let cover = Cover::uniform(*arcs, delta).map_err(|e| Diagnostic::new(s.span, e.to_string()))?;
                items.insert(n.clone(), Item::Cover(cover));
            }
            Statement::Task { kind, args } => tasks.push(Task { kind: kind.clone(), args: args.clone(), span: s.span }),
        }
    }
    let chart = chart.ok_or_else(|| Diagnostic::new(Span { line: 1, col: 1 }, "the scenario declares no chart"))?;
    Ok(Scenario { name, chart, settings, items, tasks })
}
