use num_bigint::BigInt;
use qcord_core::calculus::TwoPiMultiple;
use qcord_core::Rational;
use serde_json::{json, Map, Value as Json};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// the task could not run: bad arguments, a failed precondition, or a
    /// resource limit
    Aborted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Aborted => "aborted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Text(String),
    Rational(Rational),
    TwoPi(TwoPiMultiple),
    Float { value: f64, abs_err: f64 },
    List(Vec<Value>),
}

/// Floats are rounded to 12 significant digits so reports are reproducible
/// across platforms.
fn round(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fmt_float(x: f64) -> String {
    format!("{:.11e}", round(x))
}

fn bigint_json(n: &BigInt) -> Json {
    match i64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

fn rational_json(r: &Rational) -> Json {
    json!({ "num": bigint_json(r.numer()), "den": bigint_json(r.denom()) })
}

fn float_json(x: f64) -> Json {
    serde_json::Number::from_f64(round(x)).map(Json::Number).unwrap_or_else(|| json!(x.to_string()))
}

impl Value {
    pub fn float(value: f64, abs_err: f64) -> Self {
        Value::Float { value, abs_err }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Int(n) => json!(n),
            Value::Bool(b) => json!(b),
            Value::Text(s) => json!(s),
            Value::Rational(r) => rational_json(r),
            Value::TwoPi(t) => json!({ "rational": rational_json(&t.rational), "two_pi_power": t.two_pi_power }),
            Value::Float { value, abs_err } => json!({ "value": float_json(*value), "abs_err": float_json(*abs_err) }),
            Value::List(v) => Json::Array(v.iter().map(Value::to_json).collect()),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Rational(r) => r.to_string(),
            Value::TwoPi(t) => format!("{}*(2pi)^{}", t.rational, t.two_pi_power),
            Value::Float { value, abs_err } => format!("{} +- {}", fmt_float(*value), fmt_float(*abs_err)),
            Value::List(v) => format!("[{}]", v.iter().map(Value::to_text).collect::<Vec<_>>().join(", ")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TaskReport {
    pub name: String,
    pub status: Status,
    pub values: Vec<(String, Value)>,
    pub errors: Vec<String>,
    pub flags: Vec<String>,
    pub seconds: f64,
}

impl TaskReport {
    pub fn new(name: impl Into<String>) -> Self {
        TaskReport { name: name.into(), status: Status::Pass, values: Vec::new(), errors: Vec::new(), flags: Vec::new(), seconds: 0.0 }
    }

    pub fn value(&mut self, key: &str, v: Value) {
        self.values.push((key.to_string(), v));
    }

    pub fn flag(&mut self, f: impl Into<String>) {
        self.flags.push(f.into());
    }

    /// Record a failed check; the task keeps running.
    pub fn fail(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
    }

    pub fn abort(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
        self.status = Status::Aborted;
    }

    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: String,
    pub tasks: Vec<TaskReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.tasks.iter().all(|t| t.status == Status::Pass)
    }

    pub fn to_json(&self) -> Json {
        let tasks: Vec<Json> = self
            .tasks
            .iter()
            .map(|t| {
                let mut values = Map::new();
                for (k, v) in &t.values {
                    values.insert(k.clone(), v.to_json());
                }
                json!({
                    "name": t.name,
                    "status": t.status.as_str(),
                    "values": values,
                    "errors": t.errors,
                    "flags": t.flags,
                    "seconds": float_json(t.seconds),
                })
            })
            .collect();
        json!({ "scenario": self.scenario, "tasks": tasks })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {}\n", self.scenario);
        for t in &self.tasks {
            out.push_str(&format!("[{}] {} ({:.3}s)\n", t.status.as_str(), t.name, t.seconds));
            for (k, v) in &t.values {
                out.push_str(&format!("  {k} = {}\n", v.to_text()));
            }
            for f in &t.flags {
                out.push_str(&format!("  note: {f}\n"));
            }
            for e in &t.errors {
                out.push_str(&format!("  error: {e}\n"));
            }
        }
        let passed = self.tasks.iter().filter(|t| t.status == Status::Pass).count();
        out.push_str(&format!("{passed}/{} tasks passed\n", self.tasks.len()));
        out
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
                s.push('\n');
                s.into_bytes()
            }
            Format::Text => self.to_text().into_bytes(),
        }
    }
}
