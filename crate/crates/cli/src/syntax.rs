//! Scenario files: one statement per line, `#` starts a comment.
//!
//! ```text
//! scenario cylinder-gv
//! chart x periodic, y real
//! set order 8
//! form a0 = dy + y*cos(x)*dx
//! vector V = (0, -1)
//! cord A = gv(a0, V)
//! gauge Y = t/2
//! loop g = x at (0, 0)
//! cover U = uniform(3, 1/10)
//! task verify A gauge Y
//! ```

use std::fmt;

use num_bigint::BigInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.span.line, self.span.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Float(String),
    Sym(char),
    Wedge,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex_line(text: &str, line: usize) -> Result<Vec<Token>, Diagnostic> {
    // dashes join words in scenario names only; everywhere else they are minus signs
    let dashed = text.trim_start().starts_with("scenario ");
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col: i + 1 };
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            // settings accept decimals and exponents; expressions only integers
            let mut float = false;
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                float = true;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '-' || chars[i] == '+' || chars[i] == 'e' || chars[i] == '.') {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if float { Tok::Float(s) } else { Tok::Int(s.parse().expect("digits")) };
            out.push(Token { tok, span });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || dashed && chars[i] == '-') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: if s == "wedge" { Tok::Wedge } else { Tok::Ident(s) }, span });
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'\\') {
            out.push(Token { tok: Tok::Wedge, span });
            i += 2;
            continue;
        }
        if c == '∧' {
            out.push(Token { tok: Tok::Wedge, span });
            i += 1;
            continue;
        }
        let c = if c == '−' { '-' } else { c };
        if "+-*/^(),=".contains(c) {
            out.push(Token { tok: Tok::Sym(c), span });
            i += 1;
            continue;
        }
        return Err(Diagnostic::new(span, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Wedge,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Wedge => "/\\",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Ident(String),
    Call(String, Vec<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Spans are ignored: two expressions are equal when their trees are.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Int(n) => write!(f, "{n}"),
            ExprKind::Ident(s) => write!(f, "{s}"),
            ExprKind::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            ExprKind::Neg(e) => write!(f, "-{}", Paren(e)),
            ExprKind::Bin(op, a, b) => write!(f, "{} {} {}", Paren(a), op.symbol(), Paren(b)),
            ExprKind::Pow(e, n) => write!(f, "{}^{n}", Paren(e)),
        }
    }
}

/// Parenthesizes anything that is not an atom, so printing never depends on
/// precedence.
struct Paren<'a>(&'a Expr);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.kind {
            ExprKind::Int(_) | ExprKind::Ident(_) | ExprKind::Call(..) => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Form,
    Jet,
    Cord,
    Gauge,
}

impl DeclKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::Form => "form",
            DeclKind::Jet => "jet",
            DeclKind::Cord => "cord",
            DeclKind::Gauge => "gauge",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Scenario(String),
    Chart(Vec<(String, bool)>),
    Set(String, String),
    Decl { kind: DeclKind, name: String, expr: Expr },
    Vector { name: String, comps: Vec<Expr> },
    Loop { name: String, coord: String, base: Vec<Expr> },
    Cover { name: String, arcs: usize, overlap: Expr },
    Task { kind: String, args: Vec<(String, Span)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Located {
    pub stmt: Statement,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub statements: Vec<Located>,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Expr]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        for s in &self.statements {
            match &s.stmt {
                Statement::Scenario(n) => writeln!(f, "scenario {n}")?,
                Statement::Chart(c) => {
                    let parts: Vec<String> =
                        c.iter().map(|(l, p)| format!("{l} {}", if *p { "periodic" } else { "real" })).collect();
                    writeln!(f, "chart {}", parts.join(", "))?
                }
                Statement::Set(k, v) => writeln!(f, "set {k} {v}")?,
                Statement::Decl { kind, name, expr } => writeln!(f, "{} {name} = {expr}", kind.keyword())?,
                Statement::Vector { name, comps } => writeln!(f, "vector {name} = ({})", list(comps))?,
                Statement::Loop { name, coord, base } => writeln!(f, "loop {name} = {coord} at ({})", list(base))?,
                Statement::Cover { name, arcs, overlap } => writeln!(f, "cover {name} = uniform({arcs}, {overlap})")?,
                Statement::Task { kind, args } => {
                    let a: Vec<&str> = args.iter().map(|(s, _)| s.as_str()).collect();
                    writeln!(f, "task {kind} {}", a.join(" "))?
                }
            }
        }
        Ok(())
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), Diagnostic> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Diagnostic::new(self.span(), format!("expected '{c}'")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), Diagnostic> {
        let span = self.span();
        match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) => Ok((s, span)),
            _ => Err(Diagnostic::new(span, format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        let span = self.span();
        match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == kw => Ok(()),
            _ => Err(Diagnostic::new(span, format!("expected '{kw}'"))),
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        if self.pos < self.toks.len() {
            return Err(Diagnostic::new(self.span(), "unexpected trailing input"));
        }
        Ok(())
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('+')) => BinOp::Add,
                Some(Tok::Sym('-')) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = lhs.span;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    // term := unary (('*' | '/' | wedge) unary)*
    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('*')) => BinOp::Mul,
                Some(Tok::Sym('/')) => BinOp::Div,
                Some(Tok::Wedge) => BinOp::Wedge,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            let span = lhs.span;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        let span = self.span();
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, Diagnostic> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let span = self.span();
        match self.next() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                let e = u32::try_from(&n).map_err(|_| Diagnostic::new(span, "exponent too large"))?;
                let s = base.span;
                Ok(Expr { kind: ExprKind::Pow(Box::new(base), e), span: s })
            }
            _ => Err(Diagnostic::new(span, "exponent must be a non-negative integer")),
        }
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let span = self.span();
        match self.next() {
            Some(Token { tok: Tok::Int(n), .. }) => Ok(Expr { kind: ExprKind::Int(n), span }),
            Some(Token { tok: Tok::Ident(s), .. }) => {
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            self.expect(',')?;
                        }
                    }
                    Ok(Expr { kind: ExprKind::Call(s, args), span })
                } else {
                    Ok(Expr { kind: ExprKind::Ident(s), span })
                }
            }
            Some(Token { tok: Tok::Sym('('), .. }) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Token { tok: Tok::Float(s), .. }) => {
                Err(Diagnostic::new(span, format!("decimal literal {s} in an expression; write a fraction p/q")))
            }
            _ => Err(Diagnostic::new(span, "expected an expression")),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>, Diagnostic> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }
}

fn statement(toks: Vec<Token>, line: usize, len: usize) -> Result<Located, Diagnostic> {
    let span = toks[0].span;
    let mut p = Parser { toks, pos: 0, end: Span { line, col: len + 1 } };
    let (head, _) = p.ident("a statement keyword")?;
    let stmt = match head.as_str() {
        "scenario" => Statement::Scenario(p.ident("a scenario name")?.0),
        "chart" => {
            let mut coords = Vec::new();
            loop {
                let (label, _) = p.ident("a coordinate name")?;
                let (kind, ks) = p.ident("'periodic' or 'real'")?;
                let periodic = match kind.as_str() {
                    "periodic" => true,
                    "real" => false,
                    _ => return Err(Diagnostic::new(ks, format!("unknown coordinate kind '{kind}'"))),
                };
                coords.push((label, periodic));
                if !p.eat(',') {
                    break;
                }
            }
            Statement::Chart(coords)
        }
        "set" => {
            let (key, _) = p.ident("a setting name")?;
            let span = p.span();
            let mut value = String::new();
            if p.eat('-') {
                value.push('-');
            }
            match p.next() {
                Some(Token { tok: Tok::Int(n), .. }) => value.push_str(&n.to_string()),
                Some(Token { tok: Tok::Float(s), .. }) => value.push_str(&s),
                _ => return Err(Diagnostic::new(span, "expected a number")),
            }
            Statement::Set(key, value)
        }
        "form" | "jet" | "cord" | "gauge" => {
            let kind = match head.as_str() {
                "form" => DeclKind::Form,
                "jet" => DeclKind::Jet,
                "cord" => DeclKind::Cord,
                _ => DeclKind::Gauge,
            };
            let (name, _) = p.ident("a name")?;
            p.expect('=')?;
            Statement::Decl { kind, name, expr: p.expr()? }
        }
        "vector" => {
            let (name, _) = p.ident("a name")?;
            p.expect('=')?;
            Statement::Vector { name, comps: p.expr_list()? }
        }
        "loop" => {
            let (name, _) = p.ident("a name")?;
            p.expect('=')?;
            let (coord, _) = p.ident("a coordinate")?;
            p.keyword("at")?;
            Statement::Loop { name, coord, base: p.expr_list()? }
        }
        "cover" => {
            let (name, _) = p.ident("a name")?;
            p.expect('=')?;
            p.keyword("uniform")?;
            p.expect('(')?;
            let span = p.span();
            let arcs = match p.next() {
                Some(Token { tok: Tok::Int(n), .. }) => usize::try_from(&n).map_err(|_| Diagnostic::new(span, "arc count too large"))?,
                _ => return Err(Diagnostic::new(span, "expected the number of arcs")),
            };
            p.expect(',')?;
            let overlap = p.expr()?;
            p.expect(')')?;
            Statement::Cover { name, arcs, overlap }
        }
        "task" => {
            let (kind, _) = p.ident("a task kind")?;
            let mut args = Vec::new();
            while let Some(t) = p.next() {
                let text = match t.tok {
                    Tok::Ident(s) => s,
                    Tok::Int(n) => n.to_string(),
                    Tok::Float(s) => s,
                    Tok::Sym(c) => c.to_string(),
                    Tok::Wedge => "/\\".into(),
                };
                args.push((text, t.span));
            }
            Statement::Task { kind, args }
        }
        other => return Err(Diagnostic::new(span, format!("unknown statement '{other}'"))),
    };
    p.finish()?;
    Ok(Located { stmt, span })
}

pub fn parse_program(text: &str) -> Result<Program, Diagnostic> {
    let mut statements = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks = lex_line(line, i + 1)?;
        if toks.is_empty() {
            continue;
        }
        statements.push(statement(toks, i + 1, line.chars().count())?);
    }
    Ok(Program { statements })
}

/// Parse a single expression, for tests and task arguments.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let toks = lex_line(text, 1)?;
    let mut p = Parser { toks, pos: 0, end: Span { line: 1, col: text.chars().count() + 1 } };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_printing() {
        let e = parse_expr("dy + y*cos(x)*dx").unwrap();
        assert_eq!(e.to_string(), "dy + ((y * cos(x)) * dx)");
        let e = parse_expr("-t^2/3 + a /\\ b").unwrap();
        assert_eq!(e.to_string(), "((-(t^2)) / 3) + (a /\\ b)");
        let e = parse_expr("(1 + t^2)*ds").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn located_errors() {
        let err = parse_expr("dy + * dx").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 6 });
        let err = parse_program("chart x periodic\nform a = cos(x\n").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (2, 15));
        let err = parse_program("chart x sideways").unwrap_err();
        assert!(err.message.contains("sideways"));
        assert!(parse_expr("x^-1").is_err());
        assert!(parse_expr("0.5*dx").is_err());
    }

    #[test]
    fn names_with_dashes() {
        let p = parse_program("scenario cylinder-gv\nform a = x-y\n").unwrap();
        assert_eq!(p.statements[0].stmt, Statement::Scenario("cylinder-gv".into()));
        let q = parse_program("form a = x-y\n").unwrap();
        match &q.statements[0].stmt {
            Statement::Decl { expr, .. } => assert!(matches!(expr.kind, ExprKind::Bin(BinOp::Sub, ..))),
            _ => panic!(),
        }
    }
}
