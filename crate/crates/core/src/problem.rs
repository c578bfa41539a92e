//! Line-oriented problem files, built-in fixtures and query execution.
//!
//! ```text
//! ring x y
//! params a b
//! module M 2x3 = [x, 0, y; y, x, 0]
//! vector h = (x, 3*y)
//! arc phi = (t, a*t | t, b*t)
//! query s1 h in M budget=1
//! ```
//!
//! Ring lines (`ring`, `params`, `family`, `curve`) come first and may share a
//! line separated by `|`. `#` starts a comment. Names live in one namespace and
//! must be declared before use.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::closure::{
    closure_membership, exact_ideal_membership, exact_membership, monomial_closure_membership, Certificate, CurveBudget,
    CurvePair, Status, Verdict,
};
use crate::double::double_module;
use crate::error::{Error, Result};
use crate::linalg::{GenMatrix, IdealGens};
use crate::ring::{parse_error_offset, parse_poly, Assignment, Coeff, Poly, PolyVec, VarRegistry};
use crate::saturation::{
    ideal_lipschitz_test, ile_family_test, run_chain, s1_test, s2_refuter, s3_test, transfer_certify, SatOptions,
};

pub const REPORT_SCHEMA: &str = "lipsat-report/1";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingDecl {
    pub base: Vec<String>,
    pub params: Vec<String>,
    pub family: Vec<String>,
    pub curve: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    Module(GenMatrix),
    Vector(PolyVec),
    Ideal(IdealGens),
    Poly(Poly),
    Arc(CurvePair),
}

impl Object {
    fn keyword(&self) -> &'static str {
        match self {
            Object::Module(_) => "module",
            Object::Vector(_) => "vector",
            Object::Ideal(_) => "ideal",
            Object::Poly(_) => "poly",
            Object::Arc(_) => "arc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact membership over the polynomial ring.
    Member,
    /// Integral closure of a module.
    Closure,
    /// Integral closure of a monomial ideal.
    Monomial,
    /// Lipschitz saturation of an ideal.
    Ideal,
    S1,
    S2,
    S3,
    Chain,
    Transfer,
    Ile,
}

impl Mode {
    const ALL: [(&'static str, Mode); 10] = [
        ("member", Mode::Member),
        ("closure", Mode::Closure),
        ("monomial", Mode::Monomial),
        ("ideal", Mode::Ideal),
        ("s1", Mode::S1),
        ("s2", Mode::S2),
        ("s3", Mode::S3),
        ("chain", Mode::Chain),
        ("transfer", Mode::Transfer),
        ("ile", Mode::Ile),
    ];

    pub fn name(self) -> &'static str {
        Mode::ALL.iter().find(|(_, m)| *m == self).unwrap().0
    }

    fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.iter().find(|(n, _)| *n == s).map(|(_, m)| *m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transfer {
    Auto,
    Named(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryOptions {
    pub budget: Option<u32>,
    pub terms: Option<u8>,
    pub noparams: bool,
    pub transfer: Option<Transfer>,
    /// Base point; the problem is translated so that it sits at the origin.
    pub at: Option<Vec<Coeff>>,
    pub arcs: Vec<String>,
    pub psi: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub mode: Mode,
    pub target: String,
    pub container: Option<String>,
    pub options: QueryOptions,
    pub line: usize,
}

impl Query {
    pub fn text(&self) -> String {
        let mut s = format!("{} {}", self.mode.name(), self.target);
        if let Some(c) = &self.container {
            let _ = write!(s, " in {c}");
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub ring: RingDecl,
    pub reg: Arc<VarRegistry>,
    pub objects: Vec<(String, Object)>,
    pub queries: Vec<Query>,
}

impl PartialEq for ProblemFile {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.objects == other.objects
            && self.queries.iter().map(Query::text).eq(other.queries.iter().map(Query::text))
            && self.queries.iter().map(|q| &q.options).eq(other.queries.iter().map(|q| &q.options))
    }
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// A line being consumed left to right, tracking the 1-based column.
struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        perr(self.line, self.pos + 1, message)
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.text[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn word(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some((start, &rest[..len]))
    }

    fn name(&mut self, what: &str) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let n = &rest[..len];
        if !is_name(n) {
            return Err(self.err(format!("expected {what} name")));
        }
        self.pos += len;
        Ok(n.to_string())
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    /// The text up to the matching `close`, returning its start offset.
    fn bracketed(&mut self, open: char, close: char) -> Result<(usize, &'a str)> {
        self.expect(&open.to_string())?;
        let start = self.pos;
        let rest = &self.text[start..];
        let end = rest.find(close).ok_or_else(|| self.err(format!("missing `{close}`")))?;
        self.pos += end + close.len_utf8();
        Ok((start, &rest[..end]))
    }

    fn rest(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        self.pos = self.text.len();
        (start, &self.text[start..])
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }
}

fn parse_poly_at(src: &str, line: usize, col0: usize, reg: &VarRegistry) -> Result<Poly> {
    parse_poly(src, reg).map_err(|e| {
        let off = parse_error_offset(&e).unwrap_or(0);
        let lead = src.len() - src.trim_start().len();
        let message = match e {
            Error::Parse { message, .. } => message,
            other => other.to_string(),
        };
        perr(line, col0 + 1 + off.max(lead).min(src.len()), message)
    })
}

/// Comma-separated polynomials inside a bracketed span beginning at `col0`.
fn parse_list(src: &str, sep: char, line: usize, col0: usize, reg: &VarRegistry) -> Result<Vec<Poly>> {
    if src.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut off = 0;
    for part in src.split(sep) {
        out.push(parse_poly_at(part, line, col0 + off, reg)?);
        off += part.len() + sep.len_utf8();
    }
    Ok(out)
}

fn split_options(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if let Some(st) = start.take() {
                out.push((st, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out
}

fn parse_rational(s: &str) -> Option<Coeff> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().ok()?, d.trim().parse::<i64>().ok()?),
        None => (s.parse::<i64>().ok()?, 1),
    };
    (d != 0).then(|| Coeff::new(n.into(), d.into()))
}

fn rational_text(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl ProblemFile {
    pub fn parse(src: &str) -> Result<ProblemFile> {
        let mut ring = RingDecl::default();
        let mut reg: Option<Arc<VarRegistry>> = None;
        let mut objects: Vec<(String, Object)> = Vec::new();
        let mut queries = Vec::new();
        for (ln, raw) in src.lines().enumerate() {
            let line = ln + 1;
            let text = raw.split('#').next().unwrap_or("");
            if text.trim().is_empty() {
                continue;
            }
            let mut cur = Cursor { line, text, pos: 0 };
            let (kw_col, kw) = cur.word().unwrap();
            match kw {
                "ring" | "params" | "family" | "curve" => {
                    if reg.is_some() {
                        return Err(perr(line, kw_col + 1, "ring declarations must precede all other lines"));
                    }
                    let mut off = 0;
                    for seg in text.split('|') {
                        let mut words = seg.split_whitespace();
                        let Some(k) = words.next() else {
                            return Err(perr(line, off + 1, "empty ring segment"));
                        };
                        let names: Vec<String> = words.map(str::to_string).collect();
                        if let Some(bad) = names.iter().find(|n| !is_name(n)) {
                            return Err(perr(line, off + 1, format!("`{bad}` is not a valid name")));
                        }
                        match k {
                            "ring" => ring.base.extend(names),
                            "params" => ring.params.extend(names),
                            "family" => ring.family.extend(names),
                            "curve" => {
                                if names.len() != 1 || ring.curve.is_some() {
                                    return Err(perr(line, off + 1, "`curve` takes exactly one name, once"));
                                }
                                ring.curve = names.into_iter().next();
                            }
                            other => return Err(perr(line, off + 1, format!("unknown ring keyword `{other}`"))),
                        }
                        off += seg.len() + 1;
                    }
                    continue;
                }
                _ => {}
            }
            let reg = match &reg {
                Some(r) => r.clone(),
                None => {
                    let r = build_registry(&ring).map_err(|e| perr(line, 1, e.to_string()))?;
                    reg = Some(r.clone());
                    r
                }
            };
            let nv = reg.len();
            let lookup = |name: &str, col: usize| -> Result<&Object> {
                objects
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, o)| o)
                    .ok_or_else(|| perr(line, col + 1, format!("unknown name `{name}`")))
            };
            if kw == "query" {
                let (mcol, mode) = cur.word().ok_or_else(|| cur.err("expected a query mode"))?;
                let mode = Mode::parse(mode).ok_or_else(|| perr(line, mcol + 1, format!("unknown query mode `{mode}`")))?;
                cur.skip_ws();
                let tcol = cur.pos;
                let target = cur.name("target")?;
                lookup(&target, tcol)?;
                let save = cur.pos;
                let container = match cur.word() {
                    Some((_, "in")) => {
                        cur.skip_ws();
                        let ccol = cur.pos;
                        let c = cur.name("container")?;
                        lookup(&c, ccol)?;
                        Some(c)
                    }
                    _ => {
                        cur.pos = save;
                        None
                    }
                };
                let (ocol, rest) = cur.rest();
                let mut options = QueryOptions::default();
                for (o, opt) in split_options(rest) {
                    let col = ocol + o + 1;
                    let (key, value) = opt.split_once('=').unwrap_or((opt, ""));
                    let bad = || perr(line, col, format!("bad option `{opt}`"));
                    match key {
                        "budget" => options.budget = Some(value.parse().ok().filter(|&e: &u32| e >= 1).ok_or_else(bad)?),
                        "terms" => options.terms = Some(value.parse().ok().filter(|t: &u8| (1..=2).contains(t)).ok_or_else(bad)?),
                        "noparams" if value.is_empty() => options.noparams = true,
                        "transfer" => {
                            options.transfer = Some(if value == "auto" {
                                Transfer::Auto
                            } else {
                                match lookup(value, col - 1 + key.len() + 1)? {
                                    Object::Ideal(_) => Transfer::Named(value.to_string()),
                                    _ => return Err(perr(line, col, format!("`{value}` is not an ideal"))),
                                }
                            })
                        }
                        "at" => {
                            let inner = value.strip_prefix('(').and_then(|v| v.strip_suffix(')')).ok_or_else(bad)?;
                            let pt: Option<Vec<Coeff>> = inner.split(',').map(parse_rational).collect();
                            let pt = pt.ok_or_else(bad)?;
                            if pt.len() != reg.n_base() {
                                return Err(perr(line, col, format!("base point needs {} coordinates", reg.n_base())));
                            }
                            options.at = Some(pt);
                        }
                        "arcs" | "psi" => {
                            let names: Vec<String> = value.split(',').map(str::to_string).collect();
                            for n in &names {
                                let o = lookup(n, col - 1)?;
                                let ok = matches!((key, o), ("arcs", Object::Arc(_)) | ("psi", Object::Vector(_)));
                                if !ok {
                                    return Err(perr(line, col, format!("`{n}` has the wrong kind for `{key}`")));
                                }
                            }
                            if key == "arcs" {
                                options.arcs = names;
                            } else {
                                options.psi = names;
                            }
                        }
                        _ => return Err(bad()),
                    }
                }
                queries.push(Query {
                    mode,
                    target,
                    container,
                    options,
                    line,
                });
                continue;
            }
            cur.skip_ws();
            let ncol = cur.pos;
            let name = cur.name(kw)?;
            if objects.iter().any(|(n, _)| *n == name) {
                return Err(perr(line, ncol + 1, format!("`{name}` is already defined")));
            }
            if reg.lookup(&name).is_ok() {
                return Err(perr(line, ncol + 1, format!("`{name}` clashes with a variable")));
            }
            let obj = match kw {
                "module" => {
                    let (dcol, dims) = cur.word().ok_or_else(|| cur.err("expected dimensions like 2x3"))?;
                    let parsed = dims
                        .split_once('x')
                        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)));
                    let (p, r) = parsed.ok_or_else(|| perr(line, dcol + 1, "expected dimensions like 2x3"))?;
                    cur.expect("=")?;
                    let (bcol, body) = cur.bracketed('[', ']')?;
                    let mut rows = Vec::new();
                    let mut off = 0;
                    for row in body.split(';') {
                        let entries = parse_list(row, ',', line, bcol + off, &reg)?;
                        if entries.len() != r {
                            return Err(perr(line, bcol + off + 1, format!("row has {} entries, expected {r}", entries.len())));
                        }
                        rows.push(entries);
                        off += row.len() + 1;
                    }
                    if rows.len() != p {
                        return Err(perr(line, bcol + 1, format!("{} rows, expected {p}", rows.len())));
                    }
                    Object::Module(if p == 0 || r == 0 {
                        GenMatrix::zero(nv, p, r)
                    } else {
                        GenMatrix::from_rows(nv, rows).map_err(|e| perr(line, bcol + 1, e.to_string()))?
                    })
                }
                "vector" => {
                    cur.expect("=")?;
                    let (bcol, body) = cur.bracketed('(', ')')?;
                    Object::Vector(PolyVec(parse_list(body, ',', line, bcol, &reg)?))
                }
                "ideal" => {
                    cur.expect("=")?;
                    let (bcol, body) = cur.bracketed('<', '>')?;
                    Object::Ideal(IdealGens::new(nv, parse_list(body, ',', line, bcol, &reg)?))
                }
                "poly" => {
                    cur.expect("=")?;
                    let (pcol, body) = cur.rest();
                    Object::Poly(parse_poly_at(body, line, pcol, &reg)?)
                }
                "arc" => {
                    cur.expect("=")?;
                    let (bcol, body) = cur.bracketed('(', ')')?;
                    let (a, b) = body.split_once('|').ok_or_else(|| perr(line, bcol + 1, "expected `phi1 | phi2`"))?;
                    let phi1 = parse_list(a, ',', line, bcol, &reg)?;
                    let phi2 = parse_list(b, ',', line, bcol + a.len() + 1, &reg)?;
                    let family = if cur.at_end() {
                        Vec::new()
                    } else {
                        cur.expect("family")?;
                        let (fcol, fb) = cur.bracketed('(', ')')?;
                        parse_list(fb, ',', line, fcol, &reg)?
                    };
                    let c = CurvePair::new(&reg, phi1, phi2, family).map_err(|e| perr(line, bcol + 1, e.to_string()))?;
                    Object::Arc(c.with_label(name.clone()))
                }
                other => return Err(perr(line, kw_col + 1, format!("unknown keyword `{other}`"))),
            };
            if !cur.at_end() {
                return Err(cur.err("unexpected trailing text"));
            }
            objects.push((name, obj));
        }
        let reg = match reg {
            Some(r) => r,
            None => build_registry(&ring).map_err(|e| perr(1, 1, e.to_string()))?,
        };
        Ok(ProblemFile {
            ring,
            reg,
            objects,
            queries,
        })
    }

    pub fn object(&self, name: &str) -> Option<&Object> {
        self.objects.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }

    /// Canonical text; parsing it gives back an equal problem.
    pub fn print(&self) -> String {
        let reg = &self.reg;
        let s = |p: &Poly| p.to_string_with(reg);
        let list = |v: &[Poly]| v.iter().map(s).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        if !self.ring.base.is_empty() {
            let _ = writeln!(out, "ring {}", self.ring.base.join(" "));
        }
        if !self.ring.params.is_empty() {
            let _ = writeln!(out, "params {}", self.ring.params.join(" "));
        }
        if !self.ring.family.is_empty() {
            let _ = writeln!(out, "family {}", self.ring.family.join(" "));
        }
        if let Some(c) = &self.ring.curve {
            let _ = writeln!(out, "curve {c}");
        }
        for (name, obj) in &self.objects {
            let _ = match obj {
                Object::Module(m) => {
                    let rows: Vec<String> = (0..m.nrows()).map(|i| list(&m.row(i))).collect();
                    writeln!(out, "module {name} {}x{} = [{}]", m.nrows(), m.ncols(), rows.join("; "))
                }
                Object::Vector(v) => writeln!(out, "vector {name} = ({})", list(v.entries())),
                Object::Ideal(i) => writeln!(out, "ideal {name} = <{}>", list(&i.gens)),
                Object::Poly(p) => writeln!(out, "poly {name} = {}", s(p)),
                Object::Arc(c) => {
                    let mut line = format!("arc {name} = ({} | {})", list(&c.phi1), list(&c.phi2));
                    if !c.family.is_empty() {
                        let _ = write!(line, " family ({})", list(&c.family));
                    }
                    writeln!(out, "{line}")
                }
            };
        }
        for q in &self.queries {
            let mut line = format!("query {}", q.text());
            let o = &q.options;
            if let Some(b) = o.budget {
                let _ = write!(line, " budget={b}");
            }
            if let Some(t) = o.terms {
                let _ = write!(line, " terms={t}");
            }
            if o.noparams {
                line.push_str(" noparams");
            }
            match &o.transfer {
                Some(Transfer::Auto) => line.push_str(" transfer=auto"),
                Some(Transfer::Named(n)) => {
                    let _ = write!(line, " transfer={n}");
                }
                None => {}
            }
            if let Some(pt) = &o.at {
                let _ = write!(line, " at=({})", pt.iter().map(rational_text).collect::<Vec<_>>().join(","));
            }
            if !o.arcs.is_empty() {
                let _ = write!(line, " arcs={}", o.arcs.join(","));
            }
            if !o.psi.is_empty() {
                let _ = write!(line, " psi={}", o.psi.join(","));
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn build_registry(ring: &RingDecl) -> Result<Arc<VarRegistry>> {
    let mut b = VarRegistry::builder()
        .base(&ring.base)
        .family(&ring.family)
        .generic(&ring.params);
    // The curve parameter defaults to the first of t, s, u, w not already taken.
    let taken = |n: &str| ring.base.iter().chain(&ring.params).chain(&ring.family).any(|m| m == n);
    let curve = match &ring.curve {
        Some(c) => c.as_str(),
        None => ["t", "s", "u", "w"].into_iter().find(|n| !taken(n)).unwrap_or("t"),
    };
    b = b.curve(curve);
    b.build()
}

// ---------------------------------------------------------------------------
// Fixtures.

pub const FIXTURES: [&str; 2] = ["paper-example", "fr-family"];

/// Text of a built-in problem. `n` only matters for `fr-family`.
pub fn fixture(name: &str, n: u32) -> Result<String> {
    match name {
        "paper-example" => Ok("\
# h = (x, 3y) lies in S3 of M but not in S1.
ring x y
params a b
module M 2x3 = [x, 0, y; y, x, 0]
vector h = (x, 3*y)
arc phi = (t, a*t | t, b*t)
query s3 h in M
query s1 h in M budget=1
query chain h in M budget=1
"
        .to_string()),
        "fr-family" => {
            if n == 0 {
                return Err(Error::Precondition("fr-family needs n >= 1".into()));
            }
            let (a, b, e) = (3 * n - 2, 3 * n, 3 * n - 1);
            let mid = if a == 1 { "x*y".to_string() } else { format!("x*y^{a}") };
            Ok(format!(
                "\
# F = x^3/3 - t^2 x y^{a} + y^{b}, n = {n}; branch arcs x = +-s^{e}, y = s^2, t = s.
ring x y
family t
curve s
poly F = 1/3*x^3 - t^2*{mid} + y^{b}
arc branch = (s^{e}, s^2 | -s^{e}, s^2) family (s)
query ile F arcs=branch budget=1
"
            ))
        }
        other => Err(Error::Precondition(format!(
            "unknown fixture `{other}` (known: {})",
            FIXTURES.join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// Execution.

/// Settings applied to every query that does not override them.
#[derive(Clone, Debug)]
pub struct RunDefaults {
    pub budget: u32,
    pub noparams: bool,
    pub transfer: Option<Transfer>,
    pub emit_certificates: bool,
}

impl Default for RunDefaults {
    fn default() -> Self {
        RunDefaults {
            budget: 6,
            noparams: false,
            transfer: None,
            emit_certificates: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QueryResult {
    pub index: usize,
    pub line: usize,
    pub query: String,
    pub status: Status,
    /// Status column of the text table and the report.
    pub label: &'static str,
    /// One line for the text table.
    pub summary: String,
    pub json: Value,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub results: Vec<QueryResult>,
    pub ring: Value,
}

impl Report {
    pub fn all_resolved(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Unknown)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": REPORT_SCHEMA,
            "ring": self.ring,
            "queries": self.results.iter().map(|r| r.json.clone()).collect::<Vec<_>>(),
        })
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(out, "{:>3}  {:<28} {:<20} {}", r.index, r.query, r.label, r.summary);
        }
        out
    }
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Member => "certified_member",
        Status::NonMember => "certified_non_member",
        Status::Unknown => "unknown",
    }
}

/// Verdict JSON; without `emit` the certificate body is replaced by its kind
/// and, for curve refutations, the witness summary.
pub fn verdict_json(v: &Verdict, reg: &VarRegistry, emit: bool) -> Value {
    let mut j = v.to_json(reg);
    if !emit {
        let kind = j["certificate"]["kind"].clone();
        let mut short = json!({ "kind": kind });
        if let Some(w) = v.witness() {
            short["witness"] = json!({
                "curve": w.curve.describe(reg),
                "gap": w.gap,
            });
        }
        j["certificate"] = short;
    }
    j
}

struct Context<'a> {
    pf: &'a ProblemFile,
    shift: Option<Assignment>,
}

impl Context<'_> {
    fn poly(&self, p: &Poly) -> Result<Poly> {
        match &self.shift {
            Some(a) => p.substitute(a),
            None => Ok(p.clone()),
        }
    }

    fn vector(&self, name: &str) -> Result<PolyVec> {
        match self.pf.object(name) {
            Some(Object::Vector(v)) => Ok(PolyVec(v.0.iter().map(|p| self.poly(p)).collect::<Result<_>>()?)),
            Some(Object::Poly(p)) => Ok(PolyVec(vec![self.poly(p)?])),
            _ => Err(Error::Precondition(format!("`{name}` is not a vector or polynomial"))),
        }
    }

    fn single(&self, name: &str) -> Result<Poly> {
        match self.pf.object(name) {
            Some(Object::Poly(p)) => self.poly(p),
            Some(Object::Vector(v)) if v.len() == 1 => self.poly(&v.0[0]),
            _ => Err(Error::Precondition(format!("`{name}` is not a polynomial"))),
        }
    }

    fn module(&self, name: &str) -> Result<GenMatrix> {
        match self.pf.object(name) {
            Some(Object::Module(m)) => m.map(|p| self.poly(p)),
            Some(Object::Ideal(i)) => self.ideal_of(i).map(|i| i.as_matrix()),
            _ => Err(Error::Precondition(format!("`{name}` is not a module or ideal"))),
        }
    }

    fn ideal_of(&self, i: &IdealGens) -> Result<IdealGens> {
        Ok(IdealGens::new(i.nvars, i.gens.iter().map(|p| self.poly(p)).collect::<Result<_>>()?))
    }

    fn ideal(&self, name: &str) -> Result<IdealGens> {
        match self.pf.object(name) {
            Some(Object::Ideal(i)) => self.ideal_of(i),
            _ => Err(Error::Precondition(format!("`{name}` is not an ideal"))),
        }
    }
}

fn need_container(q: &Query) -> Result<&str> {
    q.container
        .as_deref()
        .ok_or_else(|| Error::Precondition(format!("query `{}` needs `in <name>`", q.text())))
}

fn combined_status(vs: &[&Verdict]) -> Status {
    if vs.iter().any(|v| v.is_unknown()) {
        Status::Unknown
    } else {
        Status::Member
    }
}

pub fn run_query(pf: &ProblemFile, index: usize, q: &Query, defaults: &RunDefaults) -> Result<QueryResult> {
    let reg = &pf.reg;
    let shift = match &q.options.at {
        None => None,
        Some(pt) => {
            let nv = reg.len();
            let mut a = Assignment::identity(nv);
            for (i, c) in pt.iter().enumerate() {
                let z = reg.base(i);
                a.set(z, &Poly::var(nv, z) + &Poly::constant(nv, c.clone()))?;
            }
            Some(a)
        }
    };
    let ctx = Context { pf, shift };
    let budget = CurveBudget {
        max_exp: q.options.budget.unwrap_or(defaults.budget),
        max_terms: q.options.terms.unwrap_or(1),
        use_params: !(q.options.noparams || defaults.noparams),
        max_curves: None,
    };
    let transfer = match q.options.transfer.as_ref().or(defaults.transfer.as_ref()) {
        Some(Transfer::Named(n)) => Some(ctx.ideal(n)?),
        _ => None,
    };
    let arcs: Vec<CurvePair> = q
        .options
        .arcs
        .iter()
        .map(|n| match pf.object(n) {
            Some(Object::Arc(c)) => Ok(c.clone()),
            _ => Err(Error::Precondition(format!("`{n}` is not an arc"))),
        })
        .collect::<Result<_>>()?;
    let opts = SatOptions {
        budget: budget.clone(),
        curves: arcs,
        transfer,
        use_transfer: true,
    };
    let emit = defaults.emit_certificates;
    let vj = |v: &Verdict| verdict_json(v, reg, emit);

    let (status, summary, body) = match q.mode {
        Mode::Member => {
            let c = need_container(q)?;
            let v = match pf.object(c) {
                Some(Object::Ideal(_)) => exact_ideal_membership(&ctx.single(&q.target)?, &ctx.ideal(c)?)?,
                _ => exact_membership(&ctx.vector(&q.target)?, &ctx.module(c)?)?,
            };
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::Closure => {
            let c = need_container(q)?;
            let v = closure_membership(&ctx.vector(&q.target)?, &ctx.module(c)?, None, reg, &budget, &opts.curves, false)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::Monomial => {
            let c = need_container(q)?;
            let v = monomial_closure_membership(&ctx.single(&q.target)?, &ctx.ideal(c)?, reg)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::Ideal => {
            let c = need_container(q)?;
            let v = ideal_lipschitz_test(&ctx.single(&q.target)?, &ctx.ideal(c)?, reg, &opts)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::S1 => {
            let c = need_container(q)?;
            let v = s1_test(&ctx.vector(&q.target)?, &ctx.module(c)?, reg, &opts)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::S2 => {
            let c = need_container(q)?;
            let psi: Vec<PolyVec> = q.options.psi.iter().map(|n| ctx.vector(n)).collect::<Result<_>>()?;
            let v = s2_refuter(&ctx.vector(&q.target)?, &ctx.module(c)?, &psi, None, reg, &opts)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::S3 => {
            let c = need_container(q)?;
            let v = s3_test(&ctx.vector(&q.target)?, &ctx.module(c)?, reg, &opts)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
        Mode::Chain => {
            let c = need_container(q)?;
            let ch = run_chain(&ctx.vector(&q.target)?, &ctx.module(c)?, reg, &opts)?;
            let status = combined_status(&[&ch.s1, &ch.s2, &ch.s3]);
            let summary = format!(
                "s1 {} | s2 {} | s3 {}",
                status_name(ch.s1.status),
                status_name(ch.s2.status),
                status_name(ch.s3.status)
            );
            let body = json!({
                "s1": vj(&ch.s1),
                "s2": vj(&ch.s2),
                "s3": vj(&ch.s3),
                "transfer": ch.transfer.as_ref().map(|t| t.to_json(reg)),
                "violations": ch.violations,
                "consistent": ch.consistent(),
            });
            (status, summary, body)
        }
        Mode::Transfer => {
            let c = need_container(q)?;
            let (h, m) = (ctx.vector(&q.target)?, ctx.module(c)?);
            let s3 = s3_test(&h, &m, reg, &opts)?;
            if !s3.is_member() {
                let body = json!({ "s3": vj(&s3), "transfer": Value::Null });
                (Status::Unknown, "S3 not certified; transfer not applicable".into(), body)
            } else {
                let t = transfer_certify(&h, &m, &s3, opts.transfer.as_ref(), reg)?;
                let status = if t.certified() { Status::Member } else { Status::Unknown };
                let summary = if t.certified() {
                    "both hypotheses certified; S1 upgraded".to_string()
                } else {
                    format!(
                        "hypothesis 1 {}/{}",
                        t.hypothesis1.certified, t.hypothesis1.generators
                    )
                };
                (status, summary, json!({ "s3": vj(&s3), "transfer": t.to_json(reg) }))
            }
        }
        Mode::Ile => {
            let v = ile_family_test(&ctx.single(&q.target)?, reg, &opts)?;
            (v.status, brief(&v, reg), json!({ "verdict": vj(&v) }))
        }
    };
    // A chain mixes members and non-members, so it only reports whether all
    // three parts resolved.
    let label = match (q.mode, status) {
        (Mode::Chain, Status::Unknown) => "unknown",
        (Mode::Chain, _) => "resolved",
        _ => status_name(status),
    };
    let mut j = json!({
        "index": index,
        "line": q.line,
        "query": q.text(),
        "mode": q.mode.name(),
        "status": label,
        "budget": budget.max_exp,
    });
    if let Some(pt) = &q.options.at {
        j["at"] = json!(pt.iter().map(rational_text).collect::<Vec<_>>());
    }
    for (k, v) in body.as_object().unwrap() {
        j[k] = v.clone();
    }
    Ok(QueryResult {
        index,
        line: q.line,
        query: q.text(),
        status,
        label,
        summary,
        json: j,
    })
}

fn brief(v: &Verdict, reg: &VarRegistry) -> String {
    if let Some(w) = v.witness() {
        let mut s = format!("curve {} gap {} < {}", w.curve.describe(reg), w.gap.order, w.gap.required);
        if !v.side_conditions.is_empty() {
            let sc: Vec<String> = v
                .side_conditions
                .iter()
                .map(|c| format!("{} != 0", c.poly().to_string_with(reg)))
                .collect();
            let _ = write!(s, " if {}", sc.join(", "));
        }
        return s;
    }
    match &v.certificate {
        Certificate::Combination { .. } => "exact combination".into(),
        Certificate::Budget(b) => format!("no refutation among {} curves (E={})", b.curves_tried, b.max_exp),
        Certificate::Inherited { source, .. } => format!("from {source}"),
        Certificate::Hull(_) => "Newton polyhedron".into(),
        Certificate::Weights(_) => "separating weight".into(),
        Certificate::Minor { .. } => "rank jump".into(),
        Certificate::Remainder(_) => "nonzero normal form".into(),
        Certificate::Parts(p) => format!("{} parts", p.len()),
        _ => String::new(),
    }
}

/// Runs every query in parallel; results keep stanza order.
pub fn run_problem(pf: &ProblemFile, defaults: &RunDefaults) -> Result<Report> {
    let results: Vec<Result<QueryResult>> = pf
        .queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| run_query(pf, i, q, defaults))
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Report {
        results,
        ring: json!({
            "base": pf.ring.base,
            "params": pf.ring.params,
            "family": pf.ring.family,
            "curve": pf.reg.name(pf.reg.curve()),
        }),
    })
}

/// Doubled matrix of a named module, for inspection.
pub fn doubled(pf: &ProblemFile, name: &str) -> Result<crate::double::DoubledMatrix> {
    match pf.object(name) {
        Some(Object::Module(m)) => double_module(m, crate::double::Variant::B, &pf.reg),
        Some(o) => Err(Error::Precondition(format!("`{name}` is a {}", o.keyword()))),
        None => Err(Error::Precondition(format!("unknown name `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_fixtures() {
        for (name, n) in [("paper-example", 0), ("fr-family", 1), ("fr-family", 2), ("fr-family", 3)] {
            let text = fixture(name, n).unwrap();
            let pf = ProblemFile::parse(&text).unwrap();
            let printed = pf.print();
            let again = ProblemFile::parse(&printed).unwrap();
            assert_eq!(pf, again, "{printed}");
            assert_eq!(printed, again.print());
        }
    }

    #[test]
    fn fr_n1_formula() {
        let pf = ProblemFile::parse(&fixture("fr-family", 1).unwrap()).unwrap();
        let Some(Object::Poly(f)) = pf.object("F") else { panic!() };
        assert_eq!(f.to_string_with(&pf.reg), "-x*y*t^2 + 1/3*x^3 + y^3");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = ProblemFile::parse("ring x y\nvector h = (x, 3*q)\n").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column >= 16, "column {column}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ProblemFile::parse("ring x\nquery s1 h in M\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(ProblemFile::parse("ring x\nmodule M 1x2 = [x]\n").is_err());
        assert!(ProblemFile::parse("ring x\nvector h = (x)\nvector h = (x)\n").is_err());
        assert!(ProblemFile::parse("ring x\nvector h = (x)\nring y\n").is_err());
        assert!(ProblemFile::parse("ring x\nvector h = (x)\nquery s9 h\n").is_err());
    }

    #[test]
    fn spec_style_ring_line() {
        let pf = ProblemFile::parse("ring x y | params a b | family t\n").unwrap();
        assert_eq!(pf.ring.params, vec!["a", "b"]);
        assert_eq!(pf.reg.n_family(), 1);
        assert!(pf.queries.is_empty());
    }

    #[test]
    fn empty_problem_runs() {
        let pf = ProblemFile::parse("").unwrap();
        let r = run_problem(&pf, &RunDefaults::default()).unwrap();
        assert!(r.all_resolved());
        assert_eq!(r.to_json()["queries"], json!([]));
    }

    #[test]
    fn shifted_base_point() {
        let src = "ring x y\nideal I = <(x-1)^2, y^2>\npoly g = x - 1\nquery ideal g in I at=(1,0) budget=2\nquery member g in I\n";
        let pf = ProblemFile::parse(src).unwrap();
        let r = run_problem(&pf, &RunDefaults::default()).unwrap();
        assert_eq!(r.results[0].status, Status::NonMember);
        assert_eq!(r.results[1].status, Status::NonMember);
        assert_eq!(pf.print().lines().nth(3).unwrap(), "query ideal g in I budget=2 at=(1,0)");
    }

    #[test]
    fn fixtures_run() {
        let pf = ProblemFile::parse(&fixture("paper-example", 0).unwrap()).unwrap();
        let r = run_problem(&pf, &RunDefaults::default()).unwrap();
        let st: Vec<Status> = r.results.iter().map(|q| q.status).collect();
        assert_eq!(st[0], Status::Member);
        assert_eq!(st[1], Status::NonMember);
        let j = r.to_json();
        assert_eq!(j["schema"], REPORT_SCHEMA);
        assert_eq!(j["queries"][1]["verdict"]["certificate"]["kind"], "curve");
        for n in 1..=2 {
            let pf = ProblemFile::parse(&fixture("fr-family", n).unwrap()).unwrap();
            let r = run_problem(&pf, &RunDefaults::default()).unwrap();
            assert_eq!(r.results[0].status, Status::NonMember, "{}", r.table());
        }
        assert!(fixture("nope", 1).is_err());
    }
}
