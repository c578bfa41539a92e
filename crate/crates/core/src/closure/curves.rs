//! Test arcs through the origin, pullbacks along them, and a deterministic
//! bounded enumeration of arc pairs.

use serde_json::{json, Value};

use crate::double::ColumnTag;
use crate::error::{Error, Result};
use crate::linalg::GenMatrix;
use crate::ring::{Assignment, Poly, PolyVec, VarKind, VarRegistry};

/// Pair of arcs `(φ₁, φ₂)` in the curve parameter, sharing the family
/// coordinates. Every coordinate vanishes at the curve parameter's origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePair {
    pub phi1: Vec<Poly>,
    pub phi2: Vec<Poly>,
    pub family: Vec<Poly>,
    pub label: Option<String>,
}

fn check_arc_coordinate(f: &Poly, reg: &VarRegistry) -> Result<()> {
    let t = reg.curve();
    for (m, _) in f.terms() {
        if m.exponent(t) == 0 {
            return Err(Error::Precondition(format!(
                "arc coordinate `{}` does not vanish at the origin",
                f.to_string_with(reg)
            )));
        }
        for v in m.support() {
            if !matches!(reg.kind(v), VarKind::Curve | VarKind::Generic) {
                return Err(Error::Domain(format!(
                    "arc coordinate `{}` uses `{}`",
                    f.to_string_with(reg),
                    reg.name(v)
                )));
            }
        }
    }
    Ok(())
}

impl CurvePair {
    pub fn new(reg: &VarRegistry, phi1: Vec<Poly>, phi2: Vec<Poly>, family: Vec<Poly>) -> Result<Self> {
        if phi1.len() != reg.n_base() || phi2.len() != reg.n_base() || family.len() != reg.n_family() {
            return Err(Error::Shape(format!(
                "arc pair needs {} base and {} family coordinates",
                reg.n_base(),
                reg.n_family()
            )));
        }
        for f in phi1.iter().chain(&phi2).chain(&family) {
            if f.nvars() != reg.len() {
                return Err(Error::RegistryMismatch("arc coordinate over another registry".into()));
            }
            check_arc_coordinate(f, reg)?;
        }
        Ok(CurvePair {
            phi1,
            phi2,
            family,
            label: None,
        })
    }

    pub fn diagonal(reg: &VarRegistry, phi: Vec<Poly>, family: Vec<Poly>) -> Result<Self> {
        Self::new(reg, phi.clone(), phi, family)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_diagonal(&self) -> bool {
        self.phi1 == self.phi2
    }

    /// `z ↦ φ₁`, `z' ↦ φ₂`, family coordinates shared, curve and generic
    /// parameters fixed.
    pub fn assignment(&self, reg: &VarRegistry) -> Assignment {
        let n = reg.len();
        let mut a = Assignment::new(n, n);
        for i in 0..reg.n_base() {
            a.set(reg.base(i), self.phi1[i].clone()).unwrap();
            a.set(reg.primed(i), self.phi2[i].clone()).unwrap();
        }
        for (i, f) in self.family.iter().enumerate() {
            a.set(reg.family(i), f.clone()).unwrap();
        }
        a.keep(reg.curve());
        for g in reg.generic_vars() {
            a.keep(g);
        }
        a
    }

    pub fn describe(&self, reg: &VarRegistry) -> String {
        let s = |v: &[Poly]| v.iter().map(|p| p.to_string_with(reg)).collect::<Vec<_>>().join(", ");
        let mut out = format!("({} | {})", s(&self.phi1), s(&self.phi2));
        if !self.family.is_empty() {
            out.push_str(&format!(" family ({})", s(&self.family)));
        }
        out
    }

    pub fn to_json(&self, reg: &VarRegistry) -> Value {
        let s = |v: &[Poly]| v.iter().map(|p| p.to_string_with(reg)).collect::<Vec<_>>();
        let mut out = json!({
            "phi1": s(&self.phi1),
            "phi2": s(&self.phi2),
            "text": self.describe(reg),
        });
        if !self.family.is_empty() {
            out["family"] = json!(s(&self.family));
        }
        if let Some(l) = &self.label {
            out["label"] = json!(l);
        }
        out
    }
}

/// Matrix over `Q[generic params][t]` obtained by pulling back along an arc
/// pair, with the provenance of each column when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniMatrix {
    pub matrix: GenMatrix,
    pub tags: Vec<Option<ColumnTag>>,
}

impl UniMatrix {
    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.matrix.ncols())
            .filter(|&j| self.matrix.column(j).is_zero())
            .collect()
    }
}

pub fn pullback_poly(f: &Poly, c: &CurvePair, reg: &VarRegistry) -> Result<Poly> {
    f.substitute(&c.assignment(reg))
}

pub fn pullback_vector(v: &PolyVec, c: &CurvePair, reg: &VarRegistry) -> Result<PolyVec> {
    v.substitute(&c.assignment(reg))
}

pub fn pullback_matrix(
    a: &GenMatrix,
    tags: Option<&[ColumnTag]>,
    c: &CurvePair,
    reg: &VarRegistry,
) -> Result<UniMatrix> {
    let asg = c.assignment(reg);
    let matrix = a.map(|f| f.substitute(&asg))?;
    let tags = match tags {
        Some(t) => t.iter().copied().map(Some).collect(),
        None => vec![None; a.ncols()],
    };
    Ok(UniMatrix { matrix, tags })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveBudget {
    /// Largest exponent of the curve parameter in any coordinate.
    pub max_exp: u32,
    /// Terms per coordinate, 1 or 2.
    pub max_terms: u8,
    pub use_params: bool,
    pub max_curves: Option<usize>,
}

impl Default for CurveBudget {
    fn default() -> Self {
        CurveBudget {
            max_exp: 6,
            max_terms: 1,
            use_params: true,
            max_curves: None,
        }
    }
}

impl CurveBudget {
    pub fn with_max_exp(max_exp: u32) -> Self {
        CurveBudget {
            max_exp,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    One,
    MinusOne,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coord {
    Zero,
    Mono(Sym, u32),
    Bin(Sym, u32, Sym, u32),
}

impl Coord {
    fn has_generic(&self) -> bool {
        matches!(self, Coord::Mono(Sym::Generic, _) | Coord::Bin(Sym::Generic, ..))
    }
}

/// Phases of the enumeration, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    /// `(φ, φ)` with the generic coefficient read as the first parameter.
    Diagonal,
    /// Same shape, generic coefficient read as the first parameter in `φ₁`
    /// and the second in `φ₂`.
    Params,
    /// `φ₂` is `φ₁` with a nonempty set of nonzero base coordinates negated.
    Signs,
    Done,
}

/// Lazy deterministic stream of arc pairs within a budget. Shapes are
/// enumerated in mixed radix with the first coordinate most significant.
pub struct CurveSearch<'a> {
    reg: &'a VarRegistry,
    opts: Vec<Coord>,
    ncoords: usize,
    total_shapes: u128,
    phase: Phase,
    shape: u128,
    mask: u64,
    diagonal_only: bool,
}

impl<'a> CurveSearch<'a> {
    pub fn new(reg: &'a VarRegistry, budget: &CurveBudget) -> Self {
        let mut syms = vec![Sym::One, Sym::MinusOne];
        if budget.use_params && reg.n_generic() > 0 {
            syms.push(Sym::Generic);
        }
        let mut opts = vec![Coord::Zero];
        for e in 1..=budget.max_exp.max(1) {
            for &s in &syms {
                opts.push(Coord::Mono(s, e));
            }
        }
        if budget.max_terms >= 2 {
            for e1 in 1..=budget.max_exp {
                for e2 in e1 + 1..=budget.max_exp {
                    for &s1 in &syms {
                        for s2 in [Sym::One, Sym::MinusOne] {
                            opts.push(Coord::Bin(s1, e1, s2, e2));
                        }
                    }
                }
            }
        }
        let ncoords = reg.n_base() + reg.n_family();
        let total_shapes = (opts.len() as u128).saturating_pow(ncoords as u32);
        CurveSearch {
            reg,
            opts,
            ncoords,
            total_shapes,
            phase: Phase::Diagonal,
            shape: 1,
            mask: 0,
            diagonal_only: false,
        }
    }

    /// Only the diagonal phase, for closure tests of undoubled modules.
    pub fn diagonal_only(mut self) -> Self {
        self.diagonal_only = true;
        self
    }

    fn decode(&self, mut idx: u128) -> Vec<Coord> {
        let k = self.opts.len() as u128;
        let mut out = vec![Coord::Zero; self.ncoords];
        for slot in (0..self.ncoords).rev() {
            out[slot] = self.opts[(idx % k) as usize];
            idx /= k;
        }
        out
    }

    fn realize(&self, c: Coord, generic: usize, negate: bool) -> Poly {
        let n = self.reg.len();
        let t = Poly::var(n, self.reg.curve());
        let sym = |s: Sym| match s {
            Sym::One => Poly::one(n),
            Sym::MinusOne => Poly::int(n, -1),
            Sym::Generic => Poly::var(n, self.reg.generic(generic.min(self.reg.n_generic() - 1))),
        };
        let p = match c {
            Coord::Zero => Poly::zero(n),
            Coord::Mono(s, e) => &sym(s) * &t.pow(e),
            Coord::Bin(s1, e1, s2, e2) => &(&sym(s1) * &t.pow(e1)) + &(&sym(s2) * &t.pow(e2)),
        };
        if negate {
            -p
        } else {
            p
        }
    }

    fn build(&self, shape: &[Coord], g1: usize, g2: usize, mask: u64) -> CurvePair {
        let nb = self.reg.n_base();
        let nonzero: Vec<usize> = (0..nb).filter(|&i| shape[i] != Coord::Zero).collect();
        let negated = |i: usize| {
            nonzero
                .iter()
                .position(|&j| j == i)
                .is_some_and(|bit| mask >> bit & 1 == 1)
        };
        let phi1 = (0..nb).map(|i| self.realize(shape[i], g1, false)).collect();
        let phi2 = (0..nb).map(|i| self.realize(shape[i], g2, negated(i))).collect();
        let family = (nb..self.ncoords).map(|i| self.realize(shape[i], 0, false)).collect();
        CurvePair {
            phi1,
            phi2,
            family,
            label: None,
        }
    }
}

impl Iterator for CurveSearch<'_> {
    type Item = CurvePair;

    fn next(&mut self) -> Option<CurvePair> {
        let nb = self.reg.n_base();
        loop {
            if self.shape >= self.total_shapes {
                self.phase = match self.phase {
                    Phase::Diagonal if self.diagonal_only => Phase::Done,
                    Phase::Diagonal => Phase::Params,
                    Phase::Params => Phase::Signs,
                    _ => Phase::Done,
                };
                self.shape = 1;
                self.mask = 0;
                if self.phase == Phase::Params && self.reg.n_generic() < 2 {
                    self.shape = self.total_shapes;
                    continue;
                }
            }
            if self.phase == Phase::Done || self.ncoords == 0 {
                return None;
            }
            let shape = self.decode(self.shape);
            match self.phase {
                Phase::Diagonal => {
                    self.shape += 1;
                    return Some(self.build(&shape, 0, 0, 0));
                }
                Phase::Params => {
                    self.shape += 1;
                    if shape[..nb].iter().any(Coord::has_generic)
                        && !shape[nb..].iter().any(Coord::has_generic)
                    {
                        return Some(self.build(&shape, 0, 1, 0));
                    }
                }
                Phase::Signs => {
                    let nz = shape[..nb].iter().filter(|c| **c != Coord::Zero).count();
                    self.mask += 1;
                    if self.mask >= 1u64 << nz {
                        self.mask = 0;
                        self.shape += 1;
                        continue;
                    }
                    return Some(self.build(&shape, 0, 0, self.mask));
                }
                Phase::Done => return None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::parse_poly;

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    #[test]
    fn rejects_arcs_off_origin() {
        let reg = VarRegistry::builder().base(&["x"]).build().unwrap();
        assert!(CurvePair::diagonal(&reg, vec![p("1 + t", &reg)], vec![]).is_err());
        assert!(CurvePair::diagonal(&reg, vec![p("t^2", &reg)], vec![]).is_ok());
        assert!(CurvePair::diagonal(&reg, vec![p("x*t", &reg)], vec![]).is_err());
    }

    #[test]
    fn pullback_of_example_vector() {
        let reg = VarRegistry::builder().base(&["x", "y"]).generic(&["a", "b"]).build().unwrap();
        let c = CurvePair::new(
            &reg,
            vec![p("t", &reg), p("a*t", &reg)],
            vec![p("t", &reg), p("b*t", &reg)],
            vec![],
        )
        .unwrap();
        let hd = PolyVec(vec![p("x", &reg), p("3*y", &reg), p("x'", &reg), p("3*y'", &reg)]);
        assert_eq!(
            pullback_vector(&hd, &c, &reg).unwrap().to_strings(&reg),
            vec!["t", "3*t*a", "t", "3*t*b"]
        );
    }

    #[test]
    fn search_contains_paper_witnesses() {
        let reg = VarRegistry::builder().base(&["x", "y"]).generic(&["a", "b"]).build().unwrap();
        let want = CurvePair::new(
            &reg,
            vec![p("t", &reg), p("a*t", &reg)],
            vec![p("t", &reg), p("b*t", &reg)],
            vec![],
        )
        .unwrap();
        let all: Vec<_> = CurveSearch::new(&reg, &CurveBudget::with_max_exp(1)).collect();
        assert!(all.contains(&want));
        let fr = VarRegistry::builder().base(&["x", "y"]).family(&["t"]).curve("s").build().unwrap();
        let want = CurvePair::new(
            &fr,
            vec![p("s^5", &fr), p("s^2", &fr)],
            vec![p("-s^5", &fr), p("s^2", &fr)],
            vec![p("s", &fr)],
        )
        .unwrap();
        assert!(CurveSearch::new(&fr, &CurveBudget::with_max_exp(5)).any(|c| c == want));
    }

    #[test]
    fn search_without_params_is_axis_arcs() {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let budget = CurveBudget {
            max_exp: 1,
            use_params: false,
            ..Default::default()
        };
        let diag: Vec<_> = CurveSearch::new(&reg, &budget).diagonal_only().collect();
        assert_eq!(diag.len(), 8);
        assert!(diag.iter().all(CurvePair::is_diagonal));
        let a: Vec<_> = CurveSearch::new(&reg, &budget).collect();
        let b: Vec<_> = CurveSearch::new(&reg, &budget).collect();
        assert_eq!(a, b);
    }
}
