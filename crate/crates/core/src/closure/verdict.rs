use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use super::curves::{CurveBudget, CurvePair};
use crate::ring::{Order, Poly, PolyVec, SideCondition, VarRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[serde(rename = "certified_member")]
    Member,
    #[serde(rename = "certified_non_member")]
    NonMember,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Member => "Member",
            Status::NonMember => "NonMember",
            Status::Unknown => "Unknown",
        })
    }
}

/// Coordinate (0-based, after the elimination's row permutation) where the
/// transformed vector is too small, with its order and the order required.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderGap {
    pub slot: usize,
    pub order: Order,
    pub required: Order,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveWitness {
    pub curve: CurvePair,
    pub gap: OrderGap,
    pub invariant_orders: Vec<u32>,
    /// Descriptions of generator columns that pull back to zero.
    pub vanishing_columns: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSummary {
    pub max_exp: u32,
    pub max_terms: u8,
    pub use_params: bool,
    pub curves_tried: usize,
    pub capped: bool,
}

impl SearchSummary {
    pub fn new(budget: &CurveBudget, curves_tried: usize, capped: bool) -> Self {
        SearchSummary {
            max_exp: budget.max_exp,
            max_terms: budget.max_terms,
            use_params: budget.use_params,
            curves_tried,
            capped,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// `unit · v = Σ coefficients_j · A_j`, with `unit = 1` for exact
    /// membership over the polynomial ring.
    Combination { coefficients: Vec<Poly>, unit: Poly },
    /// Nonzero normal form modulo a Gröbner basis.
    Remainder(PolyVec),
    Curve(Box<CurveWitness>),
    /// Convex weights on generator exponents dominated by the exponent of h.
    Hull(Vec<BigRational>),
    /// Weight vector `w ≥ 0` with `w·a < min_j w·g_j`.
    Weights(Vec<BigRational>),
    /// Nonzero minor of `[h, M]` exceeding the generic rank of `M`.
    Minor { rows: Vec<usize>, cols: Vec<usize>, value: Poly },
    Budget(SearchSummary),
    /// Verdict obtained from another test in the chain.
    Inherited { source: String, detail: Box<Verdict> },
    /// Per-part outcomes, e.g. one per generator or per functional.
    Parts(Vec<(String, Verdict)>),
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
    pub side_conditions: Vec<SideCondition>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn member(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Member,
            certificate,
            side_conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn non_member(certificate: Certificate) -> Self {
        Verdict {
            status: Status::NonMember,
            certificate,
            side_conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn unknown(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Unknown,
            certificate,
            side_conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_side_conditions(mut self, sc: Vec<SideCondition>) -> Self {
        crate::ring::merge_side_conditions(&mut self.side_conditions, &sc);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn is_member(&self) -> bool {
        self.status == Status::Member
    }

    pub fn is_non_member(&self) -> bool {
        self.status == Status::NonMember
    }

    pub fn is_unknown(&self) -> bool {
        self.status == Status::Unknown
    }

    /// The curve witness, searching inherited and per-part certificates.
    pub fn witness(&self) -> Option<&CurveWitness> {
        match &self.certificate {
            Certificate::Curve(w) => Some(w),
            Certificate::Inherited { detail, .. } => detail.witness(),
            Certificate::Parts(parts) => parts
                .iter()
                .filter(|(_, v)| v.status == self.status)
                .find_map(|(_, v)| v.witness()),
            _ => None,
        }
    }

    pub fn to_json(&self, reg: &VarRegistry) -> Value {
        let sc: Vec<String> = self
            .side_conditions
            .iter()
            .map(|s| s.poly().to_string_with(reg))
            .collect();
        let mut out = json!({
            "status": self.status,
            "certificate": certificate_json(&self.certificate, reg),
            "side_conditions": sc,
        });
        if !self.notes.is_empty() {
            out["notes"] = json!(self.notes);
        }
        out
    }
}

fn rat(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn certificate_json(c: &Certificate, reg: &VarRegistry) -> Value {
    let ps = |v: &[Poly]| -> Vec<String> { v.iter().map(|p| p.to_string_with(reg)).collect() };
    match c {
        Certificate::Combination { coefficients, unit } => json!({
            "kind": "combination",
            "coefficients": ps(coefficients),
            "unit": unit.to_string_with(reg),
        }),
        Certificate::Remainder(r) => json!({"kind": "remainder", "remainder": r.to_strings(reg)}),
        Certificate::Curve(w) => json!({
            "kind": "curve",
            "curve": w.curve.to_json(reg),
            "gap": w.gap,
            "invariant_orders": w.invariant_orders,
            "vanishing_columns": w.vanishing_columns,
        }),
        Certificate::Hull(l) => json!({"kind": "hull", "weights": l.iter().map(rat).collect::<Vec<_>>()}),
        Certificate::Weights(w) => json!({"kind": "weights", "weights": w.iter().map(rat).collect::<Vec<_>>()}),
        Certificate::Minor { rows, cols, value } => json!({
            "kind": "minor",
            "rows": rows.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "cols": cols.iter().map(|j| j + 1).collect::<Vec<_>>(),
            "value": value.to_string_with(reg),
        }),
        Certificate::Budget(s) => json!({"kind": "budget", "search": s}),
        Certificate::Inherited { source, detail } => json!({
            "kind": "inherited",
            "source": source,
            "detail": detail.to_json(reg),
        }),
        Certificate::Parts(parts) => json!({
            "kind": "parts",
            "parts": parts
                .iter()
                .map(|(label, v)| json!({"label": label, "verdict": v.to_json(reg)}))
                .collect::<Vec<_>>(),
        }),
        Certificate::None => json!({"kind": "none"}),
    }
}
