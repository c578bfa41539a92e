//! Exact membership and integral-closure tests.
//!
//! Membership in a submodule of `Q[vars]^p` is decided exactly. Membership in
//! an integral closure is only semi-decided: a curve along which the pullback
//! of `v` fails to lie in the pullback of the module refutes it, and nothing
//! short of an exact certificate proves it.

mod curves;
mod dvr;
mod groebner;
mod newton;
mod verdict;

pub use curves::{pullback_matrix, pullback_poly, pullback_vector, CurveBudget, CurvePair, CurveSearch, UniMatrix};
pub use dvr::{check_local_certificate, dvr_membership, DvrOutcome};
pub use groebner::GroebnerBasis;
pub use newton::{feasible_point, hull_weights, monomial_closure_membership, separating_weight};
pub use verdict::{Certificate, CurveWitness, OrderGap, SearchSummary, Status, Verdict};

use rayon::prelude::*;

use crate::double::ColumnTag;
use crate::error::{Error, Result};
use crate::linalg::{GenMatrix, IdealGens};
use crate::ring::{Poly, PolyVec, VarRegistry};

/// `Σ coeffs_j · A_j == v`.
pub fn check_combination(v: &PolyVec, a: &GenMatrix, coeffs: &[Poly]) -> bool {
    coeffs.len() == a.ncols() && a.combine(coeffs) == *v
}

fn shape_check(v: &PolyVec, a: &GenMatrix) -> Result<()> {
    if v.len() != a.nrows() {
        return Err(Error::Shape(format!("vector of length {} against {} rows", v.len(), a.nrows())));
    }
    if v.entries().iter().any(|f| f.nvars() != a.nvars()) {
        return Err(Error::RegistryMismatch("vector and matrix use different registries".into()));
    }
    Ok(())
}

/// Exact membership over the polynomial ring, with a re-verified combination
/// on success.
pub fn exact_membership(v: &PolyVec, a: &GenMatrix) -> Result<Verdict> {
    shape_check(v, a)?;
    let nv = a.nvars();
    let unit = Poly::one(nv);
    if v.is_zero() {
        return Ok(Verdict::member(Certificate::Combination {
            coefficients: vec![Poly::zero(nv); a.ncols()],
            unit,
        }));
    }
    for (j, col) in a.columns().iter().enumerate() {
        if let Some(c) = scalar_multiple(v, col) {
            let mut coefficients = vec![Poly::zero(nv); a.ncols()];
            coefficients[j] = Poly::constant(nv, c);
            return Ok(Verdict::member(Certificate::Combination { coefficients, unit }));
        }
    }
    let gb = GroebnerBasis::new(nv, a.nrows(), a.columns(), true);
    Ok(membership_with(&gb, v, a))
}

/// Membership against a precomputed basis of the columns of `a`.
pub fn membership_with(gb: &GroebnerBasis, v: &PolyVec, a: &GenMatrix) -> Verdict {
    let (rem, coeffs) = gb.reduce(v);
    if rem.is_zero() {
        let coefficients = coeffs.expect("basis built with lift tracking");
        assert!(check_combination(v, a, &coefficients), "lift does not reproduce the vector");
        Verdict::member(Certificate::Combination {
            coefficients,
            unit: Poly::one(a.nvars()),
        })
    } else {
        Verdict::non_member(Certificate::Remainder(rem))
    }
}

fn scalar_multiple(v: &PolyVec, w: &PolyVec) -> Option<crate::ring::Coeff> {
    let mut ratio = None;
    for (a, b) in v.entries().iter().zip(w.entries()) {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return None,
            (false, false) => {
                let c = a.is_scalar_multiple_of(b)?;
                if ratio.as_ref().is_some_and(|r| *r != c) {
                    return None;
                }
                ratio = Some(c);
            }
        }
    }
    ratio
}

pub fn exact_ideal_membership(g: &Poly, ideal: &IdealGens) -> Result<Verdict> {
    exact_membership(&PolyVec(vec![g.clone()]), &ideal.as_matrix())
}

/// Whether every generator of `sub` lies in `sup`.
pub fn ideal_contains(sup: &IdealGens, sub: &IdealGens) -> bool {
    let gb = GroebnerBasis::new(sup.nvars, 1, sup.as_matrix().columns(), false);
    sub.gens.iter().all(|g| gb.contains(&PolyVec(vec![g.clone()])))
}

pub fn ideals_equal(a: &IdealGens, b: &IdealGens) -> bool {
    ideal_contains(a, b) && ideal_contains(b, a)
}

pub fn modules_equal(a: &GenMatrix, b: &GenMatrix) -> bool {
    let contains = |sup: &GenMatrix, sub: &GenMatrix| {
        let gb = GroebnerBasis::new(sup.nvars(), sup.nrows(), sup.columns(), false);
        sub.columns().iter().all(|c| gb.contains(c))
    };
    a.nrows() == b.nrows() && contains(a, b) && contains(b, a)
}

/// A generator of the ideal when it is principal over the polynomial ring: a
/// minimal Gröbner basis with a single element.
pub fn principal_generator(ideal: &IdealGens) -> Option<Poly> {
    let gb = GroebnerBasis::new(ideal.nvars, 1, ideal.as_matrix().columns(), false);
    match gb.basis().as_slice() {
        [g] => Some(g.0[0].clone()),
        _ => None,
    }
}

const BATCH: usize = 64;

fn evaluate_curve(
    v: &PolyVec,
    a: &GenMatrix,
    tags: Option<&[ColumnTag]>,
    curve: &CurvePair,
    reg: &VarRegistry,
) -> Result<Option<Verdict>> {
    let pv = pullback_vector(v, curve, reg)?;
    if pv.is_zero() {
        return Ok(None);
    }
    let pa = pullback_matrix(a, tags, curve, reg)?;
    let out = dvr_membership(&pv, &pa.matrix, reg)?;
    let Some(gap) = out.gap else { return Ok(None) };
    let vanishing_columns = pa
        .zero_columns()
        .into_iter()
        .map(|j| match pa.tags[j] {
            Some(tag) => tag.describe(reg),
            None => format!("column {}", j + 1),
        })
        .collect();
    let witness = CurveWitness {
        curve: curve.clone(),
        gap,
        invariant_orders: out.invariant_orders,
        vanishing_columns,
    };
    Ok(Some(
        Verdict::non_member(Certificate::Curve(Box::new(witness))).with_side_conditions(out.side_conditions),
    ))
}

/// Tries `extra` curves first, then the budgeted enumeration, and returns the
/// first refutation in that order or `Unknown`.
pub fn search_refutation(
    v: &PolyVec,
    a: &GenMatrix,
    tags: Option<&[ColumnTag]>,
    reg: &VarRegistry,
    budget: &CurveBudget,
    extra: &[CurvePair],
    diagonal_only: bool,
) -> Result<Verdict> {
    shape_check(v, a)?;
    let mut search = CurveSearch::new(reg, budget);
    if diagonal_only {
        search = search.diagonal_only();
    }
    let mut stream = extra.iter().cloned().chain(search);
    let cap = budget.max_curves.unwrap_or(usize::MAX);
    let mut tried = 0usize;
    loop {
        let take = BATCH.min(cap - tried);
        let batch: Vec<CurvePair> = stream.by_ref().take(take).collect();
        if batch.is_empty() {
            break;
        }
        tried += batch.len();
        let results: Vec<Result<Option<Verdict>>> = batch
            .par_iter()
            .map(|c| evaluate_curve(v, a, tags, c, reg))
            .collect();
        for r in results {
            if let Some(verdict) = r? {
                return Ok(verdict);
            }
        }
        if tried >= cap {
            return Ok(Verdict::unknown(Certificate::Budget(SearchSummary::new(budget, tried, true))));
        }
    }
    Ok(Verdict::unknown(Certificate::Budget(SearchSummary::new(budget, tried, false))))
}

/// `v ∈ closure of span(A)`: exact membership certifies, a curve refutes,
/// otherwise `Unknown`.
pub fn closure_membership(
    v: &PolyVec,
    a: &GenMatrix,
    tags: Option<&[ColumnTag]>,
    reg: &VarRegistry,
    budget: &CurveBudget,
    extra: &[CurvePair],
    diagonal_only: bool,
) -> Result<Verdict> {
    let exact = exact_membership(v, a)?;
    if exact.is_member() {
        return Ok(exact);
    }
    search_refutation(v, a, tags, reg, budget, extra, diagonal_only)
}

/// Re-runs a curve witness: the pullback of `v` must fail to lie in the
/// pullback of `a` with the recorded gap.
pub fn recheck_witness(v: &PolyVec, a: &GenMatrix, w: &CurveWitness, reg: &VarRegistry) -> Result<bool> {
    let pv = pullback_vector(v, &w.curve, reg)?;
    let pa = pullback_matrix(a, None, &w.curve, reg)?;
    let out = dvr_membership(&pv, &pa.matrix, reg)?;
    Ok(out.gap.as_ref() == Some(&w.gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double::{double_module, double_vector, Variant};
    use crate::ring::{parse_poly, Order};

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    #[test]
    fn exact_membership_examples() {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let i = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("x*y", &reg), p("y^2", &reg)]);
        let v = exact_ideal_membership(&p("x*y", &reg), &i).unwrap();
        match v.certificate {
            Certificate::Combination { coefficients, .. } => assert_eq!(
                coefficients,
                vec![Poly::zero(reg.len()), Poly::one(reg.len()), Poly::zero(reg.len())]
            ),
            c => panic!("{c:?}"),
        }
        let j = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("y^2", &reg)]);
        assert!(exact_ideal_membership(&p("x", &reg), &j).unwrap().is_non_member());
        let v = exact_ideal_membership(&p("x^3 + 2*x*y^2", &reg), &j).unwrap();
        if let Certificate::Combination { coefficients, .. } = &v.certificate {
            assert!(check_combination(&PolyVec(vec![p("x^3 + 2*x*y^2", &reg)]), &j.as_matrix(), coefficients));
        } else {
            panic!();
        }
    }

    #[test]
    fn principal_detection() {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let i = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("x^2 + x", &reg)]);
        assert_eq!(principal_generator(&i), Some(p("x", &reg)));
        let j = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("y^2", &reg)]);
        assert!(principal_generator(&j).is_none());
        assert!(ideals_equal(&i, &IdealGens::new(reg.len(), vec![p("x", &reg)])));
    }

    #[test]
    fn example_double_is_refuted_by_parameter_pair() {
        let reg = VarRegistry::builder().base(&["x", "y"]).generic(&["a", "b"]).build().unwrap();
        let m = GenMatrix::from_rows(
            reg.len(),
            vec![
                vec![p("x", &reg), p("0", &reg), p("y", &reg)],
                vec![p("y", &reg), p("x", &reg), p("0", &reg)],
            ],
        )
        .unwrap();
        let h = PolyVec(vec![p("x", &reg), p("3*y", &reg)]);
        let md = double_module(&m, Variant::B, &reg).unwrap();
        let hd = double_vector(&h, &reg).unwrap();
        let v = closure_membership(&hd, &md.matrix, Some(&md.tags), &reg, &CurveBudget::with_max_exp(1), &[], false)
            .unwrap();
        assert!(v.is_non_member());
        let w = v.witness().unwrap();
        assert_eq!(w.curve.describe(&reg), "(t, t*a | t, t*b)");
        assert_eq!(w.gap.order, Order::Finite(1));
        assert_eq!(w.gap.required, Order::Finite(2));
        assert!(v
            .side_conditions
            .iter()
            .any(|s| p("a - b", &reg).is_scalar_multiple_of(s.poly()).is_some()
                || s.poly().div_exact(&p("a - b", &reg)).is_some()));
        assert!(recheck_witness(&hd, &md.matrix, w, &reg).unwrap());
        assert_eq!(w.vanishing_columns.len(), 3);
    }
}
