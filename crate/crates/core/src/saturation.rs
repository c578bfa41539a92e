//! The three Lipschitz saturations of a module, the ideal saturation test, the
//! transfer criterion that lifts an S3 certificate to S1, and the family
//! test for infinitesimal Lipschitz equisingularity.
//!
//! Every test is local at the origin. `Member` always rests on an exact
//! certificate (possibly inherited through `S1 ⊆ S2 ⊆ S3`), `NonMember` on a
//! re-runnable curve witness or a rank jump.

use rayon::prelude::*;

use crate::closure::{
    closure_membership, exact_ideal_membership, exact_membership, membership_with, search_refutation, Certificate,
    CurveBudget, CurvePair, GroebnerBasis, Status, Verdict,
};
use crate::double::{diagonal_ideal_power, double_ideal, double_module, double_vector, relative_double, Variant};
use crate::error::{Error, Result};
use crate::linalg::{
    all_cofactor_functionals, augment, generic_rank, minors_ideal, minors_with_indices, GenMatrix, IdealGens,
};
use crate::ring::{merge_side_conditions, Assignment, Poly, PolyVec, VarKind, VarRegistry};

#[derive(Clone, Debug, Default)]
pub struct SatOptions {
    pub budget: CurveBudget,
    /// Tried before the budgeted enumeration.
    pub curves: Vec<CurvePair>,
    /// Transfer ideal for the S3 to S1 upgrade; `None` means `I_Δ^{k−1}`.
    pub transfer: Option<IdealGens>,
    /// Whether S1 may be certified through the transfer criterion.
    pub use_transfer: bool,
}

impl SatOptions {
    pub fn with_budget(budget: CurveBudget) -> Self {
        SatOptions {
            budget,
            use_transfer: true,
            ..Default::default()
        }
    }
}

fn ideal_closure_problem(g: &Poly, ideal: &IdealGens, reg: &VarRegistry) -> Result<(PolyVec, crate::double::DoubledMatrix)> {
    let gd = double_vector(&PolyVec(vec![g.clone()]), reg)?;
    let id = double_ideal(ideal, reg)?;
    Ok((gd, id))
}

/// `g ∈ I_S` through `g_D ∈ closure(I_D)`.
pub fn ideal_lipschitz_test(g: &Poly, ideal: &IdealGens, reg: &VarRegistry, opts: &SatOptions) -> Result<Verdict> {
    let ideal = ideal.normalized();
    if g.is_zero() {
        return exact_ideal_membership(g, &ideal);
    }
    if ideal.is_empty() {
        let v = Verdict::non_member(Certificate::Remainder(PolyVec(vec![g.clone()])))
            .with_note("nonzero element against the zero ideal");
        return Ok(v);
    }
    let exact = exact_ideal_membership(g, &ideal)?;
    if exact.is_member() {
        return Ok(exact.with_note("member of the ideal itself"));
    }
    let (gd, id) = ideal_closure_problem(g, &ideal, reg)?;
    closure_membership(&gd, &id.matrix, Some(&id.tags), reg, &opts.budget, &opts.curves, false)
}

/// `h_D ∈ closure(M_D)`: exact membership, then curve refutation.
fn s1_direct(h: &PolyVec, m: &GenMatrix, reg: &VarRegistry, opts: &SatOptions) -> Result<Verdict> {
    let exact = exact_membership(h, m)?;
    if exact.is_member() {
        return Ok(exact.with_note("h lies in M"));
    }
    let hd = double_vector(h, reg)?;
    let md = double_module(m, Variant::B, reg)?;
    closure_membership(&hd, &md.matrix, Some(&md.tags), reg, &opts.budget, &opts.curves, false)
}

pub fn s1_test(h: &PolyVec, m: &GenMatrix, reg: &VarRegistry, opts: &SatOptions) -> Result<Verdict> {
    let direct = s1_direct(h, m, reg, opts)?;
    if !direct.is_unknown() || !opts.use_transfer {
        return Ok(direct);
    }
    let s3 = s3_test(h, m, reg, opts)?;
    if !s3.is_member() {
        return Ok(direct);
    }
    let report = transfer_certify(h, m, &s3, opts.transfer.as_ref(), reg)?;
    Ok(report.upgraded_s1().unwrap_or(direct))
}

/// Refutes S2 membership through the cofactor functionals of `[h, M]` and
/// any extra functionals; certifies only through S1 or `h ∈ M`.
pub fn s2_refuter(
    h: &PolyVec,
    m: &GenMatrix,
    extra_psi: &[PolyVec],
    s1: Option<&Verdict>,
    reg: &VarRegistry,
    opts: &SatOptions,
) -> Result<Verdict> {
    if let Some(psi) = extra_psi.iter().find(|psi| psi.len() != m.nrows()) {
        return Err(Error::Shape(format!(
            "functional of length {} against {} rows",
            psi.len(),
            m.nrows()
        )));
    }
    let k = generic_rank(m, reg).rank.max(1);
    let mut functionals: Vec<(String, PolyVec)> = all_cofactor_functionals(m, k)?
        .into_iter()
        .map(|(idx, psi)| {
            let label = format!(
                "psi I={:?} J={:?}",
                idx.rows.iter().map(|i| i + 1).collect::<Vec<_>>(),
                idx.cols.iter().map(|j| j + 1).collect::<Vec<_>>()
            );
            (label, psi)
        })
        .collect();
    for (i, psi) in extra_psi.iter().enumerate() {
        functionals.push((format!("psi user #{}", i + 1), psi.clone()));
    }
    let parts: Vec<(String, Verdict)> = functionals
        .par_iter()
        .map(|(label, psi)| {
            let g = psi.dot(h)?;
            let ideal = IdealGens::new(
                m.nvars(),
                m.columns().iter().map(|c| psi.dot(c)).collect::<Result<_>>()?,
            );
            let v = ideal_lipschitz_test(&g, &ideal, reg, opts)?;
            Ok((label.clone(), v))
        })
        .collect::<Result<_>>()?;
    if parts.iter().any(|(_, v)| v.is_non_member()) {
        let mut sc = Vec::new();
        for (_, v) in parts.iter().filter(|(_, v)| v.is_non_member()).take(1) {
            merge_side_conditions(&mut sc, &v.side_conditions);
        }
        return Ok(Verdict::non_member(Certificate::Parts(parts)).with_side_conditions(sc));
    }
    if let Some(s1) = s1.filter(|v| v.is_member()) {
        return Ok(Verdict::member(Certificate::Inherited {
            source: "s1".into(),
            detail: Box::new(s1.clone()),
        })
        .with_side_conditions(s1.side_conditions.clone()));
    }
    let exact = exact_membership(h, m)?;
    if exact.is_member() {
        return Ok(exact.with_note("h lies in M"));
    }
    Ok(Verdict::unknown(Certificate::Parts(parts)).with_note("no tested functional refutes; the definition quantifies over all functionals"))
}

pub fn s3_test(h: &PolyVec, m: &GenMatrix, reg: &VarRegistry, opts: &SatOptions) -> Result<Verdict> {
    let rank = generic_rank(m, reg);
    let k = rank.rank;
    let aug = augment(h, m)?;
    let arank = generic_rank(&aug, reg);
    if arank.rank > k {
        let (idx, value) = minors_with_indices(&aug, k + 1)?
            .into_iter()
            .find(|(_, d)| !d.is_zero())
            .expect("rank exceeds k");
        return Ok(Verdict::non_member(Certificate::Minor {
            rows: idx.rows,
            cols: idx.cols,
            value,
        })
        .with_side_conditions(arank.side_conditions)
        .with_note(format!(
            "[h, M] has generic rank {} > {}, so h is not in the integral closure of M",
            arank.rank, k
        )));
    }
    if k == 0 {
        return exact_membership(h, m);
    }
    let jm = minors_ideal(m, k)?.normalized();
    let jhm: Vec<(String, Poly)> = minors_with_indices(&aug, k)?
        .into_iter()
        .filter(|(idx, d)| idx.cols[0] == 0 && !d.is_zero())
        .map(|(idx, d)| {
            let label = format!(
                "minor I={:?} J={:?}",
                idx.rows.iter().map(|i| i + 1).collect::<Vec<_>>(),
                idx.cols.iter().map(|j| j + 1).collect::<Vec<_>>()
            );
            (label, d)
        })
        .collect();
    let jm_matrix = jm.as_matrix();
    let gb = GroebnerBasis::new(m.nvars(), 1, jm_matrix.columns(), true);
    let parts: Vec<(String, Verdict)> = jhm
        .par_iter()
        .map(|(label, c)| {
            let v = PolyVec(vec![c.clone()]);
            let exact = membership_with(&gb, &v, &jm_matrix);
            if exact.is_member() {
                return Ok((label.clone(), exact.with_note("exact member of J_k(M)")));
            }
            Ok((label.clone(), ideal_lipschitz_test(c, &jm, reg, opts)?))
        })
        .collect::<Result<_>>()?;
    let mut sc = rank.side_conditions.clone();
    let status = if parts.iter().any(|(_, v)| v.is_non_member()) {
        Status::NonMember
    } else if parts.iter().all(|(_, v)| v.is_member()) {
        Status::Member
    } else {
        Status::Unknown
    };
    for (_, v) in &parts {
        if v.status == status {
            merge_side_conditions(&mut sc, &v.side_conditions);
        }
    }
    let all_exact = parts.iter().all(|(_, v)| {
        v.is_member() && matches!(&v.certificate, Certificate::Combination { unit, .. } if unit.is_one())
    });
    let mut verdict = Verdict {
        status,
        certificate: Certificate::Parts(parts),
        side_conditions: sc,
        notes: vec![format!("generic rank k = {k}")],
    };
    if all_exact {
        verdict.notes.push("J_k(h,M) = J_k(M) as ideals".into());
    }
    Ok(verdict)
}

/// Transcript of the two hypothesis checks of the transfer criterion.
#[derive(Clone, Debug)]
pub struct TransferReport {
    pub k: usize,
    pub transfer: IdealGens,
    /// `I · J_2((J_k(M))_D) ⊆ J_2k(M_D)`, checked exactly.
    pub hypothesis1: HypothesisCheck,
    /// `J_2k(h_D, M_D) ⊆ I · J_2((J_k(h,M))_D)`, checked exactly when the
    /// first one holds.
    pub hypothesis2: Option<HypothesisCheck>,
    pub s3: Verdict,
}

#[derive(Clone, Debug)]
pub struct HypothesisCheck {
    pub generators: usize,
    pub certified: usize,
    /// First generator (as text) without an exact certificate.
    pub first_failure: Option<String>,
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        self.certified == self.generators
    }
}

impl TransferReport {
    pub fn certified(&self) -> bool {
        self.hypothesis1.holds() && self.hypothesis2.as_ref().is_some_and(HypothesisCheck::holds)
    }

    pub fn upgraded_s1(&self) -> Option<Verdict> {
        self.certified().then(|| {
            Verdict::member(Certificate::Inherited {
                source: "s3 via transfer criterion".into(),
                detail: Box::new(self.s3.clone()),
            })
            .with_side_conditions(self.s3.side_conditions.clone())
        })
    }

    pub fn to_json(&self, reg: &VarRegistry) -> serde_json::Value {
        let hyp = |h: &HypothesisCheck| {
            serde_json::json!({
                "generators": h.generators,
                "certified": h.certified,
                "holds": h.holds(),
                "first_failure": h.first_failure,
            })
        };
        serde_json::json!({
            "k": self.k,
            "transfer_ideal": self.transfer.to_strings(reg),
            "hypothesis1": hyp(&self.hypothesis1),
            "hypothesis2": self.hypothesis2.as_ref().map(hyp),
            "certified": self.certified(),
        })
    }
}

/// `J_2` of the double of an ideal.
fn j2_of_double(ideal: &IdealGens, reg: &VarRegistry) -> Result<IdealGens> {
    let d = double_ideal(&ideal.normalized(), reg)?;
    if d.matrix.ncols() < 2 {
        return Ok(IdealGens::new(reg.len(), vec![]));
    }
    Ok(minors_ideal(&d.matrix, 2)?.normalized())
}

fn check_inclusion(sub: &IdealGens, sup: &IdealGens, reg: &VarRegistry) -> HypothesisCheck {
    let sup = sup.normalized();
    let sub = sub.normalized();
    let gb = GroebnerBasis::new(reg.len(), 1, sup.as_matrix().columns(), false);
    let mut certified = 0;
    let mut first_failure = None;
    for g in &sub.gens {
        if gb.contains(&PolyVec(vec![g.clone()])) {
            certified += 1;
        } else if first_failure.is_none() {
            first_failure = Some(g.to_string_with(reg));
        }
    }
    HypothesisCheck {
        generators: sub.len(),
        certified,
        first_failure,
    }
}

pub fn transfer_certify(
    h: &PolyVec,
    m: &GenMatrix,
    s3: &Verdict,
    transfer: Option<&IdealGens>,
    reg: &VarRegistry,
) -> Result<TransferReport> {
    if !s3.is_member() {
        return Err(Error::Precondition("transfer criterion needs a certified S3 membership".into()));
    }
    let k = generic_rank(m, reg).rank;
    let transfer = match transfer {
        Some(i) => i.clone(),
        None => diagonal_ideal_power(reg, k.saturating_sub(1)),
    };
    let md = double_module(m, Variant::B, reg)?;
    let j2k_md = if 2 * k <= md.matrix.nrows().min(md.matrix.ncols()) {
        minors_ideal(&md.matrix, 2 * k)?
    } else {
        IdealGens::new(reg.len(), vec![])
    };
    let lhs1 = transfer.product(&j2_of_double(&minors_ideal(m, k)?, reg)?);
    let hypothesis1 = check_inclusion(&lhs1, &j2k_md, reg);
    let hypothesis2 = if hypothesis1.holds() {
        let hd = double_vector(h, reg)?;
        let aug = augment(&hd, &md.matrix)?;
        let lhs2 = if 2 * k <= aug.nrows().min(aug.ncols()) {
            minors_ideal(&aug, 2 * k)?
        } else {
            IdealGens::new(reg.len(), vec![])
        };
        let rhs2 = transfer.product(&j2_of_double(&minors_ideal(&augment(h, m)?, k)?, reg)?);
        Some(check_inclusion(&lhs2, &rhs2, reg))
    } else {
        None
    };
    Ok(TransferReport {
        k,
        transfer,
        hypothesis1,
        hypothesis2,
        s3: s3.clone(),
    })
}

/// Per-parameter outcomes of the family test.
pub fn ile_family_test(f: &Poly, reg: &VarRegistry, opts: &SatOptions) -> Result<Verdict> {
    let n = reg.len();
    let mut axis = Assignment::identity(n);
    for z in reg.base_vars() {
        axis.set(z, Poly::zero(n))?;
    }
    if !f.substitute(&axis)?.is_zero() {
        return Err(Error::Precondition("F must vanish on the parameter axis".into()));
    }
    if f.support().iter().any(|&v| !matches!(reg.kind(v), VarKind::Base | VarKind::Family)) {
        return Err(Error::Domain("F may only use base variables and family parameters".into()));
    }
    if reg.n_family() == 0 {
        return Err(Error::Precondition("the family test needs at least one family parameter".into()));
    }
    let jm = GenMatrix::from_rows(n, vec![reg.base_vars().map(|z| f.partial_derivative(z)).collect()])?;
    let family: Vec<_> = reg.family_vars().collect();
    let jmd = relative_double(&jm, &family, reg)?;
    let parts: Vec<(String, Verdict)> = family
        .iter()
        .map(|&y| {
            let h = PolyVec(vec![f.partial_derivative(y)]);
            let hd = double_vector(&h, reg)?;
            let exact = exact_membership(&hd, &jmd.matrix)?;
            let v = if exact.is_member() {
                exact
            } else {
                search_refutation(&hd, &jmd.matrix, Some(&jmd.tags), reg, &opts.budget, &opts.curves, false)?
            };
            Ok((format!("dF/d{}", reg.name(y)), v))
        })
        .collect::<Result<_>>()?;
    let status = if parts.iter().any(|(_, v)| v.is_non_member()) {
        Status::NonMember
    } else if parts.iter().all(|(_, v)| v.is_member()) {
        Status::Member
    } else {
        Status::Unknown
    };
    let mut sc = Vec::new();
    for (_, v) in parts.iter().filter(|(_, v)| v.status == status) {
        merge_side_conditions(&mut sc, &v.side_conditions);
    }
    Ok(Verdict {
        status,
        certificate: Certificate::Parts(parts),
        side_conditions: sc,
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub s1: Verdict,
    pub s2: Verdict,
    pub s3: Verdict,
    pub transfer: Option<TransferReport>,
    /// Violations of `S1 ⊆ S2 ⊆ S3` among the final verdicts.
    pub violations: Vec<String>,
}

impl ChainReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

fn inherit(target: &mut Verdict, source: &Verdict, name: &str) {
    if target.is_unknown() && !source.is_unknown() {
        *target = Verdict {
            status: source.status,
            certificate: Certificate::Inherited {
                source: name.into(),
                detail: Box::new(source.clone()),
            },
            side_conditions: source.side_conditions.clone(),
            notes: Vec::new(),
        };
    }
}

pub fn chain_violations(s1: &Verdict, s2: &Verdict, s3: &Verdict) -> Vec<String> {
    let mut out = Vec::new();
    let pairs = [(s1, s2, "S1", "S2"), (s2, s3, "S2", "S3"), (s1, s3, "S1", "S3")];
    for (small, big, a, b) in pairs {
        if small.is_member() && big.is_non_member() {
            out.push(format!("{a} Member but {b} NonMember"));
        }
    }
    out
}

/// All three tests with inheritance along `S1 ⊆ S2 ⊆ S3`: a Member passes
/// upward, a NonMember passes downward, and only `Unknown`s are replaced.
pub fn run_chain(h: &PolyVec, m: &GenMatrix, reg: &VarRegistry, opts: &SatOptions) -> Result<ChainReport> {
    let s3 = s3_test(h, m, reg, opts)?;
    let mut s1 = s1_direct(h, m, reg, opts)?;
    let mut transfer = None;
    if s1.is_unknown() && s3.is_member() && opts.use_transfer {
        let report = transfer_certify(h, m, &s3, opts.transfer.as_ref(), reg)?;
        if let Some(v) = report.upgraded_s1() {
            s1 = v;
        }
        transfer = Some(report);
    }
    let mut s2 = s2_refuter(h, m, &[], Some(&s1), reg, opts)?;
    let mut s3 = s3;
    if s3.is_non_member() {
        inherit(&mut s2, &s3.clone(), "s3");
    }
    if s2.is_non_member() {
        inherit(&mut s1, &s2.clone(), "s2");
    }
    if s2.is_member() {
        inherit(&mut s3, &s2.clone(), "s2");
    }
    if s1.is_member() {
        inherit(&mut s2, &s1.clone(), "s1");
        inherit(&mut s3, &s1.clone(), "s1");
    }
    let violations = chain_violations(&s1, &s2, &s3);
    Ok(ChainReport {
        s1,
        s2,
        s3,
        transfer,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{parse_poly, Order};

    fn reg() -> std::sync::Arc<VarRegistry> {
        VarRegistry::builder().base(&["x", "y"]).generic(&["a", "b"]).build().unwrap()
    }

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    fn example(reg: &VarRegistry) -> (PolyVec, GenMatrix) {
        let m = GenMatrix::from_rows(
            reg.len(),
            vec![
                vec![p("x", reg), p("0", reg), p("y", reg)],
                vec![p("y", reg), p("x", reg), p("0", reg)],
            ],
        )
        .unwrap();
        (PolyVec(vec![p("x", reg), p("3*y", reg)]), m)
    }

    fn opts(e: u32) -> SatOptions {
        SatOptions::with_budget(CurveBudget::with_max_exp(e))
    }

    #[test]
    fn ideal_test_examples() {
        let reg = reg();
        let i = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("y^2", &reg)]);
        assert!(ideal_lipschitz_test(&p("x^2 + y^2", &reg), &i, &reg, &opts(2)).unwrap().is_member());
        let v = ideal_lipschitz_test(&p("x", &reg), &i, &reg, &opts(2)).unwrap();
        assert!(v.is_non_member());
        let w = v.witness().unwrap();
        assert_eq!(w.gap.order, Order::Finite(1));
    }

    #[test]
    fn xy_against_squares_is_refuted_by_a_sign_pair() {
        let reg = reg();
        let i = IdealGens::new(reg.len(), vec![p("x^2", &reg), p("y^2", &reg)]);
        let v = ideal_lipschitz_test(&p("x*y", &reg), &i, &reg, &opts(6)).unwrap();
        assert!(v.is_non_member());
        let w = v.witness().unwrap();
        assert!(!w.curve.is_diagonal());
        let (gd, id) = ideal_closure_problem(&p("x*y", &reg), &i, &reg).unwrap();
        assert!(crate::closure::recheck_witness(&gd, &id.matrix, w, &reg).unwrap());
    }

    #[test]
    fn example_chain() {
        let reg = reg();
        let (h, m) = example(&reg);
        let chain = run_chain(&h, &m, &reg, &opts(1)).unwrap();
        assert!(chain.s3.is_member());
        assert!(chain.s3.notes.iter().any(|n| n.contains("J_k(h,M) = J_k(M)")));
        assert!(chain.s1.is_non_member());
        assert!(chain.s2.is_non_member());
        assert!(chain.consistent());
    }

    #[test]
    fn members_of_m_pass_everything() {
        let reg = reg();
        let (_, m) = example(&reg);
        let g1 = m.column(0).clone();
        let chain = run_chain(&g1, &m, &reg, &opts(1)).unwrap();
        assert!(chain.s1.is_member() && chain.s2.is_member() && chain.s3.is_member());
    }

    #[test]
    fn unit_vector_is_refuted_for_s3() {
        let reg = reg();
        let (_, m) = example(&reg);
        let e1 = PolyVec::unit(reg.len(), 2, 0);
        let v = s3_test(&e1, &m, &reg, &opts(2)).unwrap();
        assert!(v.is_non_member());
    }

    #[test]
    fn transfer_needs_s3() {
        let reg = reg();
        let (h, m) = example(&reg);
        let fake = Verdict::unknown(Certificate::None);
        assert!(matches!(transfer_certify(&h, &m, &fake, None, &reg), Err(Error::Precondition(_))));
    }

    #[test]
    fn family_test_trivial_family() {
        let reg = VarRegistry::builder().base(&["x"]).family(&["t"]).curve("s").build().unwrap();
        let v = ile_family_test(&p("x^2", &reg), &reg, &opts(2)).unwrap();
        assert!(v.is_member());
        assert!(ile_family_test(&p("x^2 + t", &reg), &reg, &opts(2)).is_err());
    }

    #[test]
    fn fr_family_gap() {
        for (n, want) in [(2u32, (14, 15)), (3, (23, 24))] {
            let reg = VarRegistry::builder().base(&["x", "y"]).family(&["t"]).curve("s").build().unwrap();
            let f = p(&format!("1/3*x^3 - t^2*x*y^{} + y^{}", 3 * n - 2, 3 * n), &reg);
            let xs = p(&format!("s^{}", 3 * n - 1), &reg);
            let curve = CurvePair::new(
                &reg,
                vec![xs.clone(), p("s^2", &reg)],
                vec![-xs, p("s^2", &reg)],
                vec![p("s", &reg)],
            )
            .unwrap();
            let mut o = opts(1);
            o.curves.push(curve.clone());
            let v = ile_family_test(&f, &reg, &o).unwrap();
            assert!(v.is_non_member());
            let w = v.witness().unwrap();
            assert_eq!(w.curve, curve);
            assert_eq!((w.gap.order.clone(), w.gap.required.clone()), (Order::Finite(want.0), Order::Finite(want.1)));
        }
    }
}
