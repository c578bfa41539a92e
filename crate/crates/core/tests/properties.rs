//! Randomized invariants across the library.

use std::sync::Arc;

use lipsat_core::closure::{
    check_combination, dvr_membership, exact_membership, monomial_closure_membership, pullback_matrix, pullback_vector,
    Certificate, CurvePair, Status,
};
use lipsat_core::double::{double_module, double_vector, Variant};
use lipsat_core::linalg::{det_bareiss, determinant, GenMatrix, IdealGens};
use lipsat_core::ring::{t_order, Assignment, Coeff, Monomial, Order, Poly, PolyVec, VarRegistry};
use proptest::prelude::*;

fn xyz() -> Arc<VarRegistry> {
    VarRegistry::builder().base(&["x", "y", "z"]).build().unwrap()
}

/// Curve parameter `t` plus generic parameters `a`, `b`.
fn curve_ring() -> Arc<VarRegistry> {
    VarRegistry::builder().base(&["x"]).generic(&["a", "b"]).build().unwrap()
}

type Terms = Vec<(Vec<u16>, i64)>;

fn terms(n: usize, max_exp: u16, max_terms: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, n), -4i64..=4), 0..=max_terms)
}

/// Builds a polynomial whose exponents sit in the slots `vars`.
fn poly_on(nv: usize, vars: &[usize], t: &Terms) -> Poly {
    Poly::from_terms(
        nv,
        t.iter().map(|(e, c)| {
            let mut full = vec![0u16; nv];
            for (slot, &x) in vars.iter().zip(e) {
                full[*slot] = x;
            }
            (Monomial::from_exponents(&full), Coeff::from_integer((*c).into()))
        }),
    )
}

fn base_poly(reg: &VarRegistry, t: &Terms) -> Poly {
    let slots: Vec<usize> = reg.base_vars().map(|v| v.0).collect();
    poly_on(reg.len(), &slots, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in terms(3, 3, 4), b in terms(3, 3, 4), c in terms(3, 3, 4)) {
        let reg = xyz();
        let (f, g, h) = (base_poly(&reg, &a), base_poly(&reg, &b), base_poly(&reg, &c));
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert!((&f - &f).is_zero());
        prop_assert_eq!(&f * &Poly::one(reg.len()), f.clone());
    }

    #[test]
    fn substitution_is_a_homomorphism(a in terms(3, 3, 4), b in terms(3, 3, 4), images in prop::collection::vec(terms(3, 2, 3), 3)) {
        let reg = xyz();
        let (f, g) = (base_poly(&reg, &a), base_poly(&reg, &b));
        let mut asg = Assignment::identity(reg.len());
        for (v, img) in reg.base_vars().zip(&images) {
            asg.set(v, base_poly(&reg, img)).unwrap();
        }
        let s = |p: &Poly| p.substitute(&asg).unwrap();
        prop_assert_eq!(s(&(&f * &g)), &s(&f) * &s(&g));
        prop_assert_eq!(s(&(&f + &g)), &s(&f) + &s(&g));
    }

    #[test]
    fn leibniz_rule(a in terms(3, 4, 4), b in terms(3, 4, 4), var in 0usize..3) {
        let reg = xyz();
        let (f, g) = (base_poly(&reg, &a), base_poly(&reg, &b));
        let v = reg.base(var);
        let lhs = (&f * &g).partial_derivative(v);
        let rhs = &(&f.partial_derivative(v) * &g) + &(&f * &g.partial_derivative(v));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn t_order_is_additive(a in terms(3, 4, 4), b in terms(3, 4, 4)) {
        let reg = curve_ring();
        let slots = [reg.curve().0, reg.generic(0).0, reg.generic(1).0];
        let (f, g) = (poly_on(reg.len(), &slots, &a), poly_on(reg.len(), &slots, &b));
        let (of, og) = (t_order(&f, &reg).unwrap(), t_order(&g, &reg).unwrap());
        let ofg = t_order(&(&f * &g), &reg).unwrap();
        match (of.order, og.order) {
            (Order::Finite(x), Order::Finite(y)) => {
                prop_assert_eq!(ofg.order, Order::Finite(x + y));
                prop_assert_eq!(ofg.leading.unwrap(), &of.leading.unwrap() * &og.leading.unwrap());
            }
            _ => prop_assert_eq!(ofg.order, Order::Infinite),
        }
    }

    #[test]
    fn determinant_is_multilinear_and_alternating(
        cols in prop::collection::vec(prop::collection::vec(terms(2, 2, 2), 3), 3),
        extra in prop::collection::vec(terms(2, 2, 2), 3),
        scale in terms(2, 1, 2),
    ) {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let nv = reg.len();
        let to_cols = |cs: &[Vec<Poly>]| GenMatrix::from_columns(nv, 3, cs.iter().map(|c| PolyVec(c.clone())).collect()).unwrap();
        let base: Vec<Vec<Poly>> = cols.iter().map(|c| c.iter().map(|t| base_poly(&reg, t)).collect()).collect();
        let w: Vec<Poly> = extra.iter().map(|t| base_poly(&reg, t)).collect();
        let lambda = base_poly(&reg, &scale);
        let d = determinant(&to_cols(&base)).unwrap();

        let mut mixed = base.clone();
        mixed[1] = base[1].iter().zip(&w).map(|(u, v)| &(&lambda * u) + v).collect();
        let mut only_w = base.clone();
        only_w[1] = w.clone();
        let lhs = determinant(&to_cols(&mixed)).unwrap();
        let rhs = &(&lambda * &d) + &determinant(&to_cols(&only_w)).unwrap();
        prop_assert_eq!(lhs, rhs);

        let mut swapped = base.clone();
        swapped.swap(0, 2);
        prop_assert_eq!(determinant(&to_cols(&swapped)).unwrap(), -&d);

        let mut repeated = base.clone();
        repeated[2] = repeated[0].clone();
        prop_assert!(determinant(&to_cols(&repeated)).unwrap().is_zero());

        let rows: Vec<Vec<Poly>> = (0..3).map(|i| (0..3).map(|j| base[j][i].clone()).collect()).collect();
        prop_assert_eq!(det_bareiss(rows, nv), d);
    }

    #[test]
    fn exact_membership_certificates_recheck(cols in prop::collection::vec(prop::collection::vec(terms(2, 2, 2), 2), 1..=3), coeffs in prop::collection::vec(terms(2, 1, 2), 3), noise in prop::collection::vec(terms(2, 2, 1), 2)) {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let nv = reg.len();
        let a = GenMatrix::from_columns(nv, 2, cols.iter().map(|c| PolyVec(c.iter().map(|t| base_poly(&reg, t)).collect())).collect()).unwrap();
        let c: Vec<Poly> = coeffs.iter().take(a.ncols()).map(|t| base_poly(&reg, t)).collect();
        let inside = a.combine(&c);
        let v = exact_membership(&inside, &a).unwrap();
        prop_assert_eq!(v.status, Status::Member);
        let Certificate::Combination { coefficients, unit } = &v.certificate else { panic!("member without combination") };
        prop_assert!(unit.is_one());
        prop_assert!(check_combination(&inside, &a, coefficients));

        let other = PolyVec(noise.iter().map(|t| base_poly(&reg, t)).collect());
        let v = exact_membership(&other, &a).unwrap();
        if let Certificate::Combination { coefficients, .. } = &v.certificate {
            prop_assert!(check_combination(&other, &a, coefficients));
        } else {
            prop_assert_eq!(v.status, Status::NonMember);
        }
    }
}

// ---------------------------------------------------------------------------
// Local-ring membership along curves.

fn curve_poly(reg: &VarRegistry, t: &Terms) -> Poly {
    let slots = [reg.curve().0, reg.generic(0).0];
    poly_on(reg.len(), &slots, t)
}

fn curve_matrix(reg: &VarRegistry, entries: &[Vec<Terms>]) -> GenMatrix {
    let rows = entries.iter().map(|r| r.iter().map(|t| curve_poly(reg, t)).collect()).collect();
    GenMatrix::from_rows(reg.len(), rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dvr_verdict_survives_unimodular_moves(
        entries in prop::collection::vec(prop::collection::vec(terms(2, 3, 2), 2), 2),
        v in prop::collection::vec(terms(2, 3, 2), 2),
        mult in terms(2, 2, 2),
    ) {
        let reg = curve_ring();
        let nv = reg.len();
        let a = curve_matrix(&reg, &entries);
        let h = PolyVec(v.iter().map(|t| curve_poly(&reg, t)).collect());
        let base = dvr_membership(&h, &a, &reg).unwrap();

        // Column 0 += mult · column 1, then swap, then scale column 1 by 3.
        let m = curve_poly(&reg, &mult);
        let c0 = PolyVec(a.column(0).entries().iter().zip(a.column(1).entries()).map(|(x, y)| x + &(&m * y)).collect());
        let c1 = PolyVec(a.column(1).entries().iter().map(|x| x.scale(&Coeff::from_integer(3.into()))).collect());
        let moved = GenMatrix::from_columns(nv, 2, vec![c1, c0]).unwrap();
        prop_assert_eq!(dvr_membership(&h, &moved, &reg).unwrap().is_member(), base.is_member());

        // A unit of the local ring: 1 + t.
        let unit = &Poly::one(nv) + &Poly::var(nv, reg.curve());
        let scaled = PolyVec(h.entries().iter().map(|x| &unit * x).collect());
        prop_assert_eq!(dvr_membership(&scaled, &a, &reg).unwrap().is_member(), base.is_member());
    }

    /// A curve refuting `h ∈ M̄` also refutes `h_D ∈ (M_D)‾` along the
    /// diagonal curve, and exact membership survives every pullback.
    #[test]
    fn doubling_keeps_refutations(
        entries in prop::collection::vec(prop::collection::vec(terms(2, 2, 2), 2), 2),
        v in prop::collection::vec(terms(2, 2, 2), 2),
        ex in (1u32..=3, 1u32..=3),
        slope in 1i64..=3,
    ) {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let nv = reg.len();
        let rows = entries.iter().map(|r| r.iter().map(|t| base_poly(&reg, t)).collect()).collect();
        let m = GenMatrix::from_rows(nv, rows).unwrap();
        let h = PolyVec(v.iter().map(|t| base_poly(&reg, t)).collect());
        let t = Poly::var(nv, reg.curve());
        let phi = vec![t.pow(ex.0), t.pow(ex.1).scale(&Coeff::from_integer(slope.into()))];
        let single = CurvePair::diagonal(&reg, phi.clone(), vec![]).unwrap();
        let hv = pullback_vector(&h, &single, &reg).unwrap();
        let mv = pullback_matrix(&m, None, &single, &reg).unwrap().matrix;
        let verdict = dvr_membership(&hv, &mv, &reg).unwrap();

        let md = double_module(&m, Variant::B, &reg).unwrap();
        let hd = double_vector(&h, &reg).unwrap();
        let hdv = pullback_vector(&hd, &single, &reg).unwrap();
        let mdv = pullback_matrix(&md.matrix, None, &single, &reg).unwrap().matrix;
        let doubled = dvr_membership(&hdv, &mdv, &reg).unwrap();
        if !verdict.is_member() {
            prop_assert!(!doubled.is_member());
        }
        if exact_membership(&h, &m).unwrap().is_member() {
            prop_assert!(verdict.is_member());
        }
    }
}

// ---------------------------------------------------------------------------
// Monomial closure against weighted arcs.

fn monomial(reg: &VarRegistry, e: &[u16]) -> Poly {
    let mut full = vec![0u16; reg.len()];
    for (v, &x) in reg.base_vars().zip(e) {
        full[v.0] = x;
    }
    Poly::from_terms(reg.len(), [(Monomial::from_exponents(&full), Coeff::from_integer(1.into()))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn monomial_closure_matches_arcs(gens in prop::collection::vec(prop::collection::vec(0u16..=4, 3), 1..=3), a in prop::collection::vec(0u16..=5, 3)) {
        let gens: Vec<Vec<u16>> = gens.into_iter().filter(|g| g.iter().any(|&e| e > 0)).collect();
        prop_assume!(!gens.is_empty());
        let reg = xyz();
        let ideal = IdealGens::new(reg.len(), gens.iter().map(|g| monomial(&reg, g)).collect());
        let lib = monomial_closure_membership(&monomial(&reg, &a), &ideal, &reg).unwrap().is_member();
        // Facet normals of the Newton polyhedron have entries at most 2·4².
        let dot = |w: &[u32], e: &[u16]| -> u32 { w.iter().zip(e).map(|(w, e)| w * *e as u32).sum() };
        let mut member = true;
        'outer: for w0 in 0..=32u32 {
            for w1 in 0..=32u32 {
                for w2 in 0..=32u32 {
                    let w = [w0, w1, w2];
                    if w == [0, 0, 0] {
                        continue;
                    }
                    if dot(&w, &a) < gens.iter().map(|g| dot(&w, g)).min().unwrap() {
                        member = false;
                        break 'outer;
                    }
                }
            }
        }
        prop_assert_eq!(lib, member);
    }
}

// ---------------------------------------------------------------------------
// Saturation chain on random small modules.

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chain_respects_inclusions(
        entries in prop::collection::vec(prop::collection::vec(terms(2, 2, 2), 2), 2),
        coeffs in prop::collection::vec(terms(2, 1, 2), 2),
        inside in any::<bool>(),
        noise in prop::collection::vec(terms(2, 2, 2), 2),
    ) {
        use lipsat_core::closure::CurveBudget;
        use lipsat_core::saturation::{run_chain, SatOptions};
        let reg = VarRegistry::builder().base(&["x", "y"]).generic(&["a", "b"]).build().unwrap();
        let nv = reg.len();
        let rows = entries.iter().map(|r| r.iter().map(|t| base_poly(&reg, t)).collect()).collect();
        let m = GenMatrix::from_rows(nv, rows).unwrap();
        let h = if inside {
            m.combine(&coeffs.iter().map(|t| base_poly(&reg, t)).collect::<Vec<_>>())
        } else {
            PolyVec(noise.iter().map(|t| base_poly(&reg, t)).collect())
        };
        let ch = run_chain(&h, &m, &reg, &SatOptions::with_budget(CurveBudget::with_max_exp(2))).unwrap();
        prop_assert!(ch.consistent(), "{:?}", ch.violations);
        if inside {
            for v in [&ch.s1, &ch.s2, &ch.s3] {
                prop_assert_eq!(v.status, Status::Member);
            }
        }
    }
}
