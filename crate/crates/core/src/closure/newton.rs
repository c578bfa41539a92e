//! Integral closure of monomial ideals: `x^a ∈ Ī` iff `a` lies in the convex
//! hull of the generator exponents plus the positive orthant.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::verdict::{Certificate, Verdict};
use crate::error::{Error, Result};
use crate::linalg::IdealGens;
use crate::ring::{Poly, VarRegistry};

type Q = BigRational;

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Phase-one simplex with Bland's rule: a point `x ≥ 0` with `A x = b`, or
/// `None` if there is none.
pub fn feasible_point(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = a[i].iter().map(|x| if flip { -x.clone() } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut obj: Vec<Q> = vec![Q::zero(); width];
    for row in &tab {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(Q, usize, usize)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((r, _, bi)) => ratio < *r || (ratio == *r && basis[i] < *bi),
                };
                if better {
                    leave = Some((ratio, i, basis[i]));
                }
            }
        }
        let Some((_, li, _)) = leave else { break };
        let piv = tab[li][enter].clone();
        for x in tab[li].iter_mut() {
            *x = &*x / &piv;
        }
        let prow = tab[li].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != li && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
        }
        let f = obj[enter].clone();
        for (x, p) in obj.iter_mut().zip(&prow) {
            *x -= &f * p;
        }
        basis[li] = enter;
    }
    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][width - 1].clone();
        }
    }
    Some(x)
}

fn exponents(f: &Poly, reg: &VarRegistry) -> Result<Vec<u16>> {
    if !f.is_monomial() {
        return Err(Error::Domain(format!("`{}` is not a monomial", f.to_string_with(reg))));
    }
    let (m, _) = &f.terms()[0];
    Ok(m.exponents().to_vec())
}

/// Convex weights `λ` with `Σ λ_j g_j ≤ a`, if any.
pub fn hull_weights(a: &[u16], gens: &[Vec<u16>]) -> Option<Vec<Q>> {
    let n = a.len();
    let m = gens.len();
    let mut rows = Vec::with_capacity(n + 1);
    let mut rhs = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut row: Vec<Q> = gens.iter().map(|g| qi(g[i] as i64)).collect();
        row.extend((0..n).map(|k| if k == i { Q::one() } else { Q::zero() }));
        rows.push(row);
        rhs.push(qi(a[i] as i64));
    }
    let mut last: Vec<Q> = vec![Q::one(); m];
    last.extend(vec![Q::zero(); n]);
    rows.push(last);
    rhs.push(Q::one());
    feasible_point(&rows, &rhs).map(|x| x[..m].to_vec())
}

/// Weight `w ≥ 0` with `w·a < min_j w·g_j`, if any.
pub fn separating_weight(a: &[u16], gens: &[Vec<u16>]) -> Option<Vec<Q>> {
    let n = a.len();
    let m = gens.len();
    // Columns: w (n), z+, z-, slack per generator (m), slack q.
    let width = n + 2 + m + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (j, g) in gens.iter().enumerate() {
        let mut row = vec![Q::zero(); width];
        for i in 0..n {
            row[i] = qi(g[i] as i64);
        }
        row[n] = qi(-1);
        row[n + 1] = qi(1);
        row[n + 2 + j] = qi(-1);
        rows.push(row);
        rhs.push(Q::zero());
    }
    let mut row = vec![Q::zero(); width];
    for i in 0..n {
        row[i] = -qi(a[i] as i64);
    }
    row[n] = qi(1);
    row[n + 1] = qi(-1);
    row[width - 1] = qi(-1);
    rows.push(row);
    rhs.push(Q::one());
    feasible_point(&rows, &rhs).map(|x| x[..n].to_vec())
}

pub fn monomial_closure_membership(h: &Poly, ideal: &IdealGens, reg: &VarRegistry) -> Result<Verdict> {
    let a = exponents(h, reg)?;
    let gens: Vec<Vec<u16>> = ideal
        .gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| exponents(g, reg))
        .collect::<Result<_>>()?;
    if gens.is_empty() {
        return Ok(Verdict::non_member(Certificate::Weights(vec![Q::zero(); a.len()]))
            .with_note("the zero ideal is integrally closed"));
    }
    if let Some(l) = hull_weights(&a, &gens) {
        return Ok(Verdict::member(Certificate::Hull(l)));
    }
    let w = separating_weight(&a, &gens).expect("Farkas alternative");
    Ok(Verdict::non_member(Certificate::Weights(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::verdict::Status;
    use crate::ring::parse_poly;

    #[test]
    fn simplex_basics() {
        let a = vec![vec![qi(1), qi(1)]];
        assert!(feasible_point(&a, &[qi(3)]).is_some());
        assert!(feasible_point(&a, &[qi(-3)]).is_none());
        let a = vec![vec![qi(1), qi(-1)], vec![qi(1), qi(1)]];
        let x = feasible_point(&a, &[qi(1), qi(3)]).unwrap();
        assert_eq!(x, vec![qi(2), qi(1)]);
    }

    #[test]
    fn examples() {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let p = |s: &str| parse_poly(s, &reg).unwrap();
        let i = IdealGens::new(reg.len(), vec![p("x^2"), p("y^2")]);
        let v = monomial_closure_membership(&p("x*y"), &i, &reg).unwrap();
        assert_eq!(v.status, Status::Member);
        assert_eq!(v.certificate, Certificate::Hull(vec![Q::new(1.into(), 2.into()); 2]));
        let v = monomial_closure_membership(&p("x"), &i, &reg).unwrap();
        assert_eq!(v.status, Status::NonMember);
        if let Certificate::Weights(w) = &v.certificate {
            let dot = |e: &[i64]| w[0].clone() * qi(e[0]) + w[1].clone() * qi(e[1]);
            assert!(dot(&[1, 0]) < dot(&[2, 0]) && dot(&[1, 0]) < dot(&[0, 2]));
        } else {
            panic!();
        }
        for g in &i.gens {
            assert!(monomial_closure_membership(g, &i, &reg).unwrap().is_member());
        }
        assert!(monomial_closure_membership(&p("x + y"), &i, &reg).is_err());
    }
}
