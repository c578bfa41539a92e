//! Membership over the local ring of the curve parameter at the origin.
//!
//! Entries are polynomials in the curve parameter `t` and the generic
//! parameters. Elimination is fraction-free: a pivot `t^m·u` (with `u(0) ≠ 0`
//! as a polynomial in the parameters) clears its row and column through
//! `row ← u·row − w·pivot_row`, which are invertible over the local ring as
//! long as every `u(0)` is nonzero. Those `u(0)` become side conditions.

use crate::error::{Error, Result};
use crate::linalg::GenMatrix;
use crate::ring::{lowest_in, push_side_condition, Monomial, Order, Poly, PolyVec, SideCondition, Var, VarKind, VarRegistry};

use super::verdict::OrderGap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DvrOutcome {
    pub rank: usize,
    /// `m_1 ≤ m_2 ≤ …`: the pivot orders.
    pub invariant_orders: Vec<u32>,
    /// Present on membership: `unit · v = Σ c_j A_j`.
    pub certificate: Option<(Poly, Vec<Poly>)>,
    pub gap: Option<OrderGap>,
    pub side_conditions: Vec<SideCondition>,
}

impl DvrOutcome {
    pub fn is_member(&self) -> bool {
        self.gap.is_none()
    }
}

fn check_entries(f: &Poly, reg: &VarRegistry) -> Result<()> {
    for v in f.support() {
        if !matches!(reg.kind(v), VarKind::Curve | VarKind::Generic) {
            return Err(Error::Domain(format!(
                "local-ring membership on an entry containing `{}`",
                reg.name(v)
            )));
        }
    }
    Ok(())
}

/// `f / t^m`, exact by construction.
fn shift_down(f: &Poly, t: Var, m: u32) -> Poly {
    if m == 0 {
        return f.clone();
    }
    let tm = Monomial::var(f.nvars(), t, m as u16);
    Poly::from_terms(
        f.nvars(),
        f.terms().iter().map(|(mono, c)| (tm.quotient_of(mono), c.clone())),
    )
}

fn order_of(f: &Poly, t: Var) -> Option<u32> {
    lowest_in(f, t).order.finite()
}

pub fn dvr_membership(v: &PolyVec, a: &GenMatrix, reg: &VarRegistry) -> Result<DvrOutcome> {
    let (p, r) = (a.nrows(), a.ncols());
    if v.len() != p {
        return Err(Error::Shape(format!("vector of length {} against {} rows", v.len(), p)));
    }
    for f in v.entries().iter().chain(a.columns().iter().flat_map(|c| c.entries())) {
        check_entries(f, reg)?;
    }
    let t = reg.curve();
    let nv = reg.len();
    let mut m: Vec<Vec<Poly>> = (0..p).map(|i| a.row(i)).collect();
    let mut vv: Vec<Poly> = v.0.clone();
    let mut cops: Vec<Vec<Poly>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { Poly::one(nv) } else { Poly::zero(nv) }).collect())
        .collect();
    let mut orders = Vec::new();
    let mut units = Vec::new();
    let mut side = Vec::new();

    for s in 0..p.min(r) {
        let mut best: Option<(u32, usize, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(s) {
            for (j, e) in row.iter().enumerate().skip(s) {
                if let Some(o) = order_of(e, t) {
                    let key = (o, e.len(), i, j);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
        let Some((ord, _, pi, pj)) = best else { break };
        m.swap(s, pi);
        vv.swap(s, pi);
        for row in m.iter_mut() {
            row.swap(s, pj);
        }
        for row in cops.iter_mut() {
            row.swap(s, pj);
        }
        let u = shift_down(&m[s][s], t, ord);
        push_side_condition(&mut side, lowest_in(&u, t).leading.as_ref().unwrap());

        for j in s + 1..p {
            if m[j][s].is_zero() {
                continue;
            }
            let w = shift_down(&m[j][s], t, ord);
            for c in s..r {
                m[j][c] = &(&u * &m[j][c]) - &(&w * &m[s][c]);
            }
            vv[j] = &(&u * &vv[j]) - &(&w * &vv[s]);
        }
        for b in s + 1..r {
            if m[s][b].is_zero() {
                continue;
            }
            let w = shift_down(&m[s][b], t, ord);
            for row in m.iter_mut().skip(s) {
                row[b] = &(&u * &row[b]) - &(&w * &row[s]);
            }
            for row in cops.iter_mut() {
                row[b] = &(&u * &row[b]) - &(&w * &row[s]);
            }
        }
        orders.push(ord);
        units.push(u);
    }
    let rank = orders.len();

    let mut gap = None;
    for (i, vi) in vv.iter().enumerate() {
        let lo = lowest_in(vi, t);
        let required = if i < rank {
            Order::Finite(orders[i])
        } else {
            Order::Infinite
        };
        if lo.order < required {
            if let Some(lead) = &lo.leading {
                push_side_condition(&mut side, lead);
            }
            gap = Some(OrderGap {
                slot: i,
                order: lo.order,
                required,
            });
            break;
        }
    }

    let certificate = if gap.is_none() {
        let unit = units.iter().fold(Poly::one(nv), |acc, u| &acc * u);
        let y: Vec<Poly> = (0..r)
            .map(|i| {
                if i >= rank {
                    return Poly::zero(nv);
                }
                let others = units
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .fold(Poly::one(nv), |acc, (_, u)| &acc * u);
                &shift_down(&vv[i], t, orders[i]) * &others
            })
            .collect();
        let coeffs: Vec<Poly> = (0..r)
            .map(|row| {
                cops[row]
                    .iter()
                    .zip(&y)
                    .fold(Poly::zero(nv), |acc, (c, yi)| acc + c * yi)
            })
            .collect();
        Some((unit, coeffs))
    } else {
        None
    };

    Ok(DvrOutcome {
        rank,
        invariant_orders: orders,
        certificate,
        gap,
        side_conditions: side,
    })
}

/// Checks `unit · v = Σ c_j A_j` and that `unit` is a unit of the local ring.
pub fn check_local_certificate(v: &PolyVec, a: &GenMatrix, unit: &Poly, coeffs: &[Poly], reg: &VarRegistry) -> bool {
    if coeffs.len() != a.ncols() || lowest_in(unit, reg.curve()).order != Order::Finite(0) {
        return false;
    }
    a.combine(coeffs) == v.scale(unit)
}
