//! Exact multivariate polynomial arithmetic over the rationals.

mod monomial;
mod parse;
mod poly;
mod registry;

pub use monomial::Monomial;
pub use parse::{parse_error_offset, parse_poly};
pub use poly::{q, q_frac, Assignment, Coeff, Poly, PolyDisplay};
pub use registry::{RegistryBuilder, Var, VarKind, VarRegistry};

use serde::Serialize;

use crate::error::{Error, Result};

/// Element of a free module `O^p`, stored as its coordinate list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVec(pub Vec<Poly>);

impl PolyVec {
    pub fn zero(nvars: usize, len: usize) -> Self {
        PolyVec(vec![Poly::zero(nvars); len])
    }

    pub fn unit(nvars: usize, len: usize, i: usize) -> Self {
        let mut v = Self::zero(nvars, len);
        v.0[i] = Poly::one(nvars);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Poly] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    pub fn dot(&self, other: &PolyVec) -> Result<Poly> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "dot product of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let nvars = self.0.first().map_or(0, Poly::nvars);
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(Poly::zero(nvars), |acc, (a, b)| acc + a * b))
    }

    pub fn scale(&self, c: &Poly) -> PolyVec {
        PolyVec(self.0.iter().map(|e| e * c).collect())
    }

    pub fn add(&self, other: &PolyVec) -> PolyVec {
        assert_eq!(self.len(), other.len());
        PolyVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &PolyVec) -> PolyVec {
        assert_eq!(self.len(), other.len());
        PolyVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn substitute(&self, a: &Assignment) -> Result<PolyVec> {
        self.0
            .iter()
            .map(|p| p.substitute(a))
            .collect::<Result<_>>()
            .map(PolyVec)
    }

    pub fn to_strings(&self, reg: &VarRegistry) -> Vec<String> {
        self.0.iter().map(|p| p.to_string_with(reg)).collect()
    }
}

/// A polynomial in the generic parameters that a result assumes nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SideCondition(pub Poly);

impl SideCondition {
    /// Normalizes to a primitive polynomial; constants carry no information
    /// and yield `None`.
    pub fn new(p: &Poly) -> Option<Self> {
        if p.is_constant() {
            None
        } else {
            Some(SideCondition(p.primitive()))
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }
}

/// Appends `p` to `list` unless it is constant or already present.
pub fn push_side_condition(list: &mut Vec<SideCondition>, p: &Poly) {
    if let Some(sc) = SideCondition::new(p) {
        if !list.contains(&sc) {
            list.push(sc);
        }
    }
}

pub fn merge_side_conditions(list: &mut Vec<SideCondition>, other: &[SideCondition]) {
    for sc in other {
        if !list.contains(sc) {
            list.push(sc.clone());
        }
    }
}

/// Order of a polynomial in the curve parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }
}

impl PartialOrd for Order {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Order {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Order::Infinite, Order::Infinite) => Equal,
            (Order::Infinite, _) => Greater,
            (_, Order::Infinite) => Less,
            (Order::Finite(a), Order::Finite(b)) => a.cmp(b),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

/// Valuation of `f` in the curve parameter, together with the coefficient of
/// the lowest power (a polynomial in the generic parameters). The coefficient
/// is what must be nonzero for the order to be attained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TOrder {
    pub order: Order,
    pub leading: Option<Poly>,
}

impl TOrder {
    pub fn side_condition(&self) -> Option<SideCondition> {
        self.leading.as_ref().and_then(SideCondition::new)
    }
}

pub fn t_order(f: &Poly, reg: &VarRegistry) -> Result<TOrder> {
    let t = reg.curve();
    for v in f.support() {
        match reg.kind(v) {
            VarKind::Curve | VarKind::Generic => {}
            k => {
                return Err(Error::Domain(format!(
                    "t_order on a polynomial containing {:?} variable `{}`",
                    k,
                    reg.name(v)
                )))
            }
        }
    }
    Ok(lowest_in(f, t))
}

/// Lowest power of `t` in `f` and its coefficient, with no restriction on the
/// remaining variables.
pub(crate) fn lowest_in(f: &Poly, t: Var) -> TOrder {
    let Some(min) = f.terms().iter().map(|(m, _)| m.exponent(t)).min() else {
        return TOrder {
            order: Order::Infinite,
            leading: None,
        };
    };
    let lead = Poly::from_terms(
        f.nvars(),
        f.terms()
            .iter()
            .filter(|(m, _)| m.exponent(t) == min)
            .map(|(m, c)| (m.without(t), c.clone())),
    );
    TOrder {
        order: Order::Finite(min as u32),
        leading: Some(lead),
    }
}

pub fn partial_derivative(f: &Poly, v: Var) -> Poly {
    f.partial_derivative(v)
}

pub fn substitute(f: &Poly, assignment: &Assignment) -> Result<Poly> {
    f.substitute(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> std::sync::Arc<VarRegistry> {
        VarRegistry::builder()
            .base(&["x", "y"])
            .family(&["t"])
            .curve("s")
            .generic(&["a", "b"])
            .build()
            .unwrap()
    }

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    #[test]
    fn substitute_designed_cancellation() {
        let reg = VarRegistry::builder().base(&["x", "y"]).build().unwrap();
        let n = reg.len();
        let t = Poly::var(n, reg.curve());
        let a = Assignment::new(n, n)
            .with(reg.base(0), t.clone())
            .unwrap()
            .with(reg.base(1), t.pow(2))
            .unwrap();
        assert!(p("x^2 - y", &reg).substitute(&a).unwrap().is_zero());
        let id = Assignment::identity(n);
        assert_eq!(p("x", &reg).substitute(&id).unwrap(), p("x", &reg));
    }

    #[test]
    fn substitute_polar_branch_kills_fx() {
        let reg = reg();
        let n = reg.len();
        let f = p("1/3*x^3 - t^2*x*y^4 + y^6", &reg);
        let fx = f.partial_derivative(reg.base(0));
        let s = Poly::var(n, reg.curve());
        let a = Assignment::new(n, n)
            .with(reg.base(0), s.pow(5))
            .unwrap()
            .with(reg.base(1), s.pow(2))
            .unwrap()
            .with(reg.family(0), s.clone())
            .unwrap();
        assert!(fx.substitute(&a).unwrap().is_zero());
    }

    #[test]
    fn substitute_requires_coverage() {
        let reg = reg();
        let n = reg.len();
        let a = Assignment::new(n, n).with(reg.base(0), Poly::zero(n)).unwrap();
        assert!(matches!(
            p("x + y", &reg).substitute(&a),
            Err(Error::Unassigned(_))
        ));
        let mut a = Assignment::new(n, n);
        assert!(matches!(
            a.set(Var(99), Poly::zero(n)),
            Err(Error::RegistryMismatch(_))
        ));
    }

    #[test]
    fn derivatives_of_fr_family() {
        let reg = reg();
        let f = p("1/3*x^3 - t^2*x*y^4 + y^6", &reg);
        assert_eq!(
            f.partial_derivative(reg.base(0)),
            p("x^2 - t^2*y^4", &reg)
        );
        assert_eq!(
            f.partial_derivative(reg.family(0)),
            p("-2*t*x*y^4", &reg)
        );
        assert!(p("y", &reg).partial_derivative(reg.base(0)).is_zero());
    }

    #[test]
    fn t_order_examples() {
        let reg = reg();
        let o = t_order(&p("3*s^2 + s^5", &reg), &reg).unwrap();
        assert_eq!(o.order, Order::Finite(2));
        assert!(o.side_condition().is_none());
        let o = t_order(&Poly::zero(reg.len()), &reg).unwrap();
        assert_eq!(o.order, Order::Infinite);
        let o = t_order(&p("(a - b)*s^2", &reg), &reg).unwrap();
        assert_eq!(o.order, Order::Finite(2));
        assert_eq!(o.side_condition().unwrap().poly(), &p("a - b", &reg));
        assert!(matches!(
            t_order(&p("x*s", &reg), &reg),
            Err(Error::Domain(_))
        ));
    }
}
