use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Var, VarRegistry};
use crate::error::{Error, Result};

pub type Coeff = BigRational;

pub fn q(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse polynomial with exact rational coefficients.
///
/// Terms are kept strictly descending in the registry's monomial order and no
/// stored coefficient is zero, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Monomial, Coeff)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Coeff::one())
    }

    pub fn constant(nvars: usize, c: Coeff) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, q(c))
    }

    pub fn var(nvars: usize, v: Var) -> Self {
        Self::term(Monomial::var(nvars, v, 1), Coeff::one())
    }

    pub fn term(m: Monomial, c: Coeff) -> Self {
        let nvars = m.nvars();
        if c.is_zero() {
            Poly::zero(nvars)
        } else {
            Poly {
                nvars,
                terms: vec![(m, c)],
            }
        }
    }

    /// Builds a canonical polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut acc: HashMap<Monomial, Coeff> = HashMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            *acc.entry(m).or_insert_with(Coeff::zero) += c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_term(&self) -> Coeff {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => Coeff::zero(),
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Coeff)> {
        self.terms.first()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn leading_coeff(&self) -> Option<&Coeff> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.degree()).max()
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms
            .iter()
            .map(|(m, _)| m.exponent(v))
            .max()
            .unwrap_or(0)
    }

    pub fn uses(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m.exponent(v) > 0)
    }

    pub fn support(&self) -> Vec<Var> {
        (0..self.nvars)
            .map(Var)
            .filter(|&v| self.uses(v))
            .collect()
    }

    pub fn scale(&self, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(n, a)| (n.mul(m), a * c))
                .collect(),
        }
    }

    /// `self += c * m * other`, merging in place.
    pub fn add_scaled(&mut self, c: &Coeff, m: &Monomial, other: &Poly) {
        debug_assert_eq!(self.nvars, other.nvars);
        if c.is_zero() || other.is_zero() {
            return;
        }
        let old = std::mem::take(&mut self.terms);
        let mut out = Vec::with_capacity(old.len() + other.terms.len());
        let mut a = old.into_iter().peekable();
        let mut b = other.terms.iter().map(|(n, x)| (n.mul(m), x * c)).peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (Some(x), Some(y)) => x.0.cmp(&y.0),
            };
            match ord {
                Ordering::Greater => out.push(a.next().unwrap()),
                Ordering::Less => out.push(b.next().unwrap()),
                Ordering::Equal => {
                    let (mono, x) = a.next().unwrap();
                    let (_, y) = b.next().unwrap();
                    let s = x + y;
                    if !s.is_zero() {
                        out.push((mono, s));
                    }
                }
            }
        }
        self.terms = out;
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_derivative(&self, v: Var) -> Poly {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(v);
            if e == 0 {
                return None;
            }
            let mut m2 = m.clone();
            m2.set_exponent(v, e - 1);
            Some((m2, c * q(e as i64)))
        });
        Poly::from_terms(self.nvars, terms)
    }

    /// Simultaneous substitution. Every variable occurring in `self` must be
    /// assigned.
    pub fn substitute(&self, assignment: &Assignment) -> Result<Poly> {
        if assignment.images.len() != self.nvars {
            return Err(Error::RegistryMismatch(format!(
                "assignment covers {} slots, polynomial has {}",
                assignment.images.len(),
                self.nvars
            )));
        }
        let target = assignment.target_nvars;
        let mut powers: Vec<Vec<Poly>> = vec![Vec::new(); self.nvars];
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for v in m.support() {
                let img = assignment.images[v.0]
                    .as_ref()
                    .ok_or_else(|| Error::Unassigned(format!("#{}", v.0)))?;
                let e = m.exponent(v) as usize;
                let cache = &mut powers[v.0];
                if cache.is_empty() {
                    cache.push(Poly::one(target));
                }
                while cache.len() <= e {
                    let next = &cache[cache.len() - 1] * img;
                    cache.push(next);
                }
                t = &t * &cache[e];
            }
            out = out + t;
        }
        Ok(out)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (lm, lc) = d.leading().unwrap();
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.leading().cloned() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = &c / lc;
            rem.add_scaled(&-qc.clone(), &qm, d);
            quot.push((qm, qc));
        }
        Some(Poly {
            nvars: self.nvars,
            terms: quot,
        })
    }

    /// Multiplies through by the lcm of denominators and divides by the content,
    /// making the leading coefficient positive.
    pub fn primitive(&self) -> Poly {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            den = den.lcm(c.denom());
        }
        let mut num = BigInt::zero();
        for (_, c) in &self.terms {
            let v = (c * BigRational::from_integer(den.clone())).to_integer();
            num = num.gcd(&v);
        }
        let mut scale = BigRational::new(den, num);
        if self.terms[0].1.is_negative() {
            scale = -scale;
        }
        self.scale(&scale)
    }

    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            Some(c) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// True when `self == c * other` for some nonzero rational `c`.
    pub fn is_scalar_multiple_of(&self, other: &Poly) -> Option<Coeff> {
        if self.terms.len() != other.terms.len() || other.is_zero() {
            return None;
        }
        let c = &self.terms[0].1 / &other.terms[0].1;
        for ((m1, a), (m2, b)) in self.terms.iter().zip(&other.terms) {
            if m1 != m2 || *a != b * &c {
                return None;
            }
        }
        Some(c)
    }

    pub fn display<'a>(&'a self, reg: &'a VarRegistry) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, reg }
    }

    pub fn to_string_with(&self, reg: &VarRegistry) -> String {
        self.display(reg).to_string()
    }
}

/// Images for a simultaneous substitution, one optional slot per source
/// variable.
#[derive(Clone, Debug)]
pub struct Assignment {
    images: Vec<Option<Poly>>,
    target_nvars: usize,
}

impl Assignment {
    pub fn new(source_nvars: usize, target_nvars: usize) -> Self {
        Assignment {
            images: vec![None; source_nvars],
            target_nvars,
        }
    }

    /// Assignment sending every variable to itself.
    pub fn identity(nvars: usize) -> Self {
        Assignment {
            images: (0..nvars).map(|i| Some(Poly::var(nvars, Var(i)))).collect(),
            target_nvars: nvars,
        }
    }

    pub fn set(&mut self, v: Var, image: Poly) -> Result<()> {
        if v.0 >= self.images.len() {
            return Err(Error::RegistryMismatch(format!(
                "variable #{} outside registry of size {}",
                v.0,
                self.images.len()
            )));
        }
        if image.nvars() != self.target_nvars {
            return Err(Error::RegistryMismatch(format!(
                "image lives over {} slots, expected {}",
                image.nvars(),
                self.target_nvars
            )));
        }
        self.images[v.0] = Some(image);
        Ok(())
    }

    pub fn with(mut self, v: Var, image: Poly) -> Result<Self> {
        self.set(v, image)?;
        Ok(self)
    }

    pub fn get(&self, v: Var) -> Option<&Poly> {
        self.images.get(v.0).and_then(|x| x.as_ref())
    }

    pub fn keep(&mut self, v: Var) {
        if self.images.len() == self.target_nvars {
            self.images[v.0] = Some(Poly::var(self.target_nvars, v));
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self.add_scaled(&Coeff::one(), &Monomial::one(rhs.nvars), &rhs);
        self
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(&Coeff::one(), &Monomial::one(rhs.nvars), rhs);
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self.add_scaled(&-Coeff::one(), &Monomial::one(rhs.nvars), &rhs);
        self
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(&-Coeff::one(), &Monomial::one(rhs.nvars), rhs);
        out
    }
}

impl Add<&Poly> for Poly {
    type Output = Poly;
    fn add(mut self, rhs: &Poly) -> Poly {
        self.add_scaled(&Coeff::one(), &Monomial::one(rhs.nvars), rhs);
        self
    }
}

impl Sub<&Poly> for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: &Poly) -> Poly {
        self.add_scaled(&-Coeff::one(), &Monomial::one(rhs.nvars), rhs);
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for (_, c) in &mut self.terms {
            *c = -c.clone();
        }
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.nvars);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return rhs.mul_term(m, c);
        }
        if rhs.terms.len() == 1 {
            let (m, c) = &rhs.terms[0];
            return self.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Coeff> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                *acc.entry(m1.mul(m2)).or_insert_with(Coeff::zero) += c1 * c2;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly {
            nvars: self.nvars,
            terms,
        }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul<&Poly> for Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        &self * rhs
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    reg: &'a VarRegistry,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                if abs.is_integer() {
                    parts.push(abs.numer().to_string());
                } else {
                    parts.push(format!("{}/{}", abs.numer(), abs.denom()));
                }
            }
            for v in m.support() {
                let e = m.exponent(v);
                if e == 1 {
                    parts.push(self.reg.name(v).to_string());
                } else {
                    parts.push(format!("{}^{}", self.reg.name(v), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}
