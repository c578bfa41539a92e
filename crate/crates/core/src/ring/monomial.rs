use std::cmp::Ordering;

use smallvec::SmallVec;

use super::Var;

/// Exponent vector with one slot per registry variable.
///
/// `Ord` is graded reverse lexicographic in slot order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    deg: u32,
    exps: SmallVec<[u16; 12]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            deg: 0,
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn var(nvars: usize, v: Var, e: u16) -> Self {
        let mut m = Self::one(nvars);
        m.exps[v.0] = e;
        m.deg = e as u32;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps: SmallVec::from_slice(exps),
        }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exponent(&self, v: Var) -> u16 {
        self.exps[v.0]
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial {
            deg: self.deg + other.deg,
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        Monomial {
            deg: other.deg - self.deg,
            exps: other.exps.iter().zip(&self.exps).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let exps: SmallVec<[u16; 12]> = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| *a.max(b))
            .collect();
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps,
        }
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn without(&self, v: Var) -> Monomial {
        let mut m = self.clone();
        m.deg -= m.exps[v.0] as u32;
        m.exps[v.0] = 0;
        m
    }

    pub(crate) fn set_exponent(&mut self, v: Var, e: u16) {
        self.deg = self.deg - self.exps[v.0] as u32 + e as u32;
        self.exps[v.0] = e;
    }

    pub fn support(&self) -> impl Iterator<Item = Var> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| Var(i))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.exps.iter().zip(&other.exps).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u16]) -> Monomial {
        Monomial::from_exponents(e)
    }

    #[test]
    fn grevlex_order() {
        // x > y > z
        assert!(m(&[1, 0, 0]) > m(&[0, 1, 0]));
        assert!(m(&[0, 1, 0]) > m(&[0, 0, 1]));
        // x^2 > xy > y^2 > xz
        assert!(m(&[2, 0, 0]) > m(&[1, 1, 0]));
        assert!(m(&[1, 1, 0]) > m(&[0, 2, 0]));
        assert!(m(&[0, 2, 0]) > m(&[1, 0, 1]));
        // degree first
        assert!(m(&[0, 0, 2]) > m(&[1, 0, 0]));
    }

    #[test]
    fn divisibility() {
        let a = m(&[1, 2]);
        let b = m(&[2, 3]);
        assert!(a.divides(&b));
        assert_eq!(a.quotient_of(&b), m(&[1, 1]));
        assert_eq!(a.lcm(&m(&[3, 0])), m(&[3, 2]));
        assert!(m(&[1, 0]).coprime(&m(&[0, 4])));
    }
}
