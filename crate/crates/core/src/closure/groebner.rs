//! Buchberger's algorithm for submodules of `Q[vars]^p` with a
//! term-over-position order, tracking how every basis element is built from
//! the input generators. Ideals are the case `p = 1`.

use num_traits::{One, Zero};

use crate::ring::{Coeff, Monomial, Poly, PolyVec};

/// Sparse vector of polynomials as a list of position-tagged terms, sorted
/// strictly descending: larger monomial first, then smaller position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ModPoly {
    terms: Vec<(u32, Monomial, Coeff)>,
}

fn key_cmp(a: (u32, &Monomial), b: (u32, &Monomial)) -> std::cmp::Ordering {
    a.1.cmp(b.1).then(b.0.cmp(&a.0))
}

impl ModPoly {
    pub(crate) fn zero() -> Self {
        ModPoly { terms: Vec::new() }
    }

    pub(crate) fn from_vec(v: &PolyVec) -> Self {
        let mut terms: Vec<(u32, Monomial, Coeff)> = v
            .entries()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms().iter().map(move |(m, c)| (i as u32, m.clone(), c.clone())))
            .collect();
        terms.sort_by(|a, b| key_cmp((b.0, &b.1), (a.0, &a.1)));
        ModPoly { terms }
    }

    fn unit(pos: usize, nvars: usize) -> Self {
        ModPoly {
            terms: vec![(pos as u32, Monomial::one(nvars), Coeff::one())],
        }
    }

    pub(crate) fn to_vec(&self, nvars: usize, len: usize) -> PolyVec {
        let mut buckets: Vec<Vec<(Monomial, Coeff)>> = vec![Vec::new(); len];
        for (i, m, c) in &self.terms {
            buckets[*i as usize].push((m.clone(), c.clone()));
        }
        PolyVec(buckets.into_iter().map(|t| Poly::from_terms(nvars, t)).collect())
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead(&self) -> Option<&(u32, Monomial, Coeff)> {
        self.terms.first()
    }

    fn scale(&mut self, c: &Coeff) {
        for t in &mut self.terms {
            t.2 = &t.2 * c;
        }
    }

    /// `self += c · m · other`.
    fn add_scaled(&mut self, c: &Coeff, m: &Monomial, other: &ModPoly) {
        if other.terms.is_empty() || c.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = std::mem::take(&mut self.terms).into_iter().peekable();
        let mut b = other.terms.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => {
                    let (i, mb, cb) = b.next().unwrap();
                    out.push((*i, mb.mul(m), cb * c));
                }
                (Some(ta), Some((ib, mb, _))) => {
                    let mbm = mb.mul(m);
                    match key_cmp((ta.0, &ta.1), (*ib, &mbm)) {
                        std::cmp::Ordering::Greater => out.push(a.next().unwrap()),
                        std::cmp::Ordering::Less => {
                            let (i, _, cb) = b.next().unwrap();
                            out.push((*i, mbm, cb * c));
                        }
                        std::cmp::Ordering::Equal => {
                            let (i, mon, ca) = a.next().unwrap();
                            let (_, _, cb) = b.next().unwrap();
                            let s = ca + cb * c;
                            if !s.is_zero() {
                                out.push((i, mon, s));
                            }
                        }
                    }
                }
            }
        }
        self.terms = out;
    }
}

struct Elem {
    poly: ModPoly,
    rep: ModPoly,
    pos: u32,
    lm: Monomial,
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// A Gröbner basis together with expressions of its elements in terms of the
/// input generators.
pub struct GroebnerBasis {
    nvars: usize,
    rank: usize,
    ngens: usize,
    elems: Vec<Elem>,
    active: Vec<usize>,
    track: bool,
}

impl GroebnerBasis {
    /// `gens` all have length `rank`. With `track` off no lifts are kept and
    /// [`Self::lift`] returns `None`.
    pub fn new(nvars: usize, rank: usize, gens: &[PolyVec], track: bool) -> Self {
        let mut gb = GroebnerBasis {
            nvars,
            rank,
            ngens: gens.len(),
            elems: Vec::new(),
            active: Vec::new(),
            track,
        };
        let mut pairs: Vec<Pair> = Vec::new();
        let leads: Vec<Option<(u32, Monomial)>> = gens
            .iter()
            .map(|g| ModPoly::from_vec(g).lead().map(|(i, m, _)| (*i, m.clone())))
            .collect();
        let mut order: Vec<usize> = (0..gens.len()).filter(|&j| leads[j].is_some()).collect();
        order.sort_by(|&a, &b| {
            let (ia, ma) = leads[a].as_ref().unwrap();
            let (ib, mb) = leads[b].as_ref().unwrap();
            key_cmp((*ia, ma), (*ib, mb))
        });
        for j in order {
            let poly = ModPoly::from_vec(&gens[j]);
            let rep = if track { ModPoly::unit(j, nvars) } else { ModPoly::zero() };
            let (poly, rep) = gb.reduce_full(poly, rep);
            if poly.is_zero() {
                continue;
            }
            gb.insert(poly, rep, &mut pairs);
        }
        while !pairs.is_empty() {
            let best = (0..pairs.len())
                .min_by(|&a, &b| {
                    let (pa, pb) = (&pairs[a], &pairs[b]);
                    pa.lcm
                        .degree()
                        .cmp(&pb.lcm.degree())
                        .then(pa.lcm.cmp(&pb.lcm))
                        .then((pa.i, pa.j).cmp(&(pb.i, pb.j)))
                })
                .unwrap();
            let pair = pairs.swap_remove(best);
            let (s, srep) = gb.s_poly(&pair);
            let (r, rrep) = gb.reduce_full(s, srep);
            if !r.is_zero() {
                gb.insert(r, rrep, &mut pairs);
            }
        }
        gb
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.rank == 1 && self.active.iter().any(|&i| self.elems[i].lm.is_one())
    }

    /// The reduced leading data of the basis as vectors, for inspection.
    pub fn basis(&self) -> Vec<PolyVec> {
        self.active
            .iter()
            .map(|&i| self.elems[i].poly.to_vec(self.nvars, self.rank))
            .collect()
    }

    fn s_poly(&self, pair: &Pair) -> (ModPoly, ModPoly) {
        let (a, b) = (&self.elems[pair.i], &self.elems[pair.j]);
        let ma = a.lm.quotient_of(&pair.lcm);
        let mb = b.lm.quotient_of(&pair.lcm);
        let mut s = ModPoly::zero();
        s.add_scaled(&Coeff::one(), &ma, &a.poly);
        s.add_scaled(&-Coeff::one(), &mb, &b.poly);
        let mut rep = ModPoly::zero();
        if self.track {
            rep.add_scaled(&Coeff::one(), &ma, &a.rep);
            rep.add_scaled(&-Coeff::one(), &mb, &b.rep);
        }
        (s, rep)
    }

    fn find_reducer(&self, pos: u32, m: &Monomial) -> Option<usize> {
        self.active
            .iter()
            .copied()
            .filter(|&k| self.elems[k].pos == pos && self.elems[k].lm.divides(m))
            .min_by_key(|&k| self.elems[k].poly.terms.len())
    }

    /// Full reduction of every term; returns the remainder and its expression
    /// in the generators.
    fn reduce_full(&self, mut f: ModPoly, mut rep: ModPoly) -> (ModPoly, ModPoly) {
        let mut rem = ModPoly::zero();
        while let Some((pos, m, c)) = f.lead().cloned() {
            match self.find_reducer(pos, &m) {
                Some(k) => {
                    let e = &self.elems[k];
                    let q = e.lm.quotient_of(&m);
                    let c = -c;
                    f.add_scaled(&c, &q, &e.poly);
                    if self.track {
                        rep.add_scaled(&c, &q, &e.rep);
                    }
                }
                None => {
                    rem.terms.push(f.terms.remove(0));
                }
            }
        }
        (rem, rep)
    }

    fn insert(&mut self, mut poly: ModPoly, mut rep: ModPoly, pairs: &mut Vec<Pair>) {
        let lc = poly.lead().unwrap().2.clone();
        if !lc.is_one() {
            let inv = Coeff::one() / lc;
            poly.scale(&inv);
            rep.scale(&inv);
        }
        let (pos, lm) = {
            let l = poly.lead().unwrap();
            (l.0, l.1.clone())
        };
        let h = self.elems.len();
        self.elems.push(Elem {
            poly,
            rep,
            pos,
            lm: lm.clone(),
        });

        // Gebauer–Möller update.
        let cands: Vec<Pair> = self
            .active
            .iter()
            .filter(|&&g| self.elems[g].pos == pos)
            .map(|&g| Pair {
                i: g,
                j: h,
                lcm: self.elems[g].lm.lcm(&lm),
            })
            .collect();
        let coprime = |p: &Pair, elems: &[Elem]| elems[p.i].lm.coprime(&elems[p.j].lm);
        let mut kept: Vec<Pair> = Vec::new();
        for idx in 0..cands.len() {
            let c = &cands[idx];
            let rank_one_coprime = self.rank == 1 && coprime(c, &self.elems);
            let dominated = cands[idx + 1..].iter().any(|d| d.lcm.divides(&c.lcm))
                || kept.iter().any(|d| d.lcm.divides(&c.lcm));
            if rank_one_coprime || !dominated {
                kept.push(c.clone());
            }
        }
        let kept: Vec<Pair> = kept
            .into_iter()
            .filter(|p| !(self.rank == 1 && coprime(p, &self.elems)))
            .collect();
        pairs.retain(|p| {
            if self.elems[p.i].pos != pos || !lm.divides(&p.lcm) {
                return true;
            }
            let li = self.elems[p.i].lm.lcm(&lm);
            let lj = self.elems[p.j].lm.lcm(&lm);
            li == p.lcm || lj == p.lcm
        });
        pairs.extend(kept);

        let elems = &self.elems;
        self.active
            .retain(|&g| !(elems[g].pos == pos && lm.divides(&elems[g].lm)));
        self.active.push(h);
    }

    /// Normal form of `v` and, when tracking, coefficients `c` with
    /// `v − rem = Σ c_j g_j`.
    pub fn reduce(&self, v: &PolyVec) -> (PolyVec, Option<Vec<Poly>>) {
        let (rem, rep) = self.reduce_full(ModPoly::from_vec(v), ModPoly::zero());
        let coeffs = self.track.then(|| {
            let mut r = rep;
            r.scale(&-Coeff::one());
            r.to_vec(self.nvars, self.ngens).0
        });
        (rem.to_vec(self.nvars, self.rank), coeffs)
    }

    pub fn contains(&self, v: &PolyVec) -> bool {
        let mut f = ModPoly::from_vec(v);
        while let Some((pos, m, c)) = f.lead().cloned() {
            match self.find_reducer(pos, &m) {
                Some(k) => {
                    let e = &self.elems[k];
                    f.add_scaled(&-c, &e.lm.quotient_of(&m), &e.poly);
                }
                None => return false,
            }
        }
        true
    }

    /// Coefficients over the input generators when `v` is in the module.
    pub fn lift(&self, v: &PolyVec) -> Option<Vec<Poly>> {
        if !self.track {
            return None;
        }
        let (rem, coeffs) = self.reduce(v);
        if rem.is_zero() {
            coeffs
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{parse_poly, VarRegistry};

    fn setup() -> (std::sync::Arc<VarRegistry>, impl Fn(&str) -> Poly) {
        let reg = VarRegistry::builder().base(&["x", "y", "z"]).build().unwrap();
        let r2 = reg.clone();
        (reg, move |s: &str| parse_poly(s, &r2).unwrap())
    }

    fn combine(gens: &[PolyVec], c: &[Poly]) -> PolyVec {
        let mut acc = PolyVec::zero(c[0].nvars(), gens[0].len());
        for (g, c) in gens.iter().zip(c) {
            acc = acc.add(&g.scale(c));
        }
        acc
    }

    #[test]
    fn ideal_membership_with_lift() {
        let (reg, p) = setup();
        let n = reg.len();
        let gens: Vec<PolyVec> = ["x^2 - y", "x*y - z"].iter().map(|s| PolyVec(vec![p(s)])).collect();
        let gb = GroebnerBasis::new(n, 1, &gens, true);
        let v = PolyVec(vec![p("x*z - y^2")]);
        let c = gb.lift(&v).expect("member");
        assert_eq!(combine(&gens, &c), v);
        assert!(!gb.contains(&PolyVec(vec![p("x")])));
        assert!(gb.contains(&PolyVec(vec![p("y^3 - z^2")])));
    }

    #[test]
    fn module_membership() {
        let (reg, p) = setup();
        let n = reg.len();
        let gens = vec![
            PolyVec(vec![p("x"), p("y")]),
            PolyVec(vec![p("0"), p("x")]),
            PolyVec(vec![p("y"), p("0")]),
        ];
        let gb = GroebnerBasis::new(n, 2, &gens, true);
        assert!(!gb.contains(&PolyVec(vec![p("x"), p("3*y")])));
        let v = PolyVec(vec![p("x^2 + y^2"), p("x*y + x^2")]);
        let c = gb.lift(&v).expect("member");
        assert_eq!(combine(&gens, &c), v);
        let (rem, _) = gb.reduce(&PolyVec(vec![p("x"), p("3*y")]));
        assert!(!rem.is_zero());
    }

    #[test]
    fn unit_ideal_detected() {
        let (reg, p) = setup();
        let gens: Vec<PolyVec> = ["x + 1", "x"].iter().map(|s| PolyVec(vec![p(s)])).collect();
        let gb = GroebnerBasis::new(reg.len(), 1, &gens, true);
        assert!(gb.is_unit_ideal());
        let c = gb.lift(&PolyVec(vec![p("1")])).unwrap();
        assert_eq!(combine(&gens, &c), PolyVec(vec![p("1")]));
    }
}
