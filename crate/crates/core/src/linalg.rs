//! Generator matrices, determinants, minor ideals, generic rank and the
//! cofactor functionals attached to an augmented matrix `[h, M]`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ring::{push_side_condition, Monomial, Poly, PolyVec, SideCondition, VarKind, VarRegistry};

/// `p × r` matrix whose columns generate a submodule of `O^p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenMatrix {
    nvars: usize,
    rows: usize,
    cols: Vec<PolyVec>,
}

impl GenMatrix {
    pub fn from_columns(nvars: usize, rows: usize, cols: Vec<PolyVec>) -> Result<Self> {
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::Shape(format!(
                    "column {} has length {}, expected {}",
                    j + 1,
                    c.len(),
                    rows
                )));
            }
        }
        Ok(GenMatrix { nvars, rows, cols })
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<Poly>>) -> Result<Self> {
        let p = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let cols = (0..r)
            .map(|j| PolyVec(rows.iter().map(|row| row[j].clone()).collect()))
            .collect();
        Ok(GenMatrix {
            nvars,
            rows: p,
            cols,
        })
    }

    pub fn zero(nvars: usize, rows: usize, cols: usize) -> Self {
        GenMatrix {
            nvars,
            rows,
            cols: vec![PolyVec::zero(nvars, rows); cols],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.cols[j].0[i]
    }

    pub fn column(&self, j: usize) -> &PolyVec {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[PolyVec] {
        &self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Poly> {
        self.cols.iter().map(|c| c.0[i].clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols.len()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> GenMatrix {
        GenMatrix {
            nvars: self.nvars,
            rows: rows.len(),
            cols: cols
                .iter()
                .map(|&j| PolyVec(rows.iter().map(|&i| self.cols[j].0[i].clone()).collect()))
                .collect(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(&Poly) -> Result<Poly>) -> Result<GenMatrix> {
        let cols = self
            .cols
            .iter()
            .map(|c| c.0.iter().map(&mut f).collect::<Result<Vec<_>>>().map(PolyVec))
            .collect::<Result<Vec<_>>>()?;
        let nvars = cols
            .first()
            .and_then(|c: &PolyVec| c.0.first().map(Poly::nvars))
            .unwrap_or(self.nvars);
        Ok(GenMatrix {
            nvars,
            rows: self.rows,
            cols,
        })
    }

    /// `self · c` for a coefficient vector `c` of length `ncols`.
    pub fn combine(&self, coeffs: &[Poly]) -> PolyVec {
        assert_eq!(coeffs.len(), self.ncols());
        let mut acc = PolyVec::zero(self.nvars, self.rows);
        for (c, col) in coeffs.iter().zip(&self.cols) {
            if !c.is_zero() {
                acc = acc.add(&col.scale(c));
            }
        }
        acc
    }

    pub fn to_row_strings(&self, reg: &VarRegistry) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|p| p.to_string_with(reg)).collect())
            .collect()
    }

    fn rows_vec(&self) -> Vec<Vec<Poly>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

/// Finite list of ideal generators. Order carries no meaning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealGens {
    pub nvars: usize,
    pub gens: Vec<Poly>,
}

impl IdealGens {
    pub fn new(nvars: usize, gens: Vec<Poly>) -> Self {
        IdealGens { nvars, gens }
    }

    pub fn unit(nvars: usize) -> Self {
        IdealGens {
            nvars,
            gens: vec![Poly::one(nvars)],
        }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Drops zero generators and generators that are scalar multiples of an
    /// earlier one.
    pub fn normalized(&self) -> IdealGens {
        let mut out: Vec<Poly> = Vec::new();
        for g in &self.gens {
            if g.is_zero() {
                continue;
            }
            if out.iter().any(|h| g.is_scalar_multiple_of(h).is_some()) {
                continue;
            }
            out.push(g.clone());
        }
        IdealGens {
            nvars: self.nvars,
            gens: out,
        }
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.iter().all(Poly::is_zero)
    }

    /// Generators of the product ideal.
    pub fn product(&self, other: &IdealGens) -> IdealGens {
        let gens = self
            .gens
            .iter()
            .flat_map(|a| other.gens.iter().map(move |b| a * b))
            .collect();
        IdealGens {
            nvars: self.nvars,
            gens,
        }
    }

    /// The ideal as a `1 × m` generator matrix.
    pub fn as_matrix(&self) -> GenMatrix {
        GenMatrix {
            nvars: self.nvars,
            rows: 1,
            cols: self.gens.iter().map(|g| PolyVec(vec![g.clone()])).collect(),
        }
    }

    pub fn to_strings(&self, reg: &VarRegistry) -> Vec<String> {
        self.gens.iter().map(|g| g.to_string_with(reg)).collect()
    }
}

/// Row and column selection of a `k × k` minor, both strictly increasing and
/// 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KIndexPair {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl KIndexPair {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::Shape("row and column index lists differ in length".into()));
        }
        if !strictly_increasing(&rows) || !strictly_increasing(&cols) {
            return Err(Error::Precondition("k-indexes must be strictly increasing".into()));
        }
        Ok(KIndexPair { rows, cols })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, a: &GenMatrix) -> Result<()> {
        if self.rows.iter().any(|&i| i >= a.nrows()) || self.cols.iter().any(|&j| j >= a.ncols()) {
            return Err(Error::IndexOutOfRange(format!(
                "{:?} outside a {}x{} matrix",
                self,
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// All strictly increasing `k`-subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if idx[i] == i + n - k {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn determinant(a: &GenMatrix) -> Result<Poly> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() <= 4 {
        Ok(det_cofactor(&a.rows_vec(), a.nvars))
    } else {
        Ok(det_bareiss(a.rows_vec(), a.nvars))
    }
}

/// Laplace expansion along the first column.
pub fn det_cofactor(m: &[Vec<Poly>], nvars: usize) -> Poly {
    let n = m.len();
    match n {
        0 => return Poly::one(nvars),
        1 => return m[0][0].clone(),
        2 => return &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {}
    }
    let mut acc = Poly::zero(nvars);
    for i in 0..n {
        if m[i][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = (0..n)
            .filter(|&r| r != i)
            .map(|r| m[r][1..].to_vec())
            .collect();
        let t = &m[i][0] * &det_cofactor(&minor, nvars);
        acc = if i % 2 == 0 { acc + t } else { acc - t };
    }
    acc
}

/// Fraction-free (Bareiss) determinant with row pivoting.
pub fn det_bareiss(mut m: Vec<Vec<Poly>>, nvars: usize) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(nvars);
    }
    let mut negate = false;
    let mut prev = Poly::one(nvars);
    for k in 0..n {
        let Some(piv) = (k..n).filter(|&i| !m[i][k].is_zero()).min_by_key(|&i| pivot_cost(&m[i][k])) else {
            return Poly::zero(nvars);
        };
        if piv != k {
            m.swap(piv, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = Poly::zero(nvars);
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

fn pivot_cost(p: &Poly) -> (u32, usize) {
    (p.total_degree().unwrap_or(0), p.len())
}

pub fn minor(a: &GenMatrix, idx: &KIndexPair) -> Result<Poly> {
    idx.check(a)?;
    determinant(&a.submatrix(&idx.rows, &idx.cols))
}

/// Every `k × k` minor with its index pair, rows outer and columns inner.
pub fn minors_with_indices(a: &GenMatrix, k: usize) -> Result<Vec<(KIndexPair, Poly)>> {
    if k > a.nrows().min(a.ncols()) {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} exceeds min({}, {})",
            a.nrows(),
            a.ncols()
        )));
    }
    let pairs: Vec<KIndexPair> = combinations(a.nrows(), k)
        .into_iter()
        .flat_map(|rows| {
            combinations(a.ncols(), k)
                .into_iter()
                .map(move |cols| KIndexPair {
                    rows: rows.clone(),
                    cols,
                })
        })
        .collect();
    Ok(pairs
        .into_par_iter()
        .map(|idx| {
            let d = determinant(&a.submatrix(&idx.rows, &idx.cols)).unwrap();
            (idx, d)
        })
        .collect())
}

/// `J_k(A)`: one generator per index pair, `C(p,k)·C(r,k)` in total.
pub fn minors_ideal(a: &GenMatrix, k: usize) -> Result<IdealGens> {
    if k == 0 {
        return Ok(IdealGens::unit(a.nvars()));
    }
    let gens = minors_with_indices(a, k)?.into_iter().map(|(_, d)| d).collect();
    Ok(IdealGens::new(a.nvars(), gens))
}

/// `[h, A]` with `h` as the first column.
pub fn augment(h: &PolyVec, a: &GenMatrix) -> Result<GenMatrix> {
    if h.len() != a.nrows() {
        return Err(Error::Shape(format!(
            "vector of length {} against {} rows",
            h.len(),
            a.nrows()
        )));
    }
    let mut cols = Vec::with_capacity(a.ncols() + 1);
    cols.push(h.clone());
    cols.extend(a.cols.iter().cloned());
    Ok(GenMatrix {
        nvars: a.nvars,
        rows: a.rows,
        cols,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    /// Rows and columns of a maximal nonvanishing minor.
    pub witness: KIndexPair,
    pub side_conditions: Vec<SideCondition>,
}

/// Rank over the fraction field by fraction-free elimination with full
/// pivoting. The final pivot is a maximal nonzero minor; its coefficient in
/// the generic parameters becomes a side condition when it is not constant.
pub fn generic_rank(a: &GenMatrix, reg: &VarRegistry) -> RankInfo {
    let (m, n) = (a.nrows(), a.ncols());
    let mut mat = a.rows_vec();
    let mut row_perm: Vec<usize> = (0..m).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut prev = Poly::one(a.nvars);
    let mut rank = 0;
    for k in 0..m.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in k..m {
            for j in k..n {
                if mat[i][j].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| pivot_cost(&mat[i][j]) < pivot_cost(&mat[bi][bj])) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        mat.swap(k, pi);
        row_perm.swap(k, pi);
        for row in mat.iter_mut() {
            row.swap(k, pj);
        }
        col_perm.swap(k, pj);
        let pivot_row = mat[k].clone();
        let rows_below: Vec<Vec<Poly>> = mat[k + 1..]
            .par_iter()
            .map(|row| {
                let mut out = row.clone();
                for j in k + 1..n {
                    let num = &(&pivot_row[k] * &row[j]) - &(&row[k] * &pivot_row[j]);
                    out[j] = num.div_exact(&prev).expect("Bareiss division is exact");
                }
                out[k] = Poly::zero(a.nvars);
                out
            })
            .collect();
        for (i, row) in rows_below.into_iter().enumerate() {
            mat[k + 1 + i] = row;
        }
        prev = mat[k][k].clone();
        rank = k + 1;
    }
    let mut side_conditions = Vec::new();
    if rank > 0 {
        push_side_condition(&mut side_conditions, &parameter_content(&prev, reg));
    }
    let mut rows: Vec<usize> = row_perm[..rank].to_vec();
    let mut cols: Vec<usize> = col_perm[..rank].to_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    RankInfo {
        rank,
        witness: KIndexPair { rows, cols },
        side_conditions,
    }
}

/// Coefficient (a polynomial in the generic parameters) of the leading
/// monomial of `p` taken in the remaining variables.
pub fn parameter_content(p: &Poly, reg: &VarRegistry) -> Poly {
    let generic: Vec<_> = reg.generic_vars().collect();
    if generic.is_empty() || p.is_zero() {
        return Poly::one(p.nvars());
    }
    let strip = |m: &Monomial| {
        let mut out = m.clone();
        for &g in &generic {
            out = out.without(g);
        }
        out
    };
    let lead = p.terms().iter().map(|(m, _)| strip(m)).max().unwrap();
    Poly::from_terms(
        p.nvars(),
        p.terms().iter().filter(|(m, _)| strip(m) == lead).map(|(m, c)| {
            let mut g_part = m.clone();
            for v in 0..m.nvars() {
                let v = crate::ring::Var(v);
                if reg.kind(v) != VarKind::Generic {
                    g_part = g_part.without(v);
                }
            }
            (g_part, c.clone())
        }),
    )
}

/// The functional `ψ` with `ψ·h = det([h, M]_{IJ})` for every `h`.
///
/// `idx` indexes the augmented matrix `[h, M]`, so its first column must be 0.
/// Entry `i_l` of `ψ` is the `(l, 1)` cofactor of `[h, M]_{IJ}`; entries off
/// `I` are zero.
pub fn cofactor_functional(m: &GenMatrix, idx: &KIndexPair) -> Result<PolyVec> {
    if idx.cols.first() != Some(&0) {
        return Err(Error::Precondition(
            "cofactor functional needs the h column (index 0) selected first".into(),
        ));
    }
    let k = idx.k();
    if idx.rows.iter().any(|&i| i >= m.nrows()) || idx.cols.iter().any(|&j| j > m.ncols()) {
        return Err(Error::IndexOutOfRange(format!(
            "{:?} outside the augmented {}x{} matrix",
            idx,
            m.nrows(),
            m.ncols() + 1
        )));
    }
    let gen_cols: Vec<usize> = idx.cols[1..].iter().map(|j| j - 1).collect();
    let mut psi = PolyVec::zero(m.nvars(), m.nrows());
    for l in 0..k {
        let rest_rows: Vec<usize> = idx
            .rows
            .iter()
            .enumerate()
            .filter(|(ll, _)| *ll != l)
            .map(|(_, &i)| i)
            .collect();
        let d = determinant(&m.submatrix(&rest_rows, &gen_cols))?;
        psi.0[idx.rows[l]] = if l % 2 == 0 { d } else { -d };
    }
    Ok(psi)
}

/// Every cofactor functional of `[h, M]` for `k`-indexes with `j_1 = 1`.
pub fn all_cofactor_functionals(m: &GenMatrix, k: usize) -> Result<Vec<(KIndexPair, PolyVec)>> {
    if k == 0 || k > m.nrows() || k > m.ncols() + 1 {
        return Err(Error::IndexOutOfRange(format!("k = {k} for cofactor functionals")));
    }
    let mut out = Vec::new();
    for rows in combinations(m.nrows(), k) {
        for rest in combinations(m.ncols(), k - 1) {
            let mut cols = vec![0];
            cols.extend(rest.iter().map(|j| j + 1));
            let idx = KIndexPair {
                rows: rows.clone(),
                cols,
            };
            let psi = cofactor_functional(m, &idx)?;
            out.push((idx, psi));
        }
    }
    Ok(out)
}

/// `ρ(h) = Σ_j h_j T_j` on the affine chart `T_i = 1` (0-based `i`).
pub fn rho_chart(h: &PolyVec, i: usize, reg: &VarRegistry) -> Result<Poly> {
    let p = h.len();
    if i >= p {
        return Err(Error::IndexOutOfRange(format!("chart {} of {}", i + 1, p)));
    }
    if reg.n_chart() < p {
        return Err(Error::RegistryMismatch(format!(
            "registry declares {} chart variables, need {}",
            reg.n_chart(),
            p
        )));
    }
    let n = reg.len();
    let mut acc = Poly::zero(n);
    for (j, hj) in h.entries().iter().enumerate() {
        if j == i {
            acc = acc + hj.clone();
        } else {
            acc = acc + hj * &Poly::var(n, reg.chart(j));
        }
    }
    Ok(acc)
}

pub fn rho_module(a: &GenMatrix, i: usize, reg: &VarRegistry) -> Result<IdealGens> {
    let gens = a
        .columns()
        .iter()
        .map(|c| rho_chart(c, i, reg))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdealGens::new(a.nvars(), gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::parse_poly;
    use std::sync::Arc;

    fn reg() -> Arc<VarRegistry> {
        VarRegistry::builder()
            .base(&["x", "y"])
            .generic(&["a", "b"])
            .chart_count(2)
            .build()
            .unwrap()
    }

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    fn mat(rows: &[&[&str]], reg: &VarRegistry) -> GenMatrix {
        GenMatrix::from_rows(
            reg.len(),
            rows.iter()
                .map(|r| r.iter().map(|s| p(s, reg)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn example(reg: &VarRegistry) -> GenMatrix {
        mat(&[&["x", "0", "y"], &["y", "x", "0"]], reg)
    }

    fn hvec(reg: &VarRegistry) -> PolyVec {
        PolyVec(vec![p("x", reg), p("3*y", reg)])
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert_eq!(binomial(9, 4), 126);
    }

    #[test]
    fn determinant_examples() {
        let reg = reg();
        assert_eq!(determinant(&mat(&[&["x", "0"], &["y", "x"]], &reg)).unwrap(), p("x^2", &reg));
        let id = mat(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]], &reg);
        assert!(determinant(&id).unwrap().is_one());
        assert!(determinant(&mat(&[&["x", "y"], &["x", "y"]], &reg)).unwrap().is_zero());
        assert!(matches!(determinant(&example(&reg)), Err(Error::Shape(_))));
    }

    #[test]
    fn cofactor_and_bareiss_agree_on_5x5() {
        let reg = reg();
        let rows: Vec<Vec<Poly>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| p(&format!("{}*x^{} + {}*y - {}", i + 1, (i * j) % 3, j, (i + j) % 4), &reg))
                    .collect()
            })
            .collect();
        let a = det_cofactor(&rows, reg.len());
        let b = det_bareiss(rows, reg.len());
        assert_eq!(a, b);
    }

    #[test]
    fn minors_of_example() {
        let reg = reg();
        let m = example(&reg);
        let j2 = minors_ideal(&m, 2).unwrap();
        assert_eq!(j2.len(), 3);
        assert_eq!(j2.gens, vec![p("x^2", &reg), p("-y^2", &reg), p("-x*y", &reg)]);
        assert!(minors_ideal(&m, 0).unwrap().gens[0].is_one());
        assert!(minors_ideal(&m, 3).is_err());
        let aug = augment(&hvec(&reg), &m).unwrap();
        assert_eq!(minors_ideal(&aug, 2).unwrap().len(), 6);
    }

    #[test]
    fn augment_places_h_first() {
        let reg = reg();
        let aug = augment(&hvec(&reg), &example(&reg)).unwrap();
        assert_eq!(
            aug,
            mat(&[&["x", "x", "0", "y"], &["3*y", "y", "x", "0"]], &reg)
        );
        assert!(augment(&PolyVec(vec![p("x", &reg)]), &example(&reg)).is_err());
        let zero = augment(&PolyVec::zero(reg.len(), 2), &example(&reg)).unwrap();
        let j = minors_ideal(&zero, 2).unwrap();
        for g in minors_ideal(&example(&reg), 2).unwrap().gens {
            assert!(j.gens.contains(&g));
        }
        let again = augment(example(&reg).column(0), &example(&reg)).unwrap();
        assert_eq!(generic_rank(&again, &reg).rank, 2);
    }

    #[test]
    fn generic_rank_examples() {
        let reg = reg();
        assert_eq!(generic_rank(&example(&reg), &reg).rank, 2);
        assert_eq!(generic_rank(&GenMatrix::zero(reg.len(), 3, 2), &reg).rank, 0);
        let info = generic_rank(&mat(&[&["a - b", "0"], &["0", "x"]], &reg), &reg);
        assert_eq!(info.rank, 2);
        assert_eq!(info.side_conditions.len(), 1);
        assert_eq!(info.side_conditions[0].poly(), &p("a - b", &reg));
        let dep = mat(&[&["x", "x*y"], &["y", "y^2"]], &reg);
        assert_eq!(generic_rank(&dep, &reg).rank, 1);
    }

    #[test]
    fn cofactor_functional_examples() {
        let reg = reg();
        let m = example(&reg);
        let idx = KIndexPair::new(vec![0, 1], vec![0, 1]).unwrap();
        let psi = cofactor_functional(&m, &idx).unwrap();
        assert_eq!(psi, PolyVec(vec![p("y", &reg), p("-x", &reg)]));
        assert_eq!(psi.dot(&hvec(&reg)).unwrap(), p("-2*x*y", &reg));
        assert!(psi.dot(m.column(0)).unwrap().is_zero());
        let bad = KIndexPair::new(vec![0, 1], vec![1, 2]).unwrap();
        assert!(matches!(cofactor_functional(&m, &bad), Err(Error::Precondition(_))));

        let one = mat(&[&["x"]], &reg);
        let psi = cofactor_functional(&one, &KIndexPair::new(vec![0], vec![0]).unwrap()).unwrap();
        assert!(psi.0[0].is_one());
        assert_eq!(all_cofactor_functionals(&m, 2).unwrap().len(), 3);
    }

    #[test]
    fn rho_examples() {
        let reg = reg();
        assert_eq!(rho_chart(&hvec(&reg), 0, &reg).unwrap(), p("x + 3*y*T2", &reg));
        let e2 = PolyVec::unit(reg.len(), 2, 1);
        assert!(rho_chart(&e2, 1, &reg).unwrap().is_one());
        let rho = rho_module(&example(&reg), 1, &reg).unwrap();
        assert_eq!(rho.gens, vec![p("x*T1 + y", &reg), p("x", &reg), p("y*T1", &reg)]);
        assert!(rho_chart(&hvec(&reg), 2, &reg).is_err());
    }
}
