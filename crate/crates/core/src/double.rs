//! Doubles of vectors and modules over `X × X`.
//!
//! Base variables `z_i` are sent to their primed copies `z'_i` by the second
//! projection. Family parameters and generic parameters are shared by both
//! factors and are never primed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{GenMatrix, IdealGens};
use crate::ring::{Assignment, Poly, PolyVec, Var, VarKind, VarRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `(g_j)_D` and `(0, (z_i − z'_i)·g'_j)`.
    B,
    /// `(g_j)_D` and `((z_i − z'_i)·g_j, 0)`.
    BPrime,
    /// `(g_j)_D` and `(z_i·g_j)_D`.
    BDoublePrime,
}

/// Where a column of a doubled matrix comes from. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnTag {
    Doubled { generator: usize },
    Correction { var: usize, generator: usize },
    TopCorrection { var: usize, generator: usize },
    ZMultiple { var: usize, generator: usize },
}

impl ColumnTag {
    pub fn describe(&self, reg: &VarRegistry) -> String {
        let z = |i: usize| reg.name(reg.base(i)).to_string();
        match *self {
            ColumnTag::Doubled { generator } => format!("(g{})_D", generator + 1),
            ColumnTag::Correction { var, generator } => {
                format!("(0, ({}-{}')*g{}')", z(var), z(var), generator + 1)
            }
            ColumnTag::TopCorrection { var, generator } => {
                format!("(({}-{}')*g{}, 0)", z(var), z(var), generator + 1)
            }
            ColumnTag::ZMultiple { var, generator } => {
                format!("({}*g{})_D", z(var), generator + 1)
            }
        }
    }

    pub fn is_correction(&self) -> bool {
        !matches!(self, ColumnTag::Doubled { .. })
    }
}

/// Generator matrix of a double with `2p` rows and one tag per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubledMatrix {
    pub matrix: GenMatrix,
    pub tags: Vec<ColumnTag>,
    pub variant: Variant,
}

impl DoubledMatrix {
    pub fn half_rows(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

/// The second projection: every base variable goes to its primed copy.
pub fn prime_assignment(reg: &VarRegistry) -> Assignment {
    let n = reg.len();
    let mut a = Assignment::identity(n);
    for i in 0..reg.n_base() {
        a.set(reg.base(i), Poly::var(n, reg.primed(i))).unwrap();
    }
    a
}

fn check_unprimed(f: &Poly, reg: &VarRegistry) -> Result<()> {
    for v in f.support() {
        match reg.kind(v) {
            VarKind::Base | VarKind::Family | VarKind::Generic => {}
            k => {
                return Err(Error::Precondition(format!(
                    "cannot double an entry containing {:?} variable `{}`",
                    k,
                    reg.name(v)
                )))
            }
        }
    }
    Ok(())
}

pub fn prime_poly(f: &Poly, reg: &VarRegistry) -> Result<Poly> {
    check_unprimed(f, reg)?;
    f.substitute(&prime_assignment(reg))
}

pub fn prime_vector(h: &PolyVec, reg: &VarRegistry) -> Result<PolyVec> {
    h.0.iter().map(|f| prime_poly(f, reg)).collect::<Result<_>>().map(PolyVec)
}

/// `h_D = (h, h')`.
pub fn double_vector(h: &PolyVec, reg: &VarRegistry) -> Result<PolyVec> {
    let primed = prime_vector(h, reg)?;
    let mut out = h.0.clone();
    out.extend(primed.0);
    Ok(PolyVec(out))
}

/// `z_i − z'_i` as a polynomial.
pub fn diagonal_generator(reg: &VarRegistry, i: usize) -> Poly {
    let n = reg.len();
    &Poly::var(n, reg.base(i)) - &Poly::var(n, reg.primed(i))
}

pub fn diagonal_ideal(reg: &VarRegistry) -> IdealGens {
    IdealGens::new(reg.len(), (0..reg.n_base()).map(|i| diagonal_generator(reg, i)).collect())
}

/// All products of `k` diagonal generators, one per multiset of indices.
pub fn diagonal_ideal_power(reg: &VarRegistry, k: usize) -> IdealGens {
    let n = reg.n_base();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        out.push(
            idx.iter()
                .fold(Poly::one(reg.len()), |acc, &i| &acc * &diagonal_generator(reg, i)),
        );
        if k == 0 || n == 0 {
            break;
        }
        let Some(pos) = (0..k).rev().find(|&j| idx[j] + 1 < n) else {
            break;
        };
        let v = idx[pos] + 1;
        for x in &mut idx[pos..] {
            *x = v;
        }
    }
    if n == 0 && k > 0 {
        out.clear();
    }
    IdealGens::new(reg.len(), out)
}

pub fn double_module(a: &GenMatrix, variant: Variant, reg: &VarRegistry) -> Result<DoubledMatrix> {
    let p = a.nrows();
    let r = a.ncols();
    let nv = reg.len();
    let doubled: Vec<PolyVec> = a
        .columns()
        .iter()
        .map(|g| double_vector(g, reg))
        .collect::<Result<_>>()?;
    let mut cols = doubled.clone();
    let mut tags: Vec<ColumnTag> = (0..r).map(|generator| ColumnTag::Doubled { generator }).collect();
    for i in 0..reg.n_base() {
        let d = diagonal_generator(reg, i);
        for (j, dj) in doubled.iter().enumerate() {
            let col = match variant {
                Variant::B => {
                    let mut v = vec![Poly::zero(nv); p];
                    v.extend(dj.0[p..].iter().map(|e| e * &d));
                    PolyVec(v)
                }
                Variant::BPrime => {
                    let mut v: Vec<Poly> = dj.0[..p].iter().map(|e| e * &d).collect();
                    v.extend(std::iter::repeat_n(Poly::zero(nv), p));
                    PolyVec(v)
                }
                Variant::BDoublePrime => {
                    let z = Poly::var(nv, reg.base(i));
                    double_vector(&a.column(j).scale(&z), reg)?
                }
            };
            cols.push(col);
            tags.push(match variant {
                Variant::B => ColumnTag::Correction { var: i, generator: j },
                Variant::BPrime => ColumnTag::TopCorrection { var: i, generator: j },
                Variant::BDoublePrime => ColumnTag::ZMultiple { var: i, generator: j },
            });
        }
    }
    Ok(DoubledMatrix {
        matrix: GenMatrix::from_columns(nv, 2 * p, cols)?,
        tags,
        variant,
    })
}

/// Double relative to a family: the listed parameters are shared by both
/// factors and contribute no diagonal generators.
pub fn relative_double(a: &GenMatrix, family_params: &[Var], reg: &VarRegistry) -> Result<DoubledMatrix> {
    for &v in family_params {
        if v.0 >= reg.len() {
            return Err(Error::RegistryMismatch(format!("variable #{} not in registry", v.0)));
        }
        if reg.kind(v) != VarKind::Family {
            return Err(Error::Precondition(format!(
                "`{}` is not a family parameter and would be primed",
                reg.name(v)
            )));
        }
    }
    double_module(a, Variant::B, reg)
}

/// `I_D` for an ideal, as the double of the rank-one module it generates.
pub fn double_ideal(i: &IdealGens, reg: &VarRegistry) -> Result<DoubledMatrix> {
    double_module(&i.as_matrix(), Variant::B, reg)
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
            .build()
            .unwrap()
    }

    fn p(s: &str, reg: &VarRegistry) -> Poly {
        parse_poly(s, reg).unwrap()
    }

    fn example(reg: &VarRegistry) -> GenMatrix {
        GenMatrix::from_rows(
            reg.len(),
            vec![
                vec![p("x", reg), p("0", reg), p("y", reg)],
                vec![p("y", reg), p("x", reg), p("0", reg)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn double_vector_examples() {
        let reg = reg();
        let h = PolyVec(vec![p("x", &reg), p("3*y", &reg)]);
        let d = double_vector(&h, &reg).unwrap();
        assert_eq!(d.to_strings(&reg), vec!["x", "3*y", "x'", "3*y'"]);
        assert!(double_vector(&PolyVec::zero(reg.len(), 2), &reg).unwrap().is_zero());
        let primed = PolyVec(vec![p("x'", &reg)]);
        assert!(matches!(double_vector(&primed, &reg), Err(Error::Precondition(_))));
    }

    #[test]
    fn lemma_one_identity_on_symbolic_input() {
        let reg = reg();
        let alpha = p("x^2 + a*y", &reg);
        let h = PolyVec(vec![p("x*y", &reg), p("y - 2", &reg)]);
        let lhs = double_vector(&h.scale(&alpha), &reg).unwrap();
        let da = &alpha - &prime_poly(&alpha, &reg).unwrap();
        let hp = prime_vector(&h, &reg).unwrap();
        let mut corr = PolyVec::zero(reg.len(), 2).0;
        corr.extend(hp.scale(&da).0);
        let rhs = double_vector(&h, &reg).unwrap().scale(&alpha).sub(&PolyVec(corr));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn variant_b_layout() {
        let reg = reg();
        let d = double_module(&example(&reg), Variant::B, &reg).unwrap();
        assert_eq!(d.matrix.nrows(), 4);
        assert_eq!(d.matrix.ncols(), 9);
        assert_eq!(d.tags[3], ColumnTag::Correction { var: 0, generator: 0 });
        assert_eq!(d.tags[8], ColumnTag::Correction { var: 1, generator: 2 });
        assert_eq!(
            d.matrix.column(8).to_strings(&reg),
            vec!["0", "0", "y*y' - y'^2", "0"]
        );
        assert_eq!(
            d.matrix.column(6).to_strings(&reg),
            vec!["0", "0", "y*x' - x'*y'", "y*y' - y'^2"]
        );
        assert_eq!(d.tags[6].describe(&reg), "(0, (y-y')*g1')");
    }

    #[test]
    fn single_generator_double() {
        let reg = VarRegistry::builder().base(&["z"]).build().unwrap();
        let a = GenMatrix::from_rows(reg.len(), vec![vec![Poly::one(reg.len())]]).unwrap();
        let d = double_module(&a, Variant::B, &reg).unwrap();
        assert_eq!(d.matrix.column(0).to_strings(&reg), vec!["1", "1"]);
        assert_eq!(d.matrix.column(1).to_strings(&reg), vec!["0", "z - z'"]);
    }

    #[test]
    fn diagonal_powers() {
        let reg = reg();
        assert_eq!(diagonal_ideal_power(&reg, 1).gens, vec![p("x - x'", &reg), p("y - y'", &reg)]);
        assert!(diagonal_ideal_power(&reg, 0).gens[0].is_one());
        let sq = diagonal_ideal_power(&reg, 2);
        assert_eq!(
            sq.gens,
            vec![
                p("(x - x')^2", &reg),
                p("(x - x')*(y - y')", &reg),
                p("(y - y')^2", &reg)
            ]
        );
        assert_eq!(diagonal_ideal_power(&reg, 3).len(), 4);
    }

    #[test]
    fn relative_double_shares_family() {
        let reg = VarRegistry::builder().base(&["x", "y"]).family(&["t"]).curve("s").build().unwrap();
        let f = p("1/3*x^3 - t^2*x*y^4 + y^6", &reg);
        let jm = GenMatrix::from_rows(
            reg.len(),
            vec![vec![f.partial_derivative(reg.base(0)), f.partial_derivative(reg.base(1))]],
        )
        .unwrap();
        let d = relative_double(&jm, &[reg.family(0)], &reg).unwrap();
        assert_eq!(d.matrix.nrows(), 2);
        assert_eq!(d.matrix.ncols(), 6);
        assert_eq!(d.matrix.get(1, 0), &p("x'^2 - t^2*y'^4", &reg));
        assert!(relative_double(&jm, &[reg.base(0)], &reg).is_err());
    }
}
