//! Exact computations around the double of a module: minor ideals, cofactor
//! functionals, integral-closure tests along curves and the three Lipschitz
//! saturations `S1 ⊆ S2 ⊆ S3` of a submodule of `O^p`.
//!
//! Everything works over a polynomial ring with rational coefficients. Local
//! statements are made at the origin; genericity in auxiliary parameters is
//! carried as explicit [`ring::SideCondition`]s.

pub mod closure;
pub mod double;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod ring;
pub mod saturation;
pub mod verify;

pub use error::{Error, Result};
