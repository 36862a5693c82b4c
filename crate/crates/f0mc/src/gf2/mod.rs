//! GF(2) bit vectors and matrices, affine-system solving, and GF(2^n) field
//! arithmetic. Everything here is immutable after construction and safe to
//! share across threads; the solvers are pure functions.

mod bits;
mod field;
mod matrix;

pub use bits::BitString;
pub use field::{field_modulus, gf2n_poly_eval, is_irreducible, Gf2nElement};
pub use matrix::{enumerate_solutions, gaussian_solve, AffineSystem, BitMatrix, SolutionSpace};
