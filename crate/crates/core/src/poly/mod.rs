//! Exact multivariate polynomials and rational linear algebra.

mod factor;
mod matrix;
mod multipoly;
mod real;

pub use factor::{factor_restricted, poly_sqrt, Factor, Factorization};
pub use matrix::RationalMatrix;
pub use multipoly::{Monomial, MultiPoly, PolyParseError, Var};
pub use real::{quadratic_definiteness, quadratic_form_matrix, real_zero_reduction, symmetric_definiteness, Definiteness, UniPoly};
