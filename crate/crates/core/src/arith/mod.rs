//! Exact arithmetic: rationals, dense polynomials, rational functions and
//! matrices over them.

pub mod matrix;
pub mod parse;
pub mod poly;
pub mod ratfn;
pub mod scalar;

pub use matrix::{MatQ, MatRF, Matrix};
pub use parse::parse_rat;
pub use poly::Poly;
pub use ratfn::{rf_arith, ArithOp, RatFn};
pub use scalar::{rat, ratio, Field, Rat, Ring};
