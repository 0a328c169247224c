//! Exact tools for linear differential systems `∂y = A·y` over `Q(x)`:
//! tensor constructions, rational invariants, eigenrings, truncated
//! fundamental series, reduced-form criteria and reduction by
//! semi-invariant diagonalization.

pub mod arith;
pub mod error;

pub use error::{Error, Result};
pub mod constr;
pub mod diffsys;
pub mod io;
pub mod katz;
pub mod reduction;
pub mod series;
pub mod solutions;
