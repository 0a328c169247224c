use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rationals, the constant field.
pub type Rat = BigRational;

/// Commutative ring with unit. Matrix code and the construction functors are
/// generic over this so the same routines serve rational functions, rational
/// constants and truncated power series.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring + Div<Output = Self> {}

impl Ring for Rat {
    fn from_int(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
}

impl Field for Rat {}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}
