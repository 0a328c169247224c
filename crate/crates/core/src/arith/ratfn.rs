//! Rational functions in one variable over the rationals.
//!
//! Values are kept canonical: monic denominator, coprime numerator and
//! denominator, zero stored as `0/1`. Two computations that reach the same
//! function therefore produce identical representations, and `==` is
//! structural equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::poly::Poly;
use super::scalar::{Field, Rat, Ring};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RatFn {
    /// Normalizing constructor. Fails with `DivisionByZero` on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFn::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.exact_div(&g), den.exact_div(&g))
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFn { num, den }
        } else {
            let inv = lc.recip();
            RatFn {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// The base variable.
    pub fn x() -> Self {
        Self::from_poly(Poly::x())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The value if this is a constant function.
    pub fn as_constant(&self) -> Option<Rat> {
        self.is_constant().then(|| self.num.coeff(0))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &RatFn) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return RatFn::zero();
        }
        RatFn {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = RatFn::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Derivative by the quotient rule.
    pub fn diff(&self) -> Self {
        if self.den.is_constant() {
            return RatFn {
                num: self.num.derivative(),
                den: self.den.clone(),
            };
        }
        let num = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::normalized(num, &self.den * &self.den)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x0: &Rat) -> Result<Rat> {
        let d = self.den.eval(x0);
        if d.is_zero() {
            return Err(Error::PoleAtPoint {
                point: x0.to_string(),
            });
        }
        Ok(self.num.eval(x0) / d)
    }

    pub fn has_pole_at(&self, x0: &Rat) -> bool {
        self.den.eval(x0).is_zero()
    }

    /// `a(t^m)` as a function of the new variable `t`.
    pub fn substitute_power(&self, m: usize) -> Self {
        assert!(m >= 1, "substitution exponent must be positive");
        RatFn {
            num: self.num.compose_power(m),
            den: self.den.compose_power(m),
        }
    }

    /// `deg num - deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        Some(dn - self.den.degree().unwrap_or(0) as i64)
    }

    pub fn parse(s: &str, var: &str) -> Result<Self> {
        super::parse::parse_ratfn(s, var)
    }

    /// Prints `num/den` scaled to integer coefficients, e.g. `(x^2+1)/(2*x)`.
    pub fn display(&self, var: &str) -> String {
        if self.den.is_one() {
            return self.num.display(var);
        }
        let k = self
            .num
            .coeffs()
            .iter()
            .chain(self.den.coeffs())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let k = Rat::from_integer(k);
        let (num, den) = (self.num.scale(&k), self.den.scale(&k));
        let mut n = num.display(var);
        if num.term_count() > 1 {
            n = format!("({n})");
        }
        let mut d = den.display(var);
        if den.term_count() > 1 || !den.leading_coeff().is_one() {
            d = format!("({d})");
        }
        format!("{n}/{d}")
    }
}

pub fn rf_arith(a: &RatFn, b: &RatFn, op: ArithOp) -> Result<RatFn> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn::from_poly(Poly::one())
    }
}

impl From<Rat> for RatFn {
    fn from(c: Rat) -> Self {
        RatFn::constant(c)
    }
}

impl From<Poly> for RatFn {
    fn from(p: Poly) -> Self {
        RatFn::from_poly(p)
    }
}

impl<'a> Add<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFn::normalized(&self.num + &rhs.num, self.den.clone());
        }
        let g = self.den.gcd(&rhs.den);
        let l = self.den.exact_div(&g);
        let r = rhs.den.exact_div(&g);
        let num = &(&self.num * &r) + &(&rhs.num * &l);
        RatFn::normalized(num, &self.den * &r)
    }
}

impl<'a> Sub<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        if self.is_zero() || rhs.is_zero() {
            return RatFn::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFn::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel; the result is already canonical.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let num = &self.num.exact_div(&g1) * &rhs.num.exact_div(&g2);
        let den = &self.den.exact_div(&g2) * &rhs.den.exact_div(&g1);
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFn { num, den }
        } else {
            RatFn::normalized(num, den)
        }
    }
}

impl<'a> Div<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    /// Panics on a zero divisor; use [`RatFn::checked_div`] to get an error.
    fn div(self, rhs: &RatFn) -> RatFn {
        self.checked_div(rhs)
            .expect("rational function division by zero")
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        -&self
    }
}

macro_rules! forward_by_value {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFn> for RatFn {
            type Output = RatFn;
            fn $m(self, rhs: RatFn) -> RatFn {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a RatFn> for RatFn {
            type Output = RatFn;
            fn $m(self, rhs: &RatFn) -> RatFn {
                (&self).$m(rhs)
            }
        }
    };
}
forward_by_value!(Add, add);
forward_by_value!(Sub, sub);
forward_by_value!(Mul, mul);
forward_by_value!(Div, div);

impl Ring for RatFn {
    fn from_int(n: i64) -> Self {
        RatFn::constant(Rat::from_int(n))
    }
}

impl Field for RatFn {}
