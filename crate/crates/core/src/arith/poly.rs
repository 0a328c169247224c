//! Dense univariate polynomials over the rationals.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::scalar::{Rat, Ring};

/// Polynomial with coefficients stored lowest degree first.
///
/// The coefficient vector never carries trailing zeros, so the zero
/// polynomial is the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Poly::monomial(Rat::one(), 1)
    }

    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    /// `x - a`
    pub fn linear_root(a: Rat) -> Self {
        Poly::new(vec![-a, Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lc_inv = divisor.leading_coeff().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    /// Division known to be exact; the remainder is discarded.
    pub fn exact_div(&self, divisor: &Poly) -> Poly {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let r = a.rem(&b).monic();
            a = b;
            b = r;
        }
        a
    }

    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(other);
        (self * &other.exact_div(&g)).monic()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rat::from_int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * x + c)
    }

    /// `p(x^m)`.
    pub fn compose_power(&self, m: usize) -> Poly {
        assert!(m >= 1);
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rat::zero(); (self.coeffs.len() - 1) * m + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * m] = c.clone();
        }
        Poly { coeffs }
    }

    /// `p(x + a)`, the expansion of `p` around `a`.
    pub fn taylor_shift(&self, a: &Rat) -> Poly {
        let shift = Poly::new(vec![a.clone(), Rat::one()]);
        self.coeffs.iter().rev().fold(Poly::zero(), |acc, c| {
            &(&acc * &shift) + &Poly::constant(c.clone())
        })
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Yun's squarefree decomposition of the monic part: pairs `(s_i, i)`
    /// with `s_i` squarefree, pairwise coprime and non-constant.
    pub fn squarefree_decomposition(&self) -> Vec<(Poly, usize)> {
        let f = self.monic();
        if f.is_constant() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.exact_div(&a0);
        let c = df.exact_div(&a0);
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while !b.is_constant() {
            let a = b.gcd(&d);
            let b_next = b.exact_div(&a);
            let c_next = d.exact_div(&a);
            d = &c_next - &b_next.derivative();
            if !a.is_constant() {
                out.push((a, i));
            }
            b = b_next;
            i += 1;
        }
        out
    }

    /// Multiplicity of `p` as a factor of `self` (`self` nonzero, `p` non-constant).
    pub fn valuation(&self, p: &Poly) -> usize {
        let mut q = self.clone();
        let mut k = 0;
        loop {
            let (quot, r) = q.div_rem(p);
            if !r.is_zero() {
                return k;
            }
            q = quot;
            k += 1;
        }
    }

    /// Integer coefficients with the same roots (denominators cleared,
    /// content removed, positive leading coefficient).
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if self.leading_coeff().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        if content.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| &c / &content * &sign).collect()
    }

    /// All distinct rational roots, in increasing order. `None` when the
    /// rational-root search is beyond the trial-division limit.
    pub fn rational_roots(&self) -> Option<Vec<Rat>> {
        if self.is_zero() {
            return None;
        }
        let mut ints = self.primitive_integer();
        let mut roots = Vec::new();
        let lead = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
        if lead > 0 {
            roots.push(Rat::zero());
            ints.drain(..lead);
        }
        if ints.len() > 1 {
            let p = Poly::new(ints.iter().map(|c| Rat::from_integer(c.clone())).collect());
            let num_divs = divisors(&ints[0])?;
            let den_divs = divisors(ints.last().unwrap())?;
            let mut seen = std::collections::BTreeSet::new();
            for u in &num_divs {
                for v in &den_divs {
                    for s in [1i64, -1] {
                        let cand = Rat::new(u * BigInt::from(s), v.clone());
                        if seen.insert(cand.clone()) && p.eval(&cand).is_zero() {
                            roots.push(cand);
                        }
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }

    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push(if neg { '-' } else { '+' });
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if k == 0 {
                write!(s, "{a}").unwrap();
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                write!(s, "{a}*{mono}").unwrap();
            }
        }
        s
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

const TRIAL_DIVISION_LIMIT: u64 = 1 << 22;

/// Positive divisors of a nonzero integer by trial division.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    if n.is_zero() {
        return None;
    }
    let m = n.to_u128()?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d: u128 = 1;
    while d * d <= m {
        if d as u64 > TRIAL_DIVISION_LIMIT {
            return None;
        }
        if m % d == 0 {
            small.push(BigInt::from(d));
            if d * d != m {
                large.push(BigInt::from(m / d));
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    debug_assert!(small.iter().all(|x| x.sign() == Sign::Plus));
    Some(small)
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rat::one())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_by_value {
    ($tr:ident, $m:ident, $t:ty) => {
        impl std::ops::$tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_by_value!(Add, add, Poly);
forward_by_value!(Sub, sub, Poly);
forward_by_value!(Mul, mul, Poly);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
