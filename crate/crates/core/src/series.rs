//! Truncated power-series fundamental matrices at ordinary points.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::arith::{MatQ, Matrix, Rat, RatFn, Ring};
use crate::constr::{constr_group_with, Construction};
use crate::diffsys::{is_ordinary_point, DiffSystem};
use crate::error::{check_dim, Error, Result};

pub const DEFAULT_ORDER: usize = 12;

/// Power series in `s = x − x0`, known modulo `s^prec`.
///
/// `prec == usize::MAX` marks an exact (polynomial) value; arithmetic keeps
/// the smaller precision of its operands.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Series {
    coeffs: Vec<Rat>,
    prec: usize,
}

impl Series {
    pub fn new(mut coeffs: Vec<Rat>, prec: usize) -> Self {
        coeffs.truncate(prec);
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Series { coeffs, prec }
    }

    pub fn exact(coeffs: Vec<Rat>) -> Self {
        Series::new(coeffs, usize::MAX)
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn truncate(&self, prec: usize) -> Series {
        Series::new(self.coeffs.clone(), prec.min(self.prec))
    }

    pub fn derivative(&self) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rat::from_int(k as i64))
            .collect();
        Series::new(coeffs, self.prec.saturating_sub(1))
    }

    /// Taylor expansion of `f` at `x0` modulo `(x − x0)^prec`.
    pub fn taylor(f: &RatFn, x0: &Rat, prec: usize) -> Result<Series> {
        let num = f.num().taylor_shift(x0);
        let den = f.den().taylor_shift(x0);
        let d0 = den.coeff(0);
        if d0.is_zero() {
            return Err(Error::PoleAtPoint {
                point: x0.to_string(),
            });
        }
        let d0_inv = d0.recip();
        let mut out: Vec<Rat> = Vec::with_capacity(prec);
        for k in 0..prec {
            let mut acc = num.coeff(k);
            for j in 1..=k.min(den.degree().unwrap_or(0)) {
                acc -= den.coeff(j) * &out[k - j];
            }
            out.push(acc * &d0_inv);
        }
        Ok(Series::new(out, prec))
    }
}

impl Zero for Series {
    fn zero() -> Self {
        Series::exact(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for Series {
    fn one() -> Self {
        Series::exact(vec![Rat::one()])
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        let prec = self.prec.min(rhs.prec);
        let n = self.coeffs.len().max(rhs.coeffs.len()).min(prec);
        Series::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect(), prec)
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        self + (-rhs)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        if self.is_zero() || rhs.is_zero() {
            return Series::new(Vec::new(), self.prec.min(rhs.prec));
        }
        let prec = self.prec.min(rhs.prec);
        let n = (self.coeffs.len() + rhs.coeffs.len() - 1).min(prec);
        let mut out = vec![Rat::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n.saturating_sub(i)) {
                out[i + j] += a * b;
            }
        }
        Series::new(out, prec)
    }
}

impl Ring for Series {
    fn from_int(n: i64) -> Self {
        Series::exact(vec![Rat::from_int(n)])
    }
}

/// `Σ_k C_k (x − x0)^k` for `k < order`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMat {
    pub x0: Rat,
    pub order: usize,
    pub coeffs: Vec<MatQ>,
}

impl SeriesMat {
    pub fn from_matrix(x0: Rat, order: usize, m: &Matrix<Series>) -> Self {
        let coeffs = (0..order).map(|k| m.map(|s| s.coeff(k))).collect();
        SeriesMat { x0, order, coeffs }
    }

    pub fn to_matrix(&self) -> Matrix<Series> {
        let c0 = &self.coeffs[0];
        Matrix::from_fn(c0.rows(), c0.cols(), |i, j| {
            Series::new(
                self.coeffs.iter().map(|c| c.get(i, j).clone()).collect(),
                self.order,
            )
        })
    }

    pub fn value_at_center(&self) -> &MatQ {
        &self.coeffs[0]
    }

    /// Matrix inverse, valid when the constant coefficient is invertible.
    pub fn inverse(&self) -> Result<SeriesMat> {
        let d0 = self.coeffs[0].try_inverse()?;
        let n = d0.rows();
        let mut inv: Vec<MatQ> = vec![d0.clone()];
        for k in 1..self.order {
            let mut acc = MatQ::zeros(n, n);
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul(&inv[k - j]));
            }
            inv.push(d0.mul(&acc).neg());
        }
        Ok(SeriesMat {
            x0: self.x0.clone(),
            order: self.order,
            coeffs: inv,
        })
    }
}

/// Taylor coefficient matrices of a rational matrix at `x0`.
pub fn taylor_matrix(a: &Matrix<RatFn>, x0: &Rat, order: usize) -> Result<Matrix<Series>> {
    a.try_map(|e| Series::taylor(e, x0, order))
}

/// The fundamental matrix `Û` of `∂U = A·U` with `Û(x0) = Id`, modulo
/// `(x − x0)^order`, from `(k+1)·C_{k+1} = Σ_{i+j=k} A_i·C_j`.
pub fn fundamental_series(sys: &DiffSystem, x0: &Rat, order: usize) -> Result<SeriesMat> {
    if order == 0 {
        return Err(Error::InvalidInput(
            "series order must be at least 1".into(),
        ));
    }
    if !is_ordinary_point(sys, x0) {
        return Err(Error::PoleAtPoint {
            point: x0.to_string(),
        });
    }
    let n = sys.dim();
    let ta = taylor_matrix(sys.matrix(), x0, order)?;
    let a_coeffs: Vec<MatQ> = (0..order).map(|k| ta.map(|s| s.coeff(k))).collect();
    let mut c: Vec<MatQ> = vec![MatQ::identity(n)];
    for k in 0..order - 1 {
        let mut acc = MatQ::zeros(n, n);
        for i in 0..=k {
            acc = acc.add(&a_coeffs[i].mul(&c[k - i]));
        }
        c.push(acc.scale(&Rat::from_int(k as i64 + 1).recip()));
    }
    Ok(SeriesMat {
        x0: x0.clone(),
        order,
        coeffs: c,
    })
}

/// `∂Û − A·Û`, meaningful through order `order − 2`.
pub fn residual(sys: &DiffSystem, u: &SeriesMat) -> Result<Matrix<Series>> {
    let um = u.to_matrix();
    let ta = taylor_matrix(sys.matrix(), &u.x0, u.order)?;
    let du = um.map(Series::derivative);
    Ok(du.sub(&ta.mul(&um)).map(|s| s.truncate(u.order - 1)))
}

/// `Constr(Û)` as a truncated series matrix.
pub fn constr_series(c: &Construction, u: &SeriesMat) -> Result<SeriesMat> {
    let um = u.to_matrix();
    let g = if c.contains_dual() {
        let inv = u.inverse()?.to_matrix();
        constr_group_with(c, &um, Some(&inv))?
    } else {
        constr_group_with(c, &um, None)?
    };
    Ok(SeriesMat::from_matrix(u.x0.clone(), u.order, &g))
}

/// Whether `v(x) = Constr(Û)(x)·v(x0)` holds modulo `(x − x0)^order`.
pub fn series_eval_transport(
    sys: &DiffSystem,
    c: &Construction,
    x0: &Rat,
    v: &[RatFn],
    order: usize,
) -> Result<bool> {
    check_dim(c.dim(sys.dim())?, v.len())?;
    let u = fundamental_series(sys, x0, order)?;
    let g = constr_series(c, &u)?.to_matrix();
    let w: Vec<Series> = v
        .iter()
        .map(|e| e.eval(x0).map(|r| Series::exact(vec![r])))
        .collect::<Result<_>>()?;
    let rhs = g.mul_vec(&w);
    for (e, r) in v.iter().zip(rhs) {
        if Series::taylor(e, x0, order)? != r.truncate(order) {
            return Ok(false);
        }
    }
    Ok(true)
}
