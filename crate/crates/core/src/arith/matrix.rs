//! Dense row-major matrices over a [`Ring`], with exact elimination over a
//! [`Field`].

use std::fmt;

use super::ratfn::RatFn;
use super::scalar::{Field, Rat, Ring};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Matrix over the rational functions.
pub type MatRF = Matrix<RatFn>;
/// Matrix over the rational constants.
pub type MatQ = Matrix<Rat>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// A single column.
    pub fn column_vector(v: Vec<T>) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v,
        }
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<T>]) -> Result<Self> {
        for c in cols {
            check_dim(rows, c.len())?;
        }
        Ok(Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        Matrix::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    /// Elementary matrix `E_ij` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        m.set(i, j, T::one());
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.rows)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| c.clone() * a.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Kronecker product, row index `i·rows(other) + k`.
    pub fn kron(&self, other: &Self) -> Self {
        Matrix::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (i, k) = (r / other.rows, r % other.rows);
            let (j, l) = (c / other.cols, c % other.cols);
            self.get(i, j).clone() * other.get(k, l).clone()
        })
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        Matrix::from_fn(
            self.rows + other.rows,
            self.cols + other.cols,
            |i, j| match (i < self.rows, j < self.cols) {
                (true, true) => self.get(i, j).clone(),
                (false, false) => other.get(i - self.rows, j - self.cols).clone(),
                _ => T::zero(),
            },
        )
    }

    /// Row-major flattening.
    pub fn vectorize(&self) -> Vec<T> {
        self.data.clone()
    }

    pub fn from_vectorized(n: usize, v: &[T]) -> Result<Self> {
        Matrix::new(n, n, v.to_vec())
    }

    /// Characteristic polynomial `det(λI − M)` by Faddeev–LeVerrier,
    /// coefficients lowest degree first (monic, length n+1).
    pub fn charpoly(&self) -> Vec<T>
    where
        T: Field,
    {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Matrix::<T>::zeros(n, n);
        for k in 1..=n {
            let ident = Matrix::identity(n).scale(&coeffs[n - k + 1]);
            m = self.mul(&m).add(&ident);
            let am = self.mul(&m);
            coeffs[n - k] = -(am.trace() / T::from_int(k as i64));
        }
        coeffs
    }
}

/// Reduced row echelon form with pivot columns, pivoting on the first
/// nonzero entry in each column (lowest row index first).
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pub matrix: Matrix<T>,
    pub pivots: Vec<usize>,
}

impl<T: Field> Matrix<T> {
    pub fn rref(&self) -> Echelon<T> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = T::one() / m.get(r, c).clone();
            for j in c..m.cols {
                let v = m.get(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let pv = m.get(r, j);
                    if pv.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j).clone() - f.clone() * pv.clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = m.rows;
        let mut det = T::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return T::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = det * piv.clone();
            let inv = T::one() / piv;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone() * inv.clone();
                for j in c..n {
                    let v = m.get(i, j).clone() - f.clone() * m.get(c, j).clone();
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let e = aug.rref();
        if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| e.matrix.get(i, n + j).clone()))
    }

    pub fn try_inverse(&self) -> Result<Self> {
        self.inverse().ok_or(Error::SingularGauge)
    }

    /// Basis of the right kernel, one vector per free column, in the
    /// canonical form read off the reduced echelon matrix.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let e = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (r, &p) in e.pivots.iter().enumerate() {
                    v[p] = -e.matrix.get(r, f).clone();
                }
                v
            })
            .collect()
    }

    /// Some solution of `self · x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, b.len());
        let aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let e = aug.rref();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, &p) in e.pivots.iter().enumerate() {
            x[p] = e.matrix.get(r, self.cols).clone();
        }
        Some(x)
    }
}

/// Rank of a list of vectors over a field.
pub fn vector_rank<T: Field>(dim: usize, vs: &[Vec<T>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_fn(vs.len(), dim, |i, j| vs[i][j].clone()).rank()
}

/// Reduced echelon basis of the span of `vs` (rows of the RREF).
pub fn row_echelon_basis<T: Field>(dim: usize, vs: &[Vec<T>]) -> Vec<Vec<T>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let e = Matrix::from_fn(vs.len(), dim, |i, j| vs[i][j].clone()).rref();
    (0..e.pivots.len())
        .map(|r| e.matrix.row(r).to_vec())
        .collect()
}

pub fn to_ratfn(m: &MatQ) -> MatRF {
    m.map(|c| RatFn::constant(c.clone()))
}

impl MatRF {
    /// Entrywise derivative.
    pub fn diff(&self) -> Self {
        self.map(RatFn::diff)
    }

    pub fn substitute_power(&self, m: usize) -> Self {
        self.map(|a| a.substitute_power(m))
    }

    pub fn eval(&self, x0: &Rat) -> Result<MatQ> {
        self.try_map(|a| a.eval(x0))
    }

    /// The constant matrix, when every entry is constant.
    pub fn as_constant(&self) -> Option<MatQ> {
        self.try_map(|a| a.as_constant().ok_or(())).ok()
    }
}
