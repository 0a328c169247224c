#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use redform::arith::{rat, MatQ, MatRF, Matrix, Poly, Rat, RatFn};
use redform::diffsys::DiffSystem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rf(s: &str, var: &str) -> RatFn {
    RatFn::parse(s, var).unwrap()
}

pub fn mat(var: &str, rows: &[&[&str]]) -> MatRF {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|s| rf(s, var)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn q(rows: &[&[i64]]) -> MatQ {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn example() -> DiffSystem {
    DiffSystem::new("x", mat("x", &[&["0", "1"], &["x", "1/(2*x)"]])).unwrap()
}

pub fn n1() -> MatRF {
    mat("x", &[&["0", "1/x"], &["1", "0"]])
}

pub fn rand_poly(r: &mut ChaCha8Rng, deg: usize, bound: i64) -> Poly {
    Poly::new(
        (0..=deg)
            .map(|_| rat(r.gen_range(-bound..=bound)))
            .collect(),
    )
}

/// Random rational function with numerator and denominator degree ≤ `deg`;
/// about a third are polynomials and some are zero.
pub fn rand_ratfn(r: &mut ChaCha8Rng, deg: usize) -> RatFn {
    let nd = r.gen_range(0..=deg);
    let num = rand_poly(r, nd, 3);
    if r.gen_bool(0.35) {
        return RatFn::from_poly(num);
    }
    loop {
        let dd = r.gen_range(1..=deg.max(1));
        let den = rand_poly(r, dd, 3);
        if let Ok(f) = RatFn::new(num.clone(), den) {
            return f;
        }
    }
}

pub fn rand_matrix(r: &mut ChaCha8Rng, n: usize, deg: usize) -> MatRF {
    Matrix::from_fn(n, n, |_, _| rand_ratfn(r, deg))
}

pub fn rand_invertible(r: &mut ChaCha8Rng, n: usize, deg: usize) -> MatRF {
    loop {
        let p = rand_matrix(r, n, deg);
        if !p.determinant().is_zero() {
            return p;
        }
    }
}

pub fn rand_poly_matrix(r: &mut ChaCha8Rng, n: usize, deg: usize) -> MatRF {
    Matrix::from_fn(n, n, |_, _| RatFn::from_poly(rand_poly(r, deg, 3)))
}

pub fn rand_invertible_poly(r: &mut ChaCha8Rng, n: usize, deg: usize) -> MatRF {
    loop {
        let p = rand_poly_matrix(r, n, deg);
        if !p.determinant().is_zero() {
            return p;
        }
    }
}

pub fn rand_const(r: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> MatQ {
    Matrix::from_fn(rows, cols, |_, _| rat(r.gen_range(-bound..=bound)))
}

pub fn rand_invertible_const(r: &mut ChaCha8Rng, n: usize) -> MatQ {
    loop {
        let m = rand_const(r, n, n, 3);
        if !m.determinant().is_zero() {
            return m;
        }
    }
}

/// Random upper triangular constant matrix.
pub fn rand_upper(r: &mut ChaCha8Rng, n: usize) -> MatQ {
    Matrix::from_fn(n, n, |i, j| {
        if j >= i {
            rat(r.gen_range(-3..=3))
        } else {
            Rat::zero()
        }
    })
}

pub fn const_vec(v: &[Rat]) -> Vec<RatFn> {
    v.iter().cloned().map(RatFn::constant).collect()
}

pub fn vec_id(n: usize) -> Vec<RatFn> {
    (0..n * n)
        .map(|k| {
            if k / n == k % n {
                RatFn::one()
            } else {
                RatFn::zero()
            }
        })
        .collect()
}

pub fn rank_rf(dim: usize, vs: &[Vec<RatFn>]) -> usize {
    redform::arith::matrix::vector_rank(dim, vs)
}
