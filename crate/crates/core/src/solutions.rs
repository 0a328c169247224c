//! Rational solutions of `∂v = B·v` (invariants of constructions) and
//! verification of semi-invariant lines.
//!
//! Solutions are searched as `v = u/d` with `d` a denominator bound and `u`
//! a polynomial vector of bounded degree. The bound at a simple pole `p`
//! comes from the negative integer eigenvalues of the residue of `B` at `p`;
//! higher-order poles get the user cap. At infinity, when `B = O(1/x)`, the
//! integer eigenvalues of `lim x·B` bound the degree of `v`. When every
//! bound was derived rather than capped, the result is labeled complete.

use num_traits::{One, Zero};

use crate::arith::matrix::row_echelon_basis;
use crate::arith::{MatQ, MatRF, Matrix, Poly, Rat, RatFn, Ring};
use crate::constr::{constr_lie, Construction};
use crate::diffsys::{lcm_of_denominators, singularities, DiffSystem};
use crate::error::{check_dim, Error, Result};

pub const DEFAULT_NUM_DEG: usize = 30;
pub const DEFAULT_POLE_CAP: usize = 10;

/// Search limits for the rational solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Caps {
    /// Degree cap for the polynomial numerator `u`.
    pub num_deg: usize,
    /// Denominator exponent used at poles of order two or more.
    pub pole_cap: usize,
    /// Replaces the computed denominator bound.
    pub den_override: Option<Poly>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            num_deg: DEFAULT_NUM_DEG,
            pole_cap: DEFAULT_POLE_CAP,
            den_override: None,
        }
    }
}

impl Caps {
    pub fn with_num_deg(num_deg: usize) -> Self {
        Caps {
            num_deg,
            ..Caps::default()
        }
    }
}

/// Upper bound on `deg v = deg num − deg den` for solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthBound {
    Unknown,
    AtMost(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub denominator: Poly,
    pub growth: GrowthBound,
    /// Both the denominator and the growth bound are provably valid.
    pub complete: bool,
}

impl Bounds {
    /// Numerator degree implied for a given denominator, if known.
    pub fn numerator_degree(&self, den: &Poly) -> Option<usize> {
        match self.growth {
            GrowthBound::Unknown => None,
            GrowthBound::AtMost(e) => Some((den.degree().unwrap_or(0) as i64 + e).max(0) as usize),
        }
    }
}

/// Largest `k ≥ 0` such that `−k` is an eigenvalue of the residue at the
/// simple pole `p`, together with whether the answer is exact.
fn residue_exponent(b: &MatRF, p: &Poly, pole_cap: usize) -> (usize, bool) {
    let pf = RatFn::from_poly(p.clone());
    let scaled = b.map(|e| e * &pf);
    let mut exponent = 0;
    let mut exact = true;
    let mut rest = p.clone();
    if let Some(roots) = p.rational_roots() {
        for a in roots {
            rest = rest.exact_div(&Poly::linear_root(a.clone()));
            // residue at x = a of B is (B·p)(a) / p'(a)
            let dp = p.derivative().eval(&a);
            let Ok(r) = scaled.eval(&a) else {
                exact = false;
                continue;
            };
            let r = r.scale(&dp.recip());
            match negative_integer_eigenvalue(&r) {
                Some(k) => exponent = exponent.max(k),
                None => {
                    exact = false;
                    exponent = exponent.max(pole_cap);
                }
            }
        }
    }
    if !rest.is_constant() {
        // Irrational roots α of `rest`: −k is an eigenvalue of the residue at
        // α iff det(S + k·L·p′·I) vanishes at α, where S = L·B·p is a
        // polynomial matrix. The resultant with `rest` is a polynomial in k,
        // recovered by interpolation.
        let l = lcm_of_denominators(scaled.data());
        let lf = RatFn::from_poly(l.clone());
        let s_poly = scaled.map(|e| e * &lf);
        let shift = RatFn::from_poly(&l * &p.derivative());
        let n = b.rows();
        let points = n * rest.degree().unwrap_or(0) + 1;
        let values: Vec<Rat> = (0..points)
            .map(|k| {
                let kk = shift.scale(&Rat::from_int(k as i64));
                let m = Matrix::from_fn(n, n, |i, j| {
                    if i == j {
                        s_poly.get(i, j) + &kk
                    } else {
                        s_poly.get(i, j).clone()
                    }
                });
                resultant_mod(m.determinant().num(), &rest)
            })
            .collect();
        match interpolate(&values).rational_roots() {
            Some(roots) => {
                let top = roots
                    .iter()
                    .filter(|k| k.is_integer() && k > &&Rat::zero())
                    .filter_map(|k| num_traits::ToPrimitive::to_usize(&k.to_integer()))
                    .max()
                    .unwrap_or(0);
                exponent = exponent.max(top);
            }
            None => {
                exact = false;
                exponent = exponent.max(pole_cap);
            }
        }
    }
    (exponent, exact)
}

/// Resultant of `a mod m` and `m`, with `a mod m` taken at formal degree
/// `deg m − 1` so the value is polynomial in the coefficients of `a`.
fn resultant_mod(a: &Poly, m: &Poly) -> Rat {
    let dm = m.degree().expect("nonconstant modulus");
    let r = a.rem(m);
    let da = dm - 1;
    let size = da + dm;
    let sylvester = Matrix::from_fn(size, size, |i, j| {
        if i < dm {
            // row i holds r shifted by i, highest coefficient first
            j.checked_sub(i)
                .filter(|&o| o <= da)
                .map_or_else(Rat::zero, |o| r.coeff(da - o))
        } else {
            j.checked_sub(i - dm)
                .filter(|&o| o <= dm)
                .map_or_else(Rat::zero, |o| m.coeff(dm - o))
        }
    });
    sylvester.determinant()
}

/// Polynomial through `(k, values[k])` for `k = 0, 1, …`.
fn interpolate(values: &[Rat]) -> Poly {
    // Newton divided differences on the nodes 0..len
    let mut coef = values.to_vec();
    for level in 1..coef.len() {
        for i in (level..coef.len()).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / Rat::from_int(level as i64);
        }
    }
    let mut out = Poly::zero();
    for (i, c) in coef.iter().enumerate().rev() {
        out = &(&out * &Poly::linear_root(Rat::from_int(i as i64))) + &Poly::constant(c.clone());
    }
    out
}

/// Largest `k` with `−k` an eigenvalue (0 if none); `None` if the
/// integer-root search was not conclusive.
fn negative_integer_eigenvalue(r: &MatQ) -> Option<usize> {
    let roots = Poly::new(r.charpoly()).rational_roots()?;
    Some(
        roots
            .iter()
            .filter(|x| x.is_integer() && x < &&Rat::zero())
            .filter_map(|x| num_traits::ToPrimitive::to_usize(&(-x.to_integer())))
            .max()
            .unwrap_or(0),
    )
}

fn growth_bound(b: &MatRF) -> (GrowthBound, bool) {
    let report = singularities(&DiffSystem::new("x", b.clone()).expect("square"));
    match report.order_at_infinity {
        None => (GrowthBound::AtMost(0), true),
        Some(w) if w <= -1 => {
            let r = b.map(|e| {
                if e.degree() == Some(-1) {
                    e.num().leading_coeff() / e.den().leading_coeff()
                } else {
                    Rat::zero()
                }
            });
            match Poly::new(r.charpoly()).rational_roots() {
                Some(roots) => {
                    let top = roots
                        .iter()
                        .filter(|x| x.is_integer())
                        .filter_map(|x| num_traits::ToPrimitive::to_i64(&x.to_integer()))
                        .max()
                        .unwrap_or(-1);
                    (GrowthBound::AtMost(top), true)
                }
                None => (GrowthBound::Unknown, false),
            }
        }
        Some(_) => (GrowthBound::Unknown, false),
    }
}

/// Denominator and growth bounds for rational solutions of `sys`.
pub fn bounds(sys: &DiffSystem, pole_cap: usize) -> Bounds {
    let report = singularities(sys);
    let mut den = Poly::one();
    let mut complete = true;
    for (p, order) in &report.finite_places {
        if *order >= 2 {
            den = &den * &p.pow(pole_cap);
            complete = false;
        } else {
            let (k, exact) = residue_exponent(sys.matrix(), p, pole_cap);
            den = &den * &p.pow(k);
            complete &= exact;
        }
    }
    let (growth, growth_ok) = growth_bound(sys.matrix());
    Bounds {
        denominator: den,
        growth,
        complete: complete && growth_ok,
    }
}

/// Universal denominator for rational solutions.
pub fn denominator_bound(sys: &DiffSystem, pole_cap: usize) -> Poly {
    bounds(sys, pole_cap).denominator
}

/// A space of rational solutions over the constants.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSpace {
    /// Length of each solution vector.
    pub dim: usize,
    /// Canonical echelon basis, see [`canonical_basis`].
    pub basis: Vec<Vec<RatFn>>,
    pub denominator: Poly,
    pub num_deg_cap: usize,
    /// No solution outside the search bounds can exist.
    pub complete: bool,
}

impl SolutionSpace {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Reduced echelon basis over the constants of the span of `vs`.
///
/// All vectors are written over the lcm `D` of their denominators; the
/// numerator coefficients are ordered by (component, degree) and reduced,
/// pivoting on the lowest index with pivots normalized to 1. The result
/// depends only on the span.
pub fn canonical_basis(dim: usize, vs: &[Vec<RatFn>]) -> Vec<Vec<RatFn>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let d = lcm_of_denominators(vs.iter().flatten());
    let df = RatFn::from_poly(d.clone());
    let nums: Vec<Vec<Poly>> = vs
        .iter()
        .map(|v| {
            v.iter()
                .map(|e| {
                    let u = e * &df;
                    debug_assert!(u.is_polynomial());
                    u.num().clone()
                })
                .collect()
        })
        .collect();
    let width = nums
        .iter()
        .flatten()
        .filter_map(Poly::degree)
        .max()
        .unwrap_or(0)
        + 1;
    let flat: Vec<Vec<Rat>> = nums
        .iter()
        .map(|u| {
            let mut row = vec![Rat::zero(); dim * width];
            for (i, p) in u.iter().enumerate() {
                for (k, c) in p.coeffs().iter().enumerate() {
                    row[i * width + k] = c.clone();
                }
            }
            row
        })
        .collect();
    row_echelon_basis(dim * width, &flat)
        .into_iter()
        .map(|row| {
            (0..dim)
                .map(|i| {
                    let p = Poly::new(row[i * width..(i + 1) * width].to_vec());
                    RatFn::new(p, d.clone()).expect("nonzero denominator")
                })
                .collect()
        })
        .collect()
}

/// `∂v − B·v`.
pub fn apply_connection(b: &MatRF, v: &[RatFn]) -> Vec<RatFn> {
    let bv = b.mul_vec(v);
    v.iter().zip(bv).map(|(e, w)| e.diff() - w).collect()
}

pub fn is_solution(sys: &DiffSystem, v: &[RatFn]) -> bool {
    v.len() == sys.dim() && apply_connection(sys.matrix(), v).iter().all(Zero::is_zero)
}

/// Rational solutions `v = u/d` with `deg u ≤ caps.num_deg`, obtained as the
/// exact null space of the coefficient equations of `d·∂u − ∂d·u − d·B·u = 0`.
pub fn rational_solutions(sys: &DiffSystem, caps: &Caps) -> SolutionSpace {
    let n = sys.dim();
    let auto = bounds(sys, caps.pole_cap);
    let d = caps
        .den_override
        .as_ref()
        .map(Poly::monic)
        .unwrap_or_else(|| auto.denominator.clone());
    let complete = auto.complete
        && auto.denominator.divides(&d)
        && auto
            .numerator_degree(&d)
            .is_some_and(|bound| bound <= caps.num_deg);

    let cap = caps.num_deg;
    let l = lcm_of_denominators(sys.matrix().data());
    let lf = RatFn::from_poly(l.clone());
    // L·B as a polynomial matrix
    let lb: Vec<Poly> = sys
        .matrix()
        .data()
        .iter()
        .map(|e| (e * &lf).num().clone())
        .collect();
    let ld = &l * &d;
    let ldp = &l * &d.derivative();
    let cols = n * (cap + 1);
    let mut contributions: Vec<Vec<Poly>> = Vec::with_capacity(cols);
    for k in 0..n {
        for j in 0..=cap {
            let xj = Poly::monomial(Rat::one(), j);
            let mut comp = vec![Poly::zero(); n];
            for (i, slot) in comp.iter_mut().enumerate() {
                let lbik = &lb[i * n + k];
                let mut p = if lbik.is_zero() {
                    Poly::zero()
                } else {
                    -&(&(&d * lbik) * &xj)
                };
                if i == k {
                    let mut own = -&(&ldp * &xj);
                    if j > 0 {
                        own = &own + &(&ld * &Poly::monomial(Rat::from_int(j as i64), j - 1));
                    }
                    p = &p + &own;
                }
                *slot = p;
            }
            contributions.push(comp);
        }
    }
    let height = contributions
        .iter()
        .flatten()
        .filter_map(Poly::degree)
        .max()
        .map_or(0, |x| x + 1);
    let system = Matrix::from_fn(n * height, cols, |r, c| {
        contributions[c][r / height].coeff(r % height)
    });
    let kernel = if height == 0 {
        (0..cols)
            .map(|c| {
                (0..cols)
                    .map(|r| if r == c { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect()
    } else {
        system.nullspace()
    };
    let df = RatFn::from_poly(d.clone());
    let sols: Vec<Vec<RatFn>> = kernel
        .iter()
        .map(|a| {
            (0..n)
                .map(|k| {
                    let u = Poly::new(a[k * (cap + 1)..(k + 1) * (cap + 1)].to_vec());
                    RatFn::from_poly(u)
                        .checked_div(&df)
                        .expect("nonzero denominator")
                })
                .collect()
        })
        .collect();
    SolutionSpace {
        dim: n,
        basis: canonical_basis(n, &sols),
        denominator: d,
        num_deg_cap: cap,
        complete,
    }
}

/// A vector spanning a line stable under the connection of a construction:
/// `∂v − constr(A)·v = rate·v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiInvariant {
    pub construction: Construction,
    pub vector: Vec<RatFn>,
    pub rate: RatFn,
}

/// Returns `f` with `∂v − constr(A)·v = f·v`, or `None` if `v` does not span
/// a stable line.
pub fn check_semi_invariant(
    sys: &DiffSystem,
    c: &Construction,
    v: &[RatFn],
) -> Result<Option<RatFn>> {
    check_dim(c.dim(sys.dim())?, v.len())?;
    let Some(pivot) = v.iter().position(|e| !e.is_zero()) else {
        return Err(Error::InvalidInput(
            "zero vector does not span a line".into(),
        ));
    };
    let l = constr_lie(c, sys.matrix())?;
    let r = apply_connection(&l, v);
    let f = r[pivot].checked_div(&v[pivot])?;
    Ok(r.iter().zip(v).all(|(ri, vi)| *ri == &f * vi).then_some(f))
}

impl SemiInvariant {
    pub fn verify(sys: &DiffSystem, c: &Construction, v: Vec<RatFn>) -> Result<Option<Self>> {
        Ok(check_semi_invariant(sys, c, &v)?.map(|rate| SemiInvariant {
            construction: c.clone(),
            vector: v,
            rate,
        }))
    }
}

/// Rational solutions of every listed construction system. Failures (for
/// instance an invalid exterior power) are kept per construction.
pub fn harvest_invariants(
    sys: &DiffSystem,
    cs: &[Construction],
    caps: &Caps,
) -> Vec<(Construction, Result<SolutionSpace>)> {
    cs.iter()
        .map(|c| {
            let space = constr_lie(c, sys.matrix())
                .and_then(|l| DiffSystem::new(sys.var(), l))
                .map(|big| rational_solutions(&big, caps));
            (c.clone(), space)
        })
        .collect()
}
