//! Linear differential systems `∂y = A·y`, gauge transformations and
//! pullbacks along `x = t^m`.

use num_traits::Zero;

use crate::arith::{MatRF, Matrix, Poly, Rat, RatFn};
use crate::error::{Error, Result};

/// The system `∂y = A·y` in the variable `var`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffSystem {
    var: String,
    a: MatRF,
}

impl DiffSystem {
    pub fn new(var: impl Into<String>, a: MatRF) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        Ok(DiffSystem { var: var.into(), a })
    }

    pub fn zero(var: impl Into<String>, n: usize) -> Self {
        DiffSystem {
            var: var.into(),
            a: Matrix::zeros(n, n),
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn matrix(&self) -> &MatRF {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Same matrix under another variable name.
    pub fn with_var(&self, var: impl Into<String>) -> Self {
        DiffSystem {
            var: var.into(),
            a: self.a.clone(),
        }
    }
}

/// `P[A] = P⁻¹·A·P − P⁻¹·∂P`.
pub fn gauge(sys: &DiffSystem, p: &MatRF) -> Result<DiffSystem> {
    let n = sys.dim();
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.rows().max(p.cols()),
        });
    }
    let p_inv = p.try_inverse()?;
    let b = p_inv.mul(&sys.a.mul(p).sub(&p.diff()));
    Ok(DiffSystem {
        var: sys.var.clone(),
        a: b,
    })
}

/// Conjugation `P⁻¹·M·P` without the derivative term.
pub fn conjugate(m: &MatRF, p: &MatRF) -> Result<MatRF> {
    Ok(p.try_inverse()?.mul(&m.mul(p)))
}

/// The system satisfied by `y(t^m)`: `B(t) = m·t^(m−1)·A(t^m)`.
pub fn pullback(sys: &DiffSystem, m: usize, new_var: &str) -> DiffSystem {
    assert!(m >= 1, "pullback order must be positive");
    let factor = RatFn::from_poly(Poly::monomial(Rat::from_integer(m.into()), m - 1));
    DiffSystem {
        var: new_var.to_string(),
        a: sys.a.map(|e| &e.substitute_power(m) * &factor),
    }
}

/// Pole data of the system matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SingularityReport {
    /// Pairwise coprime squarefree monic factors of the lcm of the entry
    /// denominators, each with the largest pole order among the entries.
    pub finite_places: Vec<(Poly, usize)>,
    /// `max(deg num − deg den)` over nonzero entries; `None` for the zero matrix.
    pub order_at_infinity: Option<i64>,
}

impl SingularityReport {
    pub fn all_poles_simple(&self) -> bool {
        self.finite_places.iter().all(|(_, k)| *k <= 1)
    }

    /// Product of the places, each raised to its pole order.
    pub fn pole_divisor(&self) -> Poly {
        self.finite_places.iter().fold(
            Poly::constant(Rat::from_integer(1.into())),
            |acc, (p, k)| &acc * &p.pow(*k),
        )
    }
}

pub fn singularities(sys: &DiffSystem) -> SingularityReport {
    let l = lcm_of_denominators(sys.a.data());
    let order_at_infinity = sys.a.data().iter().filter_map(RatFn::degree).max();
    SingularityReport {
        finite_places: l.squarefree_decomposition(),
        order_at_infinity,
    }
}

pub fn lcm_of_denominators<'a>(entries: impl IntoIterator<Item = &'a RatFn>) -> Poly {
    entries
        .into_iter()
        .filter(|e| !e.is_zero())
        .fold(Poly::constant(Rat::from_integer(1.into())), |acc, e| {
            acc.lcm(e.den())
        })
}

pub fn is_ordinary_point(sys: &DiffSystem, x0: &Rat) -> bool {
    sys.a.data().iter().all(|e| !e.has_pole_at(x0))
}
