//! Reduced-form criteria, constant bases of stable subspaces, Wei–Norman
//! decompositions, the transport verifier and a reducer for systems with a
//! diagonalizable semi-invariant endomorphism.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::arith::matrix::{row_echelon_basis, to_ratfn, vector_rank};
use crate::arith::{MatQ, MatRF, Matrix, Poly, Rat, RatFn, Ring};
use crate::constr::{constr_group, constr_lie, end_flatten, subsets, Construction};
use crate::diffsys::{gauge, is_ordinary_point, lcm_of_denominators, pullback, DiffSystem};
use crate::error::{check_dim, Error, Result};
use crate::solutions::{apply_connection, check_semi_invariant, harvest_invariants, Caps};

/// Constant matrices spanning a candidate Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct LieBasis {
    n: usize,
    generators: Vec<MatQ>,
}

impl LieBasis {
    /// Rejects generators of the wrong size or that are linearly dependent.
    pub fn new(n: usize, generators: Vec<MatQ>) -> Result<Self> {
        for g in &generators {
            if g.rows() != n || g.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.rows().max(g.cols()),
                });
            }
        }
        let vecs: Vec<Vec<Rat>> = generators.iter().map(|g| g.vectorize()).collect();
        if vector_rank(n * n, &vecs) != generators.len() {
            return Err(Error::InvalidInput(
                "generators are linearly dependent".into(),
            ));
        }
        Ok(LieBasis { n, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[MatQ] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Whether `[N_i, N_j]` stays in the span for all pairs.
    pub fn bracket_closed(&self) -> bool {
        let dim = self.n * self.n;
        let vecs: Vec<Vec<Rat>> = self.generators.iter().map(|g| g.vectorize()).collect();
        let r = vecs.len();
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let mut ext = vecs.clone();
                ext.push(a.commutator(b).vectorize());
                if vector_rank(dim, &ext) != r {
                    return false;
                }
            }
        }
        true
    }
}

/// Writes `A = Σ f_i N_i` with constant `N_i` in reduced echelon form and
/// `f_i` linearly independent over the constants.
pub fn constant_span(a: &MatRF) -> (LieBasis, Vec<RatFn>) {
    let n = a.rows();
    let l = lcm_of_denominators(a.data());
    let lf = RatFn::from_poly(l.clone());
    let nums: Vec<Poly> = a.data().iter().map(|e| (e * &lf).num().clone()).collect();
    let top = nums.iter().filter_map(Poly::degree).max();
    let coeff_mats: Vec<Vec<Rat>> = match top {
        None => Vec::new(),
        Some(top) => (0..=top)
            .map(|k| nums.iter().map(|p| p.coeff(k)).collect())
            .collect(),
    };
    let gens: Vec<MatQ> = row_echelon_basis(n * n, &coeff_mats)
        .into_iter()
        .map(|v| Matrix::from_vectorized(n, &v).expect("square"))
        .collect();
    let basis = LieBasis {
        n,
        generators: gens,
    };
    let coeffs = decompose(a, &basis).expect("matrix lies in its own coefficient span");
    (basis, coeffs)
}

fn decompose(a: &MatRF, basis: &LieBasis) -> Option<Vec<RatFn>> {
    if a.rows() != basis.n || a.cols() != basis.n {
        return None;
    }
    let nn = basis.n * basis.n;
    let target = a.vectorize();
    if basis.is_empty() {
        return target.iter().all(Zero::is_zero).then(Vec::new);
    }
    let cols: Vec<Vec<RatFn>> = basis
        .generators
        .iter()
        .map(|g| to_ratfn(g).vectorize())
        .collect();
    let m = Matrix::from_fn(nn, cols.len(), |i, j| cols[j][i].clone());
    m.solve(&target)
}

/// Coefficients `f_i` with `A = Σ f_i N_i`, or `None` when `A` is not in the
/// span of the generators over the rational functions.
pub fn wei_norman(sys: &DiffSystem, basis: &LieBasis) -> Option<Vec<RatFn>> {
    decompose(sys.matrix(), basis)
}

/// `v = g·c` with `c` constant and normalized to 1 at the first nonzero
/// entry, when all ratios of entries of `v` are constant.
pub fn constant_basis_line(v: &[RatFn]) -> Option<(RatFn, Vec<Rat>)> {
    let g = v.iter().find(|e| !e.is_zero())?.clone();
    let c = v
        .iter()
        .map(|e| (e / &g).as_constant())
        .collect::<Option<Vec<Rat>>>()?;
    Some((g, c))
}

/// First pair of entries whose ratio is not constant.
pub fn non_constant_ratio(v: &[RatFn]) -> Option<(usize, usize, RatFn)> {
    let i = v.iter().position(|e| !e.is_zero())?;
    v.iter().enumerate().find_map(|(j, e)| {
        let r = e / &v[i];
        (!r.is_constant()).then_some((j, i, r))
    })
}

/// Coordinates of `w_1 ∧ … ∧ w_d` on increasing index tuples.
pub fn wedge(dim: usize, ws: &[Vec<RatFn>]) -> Vec<RatFn> {
    let d = ws.len();
    subsets(dim, d)
        .iter()
        .map(|idx| Matrix::from_fn(d, d, |i, j| ws[i][idx[j]].clone()).determinant())
        .collect()
}

/// Matrix of `v ↦ w ∧ v` from `Λ^d` coordinates of `w` to `Λ^{d+1}`.
fn wedge_operator(dim: usize, d: usize, w: &[Rat]) -> MatQ {
    let lower = subsets(dim, d);
    let upper = subsets(dim, d + 1);
    let mut m = Matrix::zeros(upper.len(), dim);
    for (r, big) in upper.iter().enumerate() {
        for (pos, &j) in big.iter().enumerate() {
            let mut small = big.clone();
            small.remove(pos);
            let k = lower.binary_search(&small).expect("subset present");
            // e_I ∧ e_j = (−1)^{#{i ∈ I : i > j}} e_J
            let after = big.len() - 1 - pos;
            let c = if after % 2 == 0 {
                w[k].clone()
            } else {
                -w[k].clone()
            };
            m.set(r, j, c);
        }
    }
    m
}

/// Whether `∂w − constr(A)·w` lies in the span of `W` for every `w ∈ W`.
pub fn is_stable_span(l: &MatRF, ws: &[Vec<RatFn>]) -> bool {
    let dim = l.rows();
    let r = vector_rank(dim, ws);
    ws.iter().all(|w| {
        let mut ext = ws.to_vec();
        ext.push(apply_connection(l, w));
        vector_rank(dim, &ext) == r
    })
}

/// A constant basis of the stable subspace spanned by `W`, or `None` when its
/// top exterior power has no constant generator.
pub fn constant_basis_subspace(
    sys: &DiffSystem,
    c: &Construction,
    ws: &[Vec<RatFn>],
) -> Result<Option<Vec<Vec<Rat>>>> {
    let dim = c.dim(sys.dim())?;
    for w in ws {
        check_dim(dim, w.len())?;
    }
    if ws.is_empty() {
        return Ok(Some(Vec::new()));
    }
    if vector_rank(dim, ws) != ws.len() {
        return Err(Error::InvalidInput(
            "subspace generators are dependent".into(),
        ));
    }
    let l = constr_lie(c, sys.matrix())?;
    if !is_stable_span(&l, ws) {
        return Err(Error::NotStable);
    }
    let w = wedge(dim, ws);
    let Some((_, wc)) = constant_basis_line(&w) else {
        return Ok(None);
    };
    let psi = wedge_operator(dim, ws.len(), &wc);
    Ok(Some(row_echelon_basis(dim, &psi.nullspace())))
}

/// Verdict on one supplied line.
#[derive(Clone, Debug, PartialEq)]
pub enum LineStatus {
    Constant {
        scale: RatFn,
        vector: Vec<Rat>,
    },
    /// `v_j / v_i` is not constant.
    NonConstant {
        i: usize,
        j: usize,
        ratio: RatFn,
    },
    NotStable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineCheck {
    pub construction: Construction,
    pub vector: Vec<RatFn>,
    pub status: Result<LineStatus>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCheck {
    pub construction: Construction,
    pub rank: usize,
    pub complete: bool,
    /// A solution with a non-constant coordinate.
    pub witness: Option<Vec<RatFn>>,
    pub error: Option<Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedReport {
    pub wei_norman_ok: Option<bool>,
    pub coefficients: Option<Vec<RatFn>>,
    pub bracket_closed: Option<bool>,
    pub lines_constant: Option<bool>,
    pub lines: Vec<LineCheck>,
    pub invariants_constant: Option<bool>,
    pub invariants: Vec<InvariantCheck>,
    pub caveats: Vec<String>,
}

impl ReducedReport {
    /// `Some(false)` on any failed check, `Some(true)` if at least one check
    /// ran and all passed, `None` if nothing definitive was checked.
    pub fn verdict(&self) -> Option<bool> {
        let all = [
            self.wei_norman_ok,
            self.lines_constant,
            self.invariants_constant,
        ];
        if all.contains(&Some(false)) {
            Some(false)
        } else if all.contains(&Some(true)) {
            Some(true)
        } else {
            None
        }
    }
}

pub const CAVEAT_COMPLETE_REDUCIBILITY: &str =
    "invariant criterion assumes complete reducibility, which is not verified";
pub const CAVEAT_INCOMPLETE: &str = "some invariant searches hit their caps";

pub fn is_reduced(
    sys: &DiffSystem,
    basis: Option<&LieBasis>,
    cs: &[Construction],
    lines: &[(Construction, Vec<RatFn>)],
    caps: &Caps,
) -> ReducedReport {
    let mut caveats = Vec::new();
    let coefficients = basis.and_then(|b| wei_norman(sys, b));
    let wei_norman_ok = basis.map(|_| coefficients.is_some());
    let bracket_closed = basis.map(LieBasis::bracket_closed);

    let line_checks: Vec<LineCheck> = lines
        .iter()
        .map(|(c, v)| {
            let status = check_semi_invariant(sys, c, v).map(|rate| match rate {
                None => LineStatus::NotStable,
                Some(_) => match constant_basis_line(v) {
                    Some((scale, vector)) => LineStatus::Constant { scale, vector },
                    None => {
                        let (j, i, ratio) = non_constant_ratio(v).expect("non-constant");
                        LineStatus::NonConstant { i, j, ratio }
                    }
                },
            });
            LineCheck {
                construction: c.clone(),
                vector: v.clone(),
                status,
            }
        })
        .collect();
    let lines_constant = if line_checks
        .iter()
        .any(|l| matches!(l.status, Ok(LineStatus::NonConstant { .. })))
    {
        Some(false)
    } else if !line_checks.is_empty()
        && line_checks
            .iter()
            .all(|l| matches!(l.status, Ok(LineStatus::Constant { .. })))
    {
        Some(true)
    } else {
        None
    };

    let invariants: Vec<InvariantCheck> = harvest_invariants(sys, cs, caps)
        .into_iter()
        .map(|(c, space)| match space {
            Ok(s) => InvariantCheck {
                construction: c,
                rank: s.rank(),
                complete: s.complete,
                witness: s
                    .basis
                    .iter()
                    .find(|v| v.iter().any(|e| !e.is_constant()))
                    .cloned(),
                error: None,
            },
            Err(e) => InvariantCheck {
                construction: c,
                rank: 0,
                complete: false,
                witness: None,
                error: Some(e),
            },
        })
        .collect();
    let invariants_constant = if invariants.iter().any(|i| i.witness.is_some()) {
        Some(false)
    } else if invariants.iter().any(|i| i.error.is_none()) {
        Some(true)
    } else {
        None
    };
    if invariants_constant.is_some() {
        caveats.push(CAVEAT_COMPLETE_REDUCIBILITY.to_string());
    }
    if invariants.iter().any(|i| !i.complete) {
        caveats.push(CAVEAT_INCOMPLETE.to_string());
    }
    ReducedReport {
        wei_norman_ok,
        coefficients,
        bracket_closed,
        lines_constant,
        lines: line_checks,
        invariants_constant,
        invariants,
        caveats,
    }
}

/// `P·P(x0)⁻¹`, the gauge matrix equal to the identity at `x0`.
pub fn normalize_at(p: &MatRF, x0: &Rat) -> Result<MatRF> {
    let p0 = p.eval(x0)?.try_inverse()?;
    Ok(p.mul(&to_ratfn(&p0)))
}

/// Checks `v(x) = Constr(P)·v(x0)` exactly for every supplied invariant.
pub fn verify_reduction_matrix(
    sys: &DiffSystem,
    p: &MatRF,
    x0: &Rat,
    invariants: &[(Construction, Vec<RatFn>)],
) -> Result<bool> {
    let n = sys.dim();
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.rows(),
        });
    }
    if !is_ordinary_point(sys, x0) {
        return Err(Error::PoleAtPoint {
            point: x0.to_string(),
        });
    }
    if p.determinant().is_zero() {
        return Err(Error::SingularGauge);
    }
    for (c, v) in invariants {
        check_dim(c.dim(n)?, v.len())?;
        let v0: Vec<RatFn> = v
            .iter()
            .map(|e| e.eval(x0).map(RatFn::constant))
            .collect::<Result<_>>()?;
        let g = constr_group(c, p)?;
        if g.mul_vec(&v0) != *v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Witness that `gauge(pullback(A, m), P) = B = Σ f_i N_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCertificate {
    pub m: usize,
    pub var: String,
    pub p: MatRF,
    pub b: MatRF,
    pub basis: LieBasis,
    pub coefficients: Vec<RatFn>,
}

impl ReductionCertificate {
    pub fn verify(&self, sys: &DiffSystem) -> bool {
        let pulled = pullback(sys, self.m, &self.var);
        let Ok(g) = gauge(&pulled, &self.p) else {
            return false;
        };
        let sum = self
            .basis
            .generators()
            .iter()
            .zip(&self.coefficients)
            .fold(Matrix::zeros(sys.dim(), sys.dim()), |acc: MatRF, (n, f)| {
                acc.add(&to_ratfn(n).scale(f))
            });
        *g.matrix() == self.b && sum == self.b
    }
}

/// Sample points tried when looking for a squarefree specialization.
fn sample_points() -> impl Iterator<Item = Rat> {
    (0..24i64).map(|k| {
        let v = (k + 1) / 2;
        Rat::from_int(if k % 2 == 1 { v } else { -v })
    })
}

fn eval_poly_series(
    coeffs: &[crate::series::Series],
    mu: &crate::series::Series,
) -> crate::series::Series {
    coeffs
        .iter()
        .rev()
        .fold(crate::series::Series::zero(), |acc, c| {
            acc * mu.clone() + c.clone()
        })
}

/// Polynomial roots in `t` of the monic `μ^n + Σ h_i(t) μ^i`, or `None` if
/// the roots are not all polynomials.
fn polynomial_roots(h: &[Poly]) -> Result<Option<Vec<Poly>>> {
    use crate::series::Series;
    let n = h.len();
    let bound = h
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.degree().map(|d| d.div_ceil(n - i)))
        .max()
        .unwrap_or(0);
    let Some((t0, roots0)) = sample_points().find_map(|t0| {
        let mut h_at: Vec<Rat> = h.iter().map(|p| p.eval(&t0)).collect();
        h_at.push(Rat::one());
        let h_at = Poly::new(h_at);
        h_at.gcd(&h_at.derivative())
            .is_constant()
            .then_some((t0, h_at))
    }) else {
        return Err(Error::DefectiveEigenstructure);
    };
    let Some(mut roots) = roots0.rational_roots() else {
        return Ok(None);
    };
    if roots.len() < n {
        return Ok(None);
    }
    roots.sort();
    let dh_at = roots0.derivative();
    let mut shifted: Vec<Vec<Rat>> = h
        .iter()
        .map(|p| p.taylor_shift(&t0).coeffs().to_vec())
        .collect();
    shifted.push(vec![Rat::one()]);
    let mut out = Vec::with_capacity(n);
    for r0 in roots {
        let slope = dh_at.eval(&r0);
        let mut mu = vec![r0];
        for k in 1..=bound {
            let prec = k + 1;
            let coeffs: Vec<Series> = shifted
                .iter()
                .map(|c| Series::new(c.clone(), prec))
                .collect();
            let val = eval_poly_series(&coeffs, &Series::new(mu.clone(), prec));
            mu.push(-val.coeff(k) / &slope);
        }
        let root = Poly::new(mu).taylor_shift(&-t0.clone());
        let check = h
            .iter()
            .rev()
            .fold(Poly::one(), |acc, c| &(&acc * &root) + c);
        if !check.is_zero() {
            return Ok(None);
        }
        out.push(root);
    }
    Ok(Some(out))
}

/// Orders polynomials by degree, then by coefficients from the top.
fn cmp_poly(a: &Poly, b: &Poly) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        a.coeffs()
            .iter()
            .rev()
            .zip(b.coeffs().iter().rev())
            .map(|(x, y)| x.cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Eigenvalues of `N` in the rational functions, in decreasing order.
fn split_eigenvalues(nt: &MatRF) -> Result<Vec<RatFn>> {
    let chi = nt.charpoly();
    let l = lcm_of_denominators(&chi);
    let lf = RatFn::from_poly(l.clone());
    let g: Vec<Poly> = chi.iter().map(|c| (c * &lf).num().clone()).collect();
    let n = g.len() - 1;
    let cn = g[n].clone();
    // substituting μ = c_n·λ makes the polynomial monic
    let h: Vec<Poly> = (0..n).map(|i| &g[i] * &cn.pow(n - 1 - i)).collect();
    let Some(mut mus) = polynomial_roots(&h)? else {
        return Err(Error::NotSplit(
            "characteristic polynomial has no complete set of rational roots".into(),
        ));
    };
    mus.sort_by(|a, b| cmp_poly(b, a));
    let cnf = RatFn::from_poly(cn);
    Ok(mus
        .into_iter()
        .map(|mu| {
            RatFn::from_poly(mu)
                .checked_div(&cnf)
                .expect("nonzero leading coefficient")
        })
        .collect())
}

/// Kernel generator of `N − λ`, first nonzero entry 1, then cleared of
/// denominators.
fn eigenvector(nt: &MatRF, lambda: &RatFn) -> Result<Vec<RatFn>> {
    let n = nt.rows();
    let shifted = nt.sub(&Matrix::identity(n).scale(lambda));
    let mut kernel = shifted.nullspace();
    if kernel.len() != 1 {
        return Err(Error::DefectiveEigenstructure);
    }
    let v = kernel.pop().expect("one vector");
    let lead = v.iter().find(|e| !e.is_zero()).expect("nonzero").clone();
    let v: Vec<RatFn> = v.iter().map(|e| e / &lead).collect();
    let d = RatFn::from_poly(lcm_of_denominators(&v));
    Ok(v.iter().map(|e| e * &d).collect())
}

/// Diagonalizes a semi-invariant endomorphism `N` after the pullback
/// `x = t^m`; the eigenvector gauge reduces the system.
pub fn reduce_by_diagonalization(
    sys: &DiffSystem,
    n: &MatRF,
    m: usize,
    new_var: &str,
) -> Result<ReductionCertificate> {
    let dim = sys.dim();
    if n.rows() != dim || n.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: n.rows(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput(
            "pullback order must be positive".into(),
        ));
    }
    if n.is_zero() {
        return Err(Error::NotSemiInvariant);
    }
    if check_semi_invariant(sys, &Construction::end(), &end_flatten(n))?.is_none() {
        return Err(Error::NotSemiInvariant);
    }
    let nt = n.substitute_power(m);
    let lambdas = split_eigenvalues(&nt)?;
    for w in lambdas.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DefectiveEigenstructure);
        }
    }
    let cols = lambdas
        .iter()
        .map(|l| eigenvector(&nt, l))
        .collect::<Result<Vec<_>>>()?;
    let p = Matrix::from_columns(dim, &cols)?;
    let pulled = pullback(sys, m, new_var);
    let b = gauge(&pulled, &p)?.matrix().clone();
    if !b.is_diagonal() {
        return Err(Error::DefectiveEigenstructure);
    }
    let (basis, coefficients) = constant_span(&b);
    Ok(ReductionCertificate {
        m,
        var: new_var.to_string(),
        p,
        b,
        basis,
        coefficients,
    })
}
