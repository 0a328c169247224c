//! Tensor constructions of a module and their induced actions.
//!
//! A [`Construction`] is a finite expression over `base`, duals, tensor
//! products, symmetric and exterior powers and direct sums. For a matrix `P`
//! acting on the base space, [`constr_group`] returns the matrix of the
//! induced map in the canonical basis of the construction; for a matrix `N`
//! acting as a derivation, [`constr_lie`] returns the induced derivation.
//!
//! Canonical basis orders:
//! - `tensor(c1, c2)`: pairs `(i, j)` in row-major lexicographic order,
//!   index `i·dim(c2) + j`;
//! - `sym(r, c)`: non-decreasing `r`-tuples of child indices in lexicographic
//!   order, monomial basis without multinomial normalization;
//! - `ext(r, c)`: strictly increasing `r`-tuples in lexicographic order;
//! - `dsum(c1, c2)`: basis of `c1` followed by basis of `c2`;
//! - `dual(c)`: the dual basis, in the order of `c`.
//!
//! `End(M)` is identified with `tensor(base, dual(base))` by flattening a
//! matrix `F` row-major; under this identification `constr_lie(A)` acts as
//! `F ↦ A·F − F·A`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::arith::{MatRF, Matrix, RatFn, Ring};
use crate::diffsys::DiffSystem;
use crate::error::{check_dim, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Construction {
    Base,
    Dual(Box<Construction>),
    Tensor(Box<Construction>, Box<Construction>),
    Sym(usize, Box<Construction>),
    Ext(usize, Box<Construction>),
    DirectSum(Box<Construction>, Box<Construction>),
}

impl Construction {
    pub fn dual(c: Construction) -> Self {
        Construction::Dual(Box::new(c))
    }

    pub fn tensor(a: Construction, b: Construction) -> Self {
        Construction::Tensor(Box::new(a), Box::new(b))
    }

    pub fn sym(r: usize, c: Construction) -> Self {
        Construction::Sym(r, Box::new(c))
    }

    pub fn ext(r: usize, c: Construction) -> Self {
        Construction::Ext(r, Box::new(c))
    }

    pub fn dsum(a: Construction, b: Construction) -> Self {
        Construction::DirectSum(Box::new(a), Box::new(b))
    }

    /// `End(M) ≅ M ⊗ M*`.
    pub fn end() -> Self {
        Construction::tensor(Construction::Base, Construction::dual(Construction::Base))
    }

    pub fn contains_dual(&self) -> bool {
        match self {
            Construction::Base => false,
            Construction::Dual(_) => true,
            Construction::Sym(_, c) | Construction::Ext(_, c) => c.contains_dual(),
            Construction::Tensor(a, b) | Construction::DirectSum(a, b) => {
                a.contains_dual() || b.contains_dual()
            }
        }
    }

    /// Dimension of the construction applied to an `n`-dimensional space.
    pub fn dim(&self, n: usize) -> Result<usize> {
        Ok(match self {
            Construction::Base => n,
            Construction::Dual(c) => c.dim(n)?,
            Construction::Tensor(a, b) => a.dim(n)? * b.dim(n)?,
            Construction::DirectSum(a, b) => a.dim(n)? + b.dim(n)?,
            Construction::Sym(r, c) => {
                let d = c.dim(n)?;
                if *r == 0 {
                    return Err(Error::InvalidArity { r: 0, dim: d });
                }
                if d == 0 {
                    0
                } else {
                    binomial(d + r - 1, *r)
                }
            }
            Construction::Ext(r, c) => {
                let d = c.dim(n)?;
                if *r == 0 || *r > d {
                    return Err(Error::InvalidArity { r: *r, dim: d });
                }
                binomial(d, *r)
            }
        })
    }

    /// Canonical basis labels in index order.
    pub fn basis_labels(&self, n: usize) -> Result<Vec<BasisLabel>> {
        Ok(match self {
            Construction::Base => (0..n).map(BasisLabel::Base).collect(),
            Construction::Dual(c) => c
                .basis_labels(n)?
                .into_iter()
                .map(|l| BasisLabel::Dual(Box::new(l)))
                .collect(),
            Construction::Tensor(a, b) => {
                let la = a.basis_labels(n)?;
                let lb = b.basis_labels(n)?;
                la.iter()
                    .flat_map(|x| {
                        lb.iter().map(move |y| {
                            BasisLabel::Tensor(Box::new(x.clone()), Box::new(y.clone()))
                        })
                    })
                    .collect()
            }
            Construction::DirectSum(a, b) => {
                let mut out: Vec<BasisLabel> = a.basis_labels(n)?;
                out.extend(b.basis_labels(n)?);
                out
            }
            Construction::Sym(r, c) => {
                self.dim(n)?;
                let lc = c.basis_labels(n)?;
                multisets(lc.len(), *r)
                    .into_iter()
                    .map(|t| BasisLabel::Sym(t.iter().map(|&i| lc[i].clone()).collect()))
                    .collect()
            }
            Construction::Ext(r, c) => {
                self.dim(n)?;
                let lc = c.basis_labels(n)?;
                subsets(lc.len(), *r)
                    .into_iter()
                    .map(|t| BasisLabel::Ext(t.iter().map(|&i| lc[i].clone()).collect()))
                    .collect()
            }
        })
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Base => write!(f, "base"),
            Construction::Dual(c) => write!(f, "dual({c})"),
            Construction::Tensor(a, b) => write!(f, "tensor({a},{b})"),
            Construction::Sym(r, c) => write!(f, "sym({r},{c})"),
            Construction::Ext(r, c) => write!(f, "ext({r},{c})"),
            Construction::DirectSum(a, b) => write!(f, "dsum({a},{b})"),
        }
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (c, rest) = parse_constr(&compact)?;
        if !rest.is_empty() {
            return Err(Error::Parse(format!(
                "trailing input {rest:?} in construction"
            )));
        }
        Ok(c)
    }
}

fn parse_constr(s: &str) -> Result<(Construction, &str)> {
    if let Some(rest) = s.strip_prefix("base") {
        return Ok((Construction::Base, rest));
    }
    let open = s
        .find('(')
        .ok_or_else(|| Error::Parse(format!("expected a construction at {s:?}")))?;
    let (name, mut rest) = (&s[..open], &s[open + 1..]);
    let expect = |rest: &str, ch: char| -> Result<usize> {
        if rest.starts_with(ch) {
            Ok(1)
        } else {
            Err(Error::Parse(format!("expected {ch:?} at {rest:?}")))
        }
    };
    let c = match name {
        "dual" => {
            let (c, r) = parse_constr(rest)?;
            rest = r;
            Construction::dual(c)
        }
        "tensor" | "dsum" => {
            let (a, r) = parse_constr(rest)?;
            let r = &r[expect(r, ',')?..];
            let (b, r) = parse_constr(r)?;
            rest = r;
            if name == "tensor" {
                Construction::tensor(a, b)
            } else {
                Construction::dsum(a, b)
            }
        }
        "sym" | "ext" => {
            let (k, r) = arity(rest)?;
            let (c, r) = parse_constr(r)?;
            rest = r;
            if k == 0 {
                return Err(Error::Parse("arity must be at least 1".into()));
            }
            if name == "sym" {
                Construction::sym(k, c)
            } else {
                Construction::ext(k, c)
            }
        }
        other => return Err(Error::Parse(format!("unknown constructor {other:?}"))),
    };
    let rest = &rest[expect(rest, ')')?..];
    Ok((c, rest))
}

fn arity(rest: &str) -> Result<(usize, &str)> {
    let end = rest
        .find(',')
        .ok_or_else(|| Error::Parse("missing ','".into()))?;
    let r = rest[..end]
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad arity {:?}", &rest[..end])))?;
    Ok((r, &rest[end + 1..]))
}

/// Parses a `;`-separated list of constructions.
pub fn parse_construction_list(s: &str) -> Result<Vec<Construction>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BasisLabel {
    Base(usize),
    Dual(Box<BasisLabel>),
    Tensor(Box<BasisLabel>, Box<BasisLabel>),
    Sym(Vec<BasisLabel>),
    Ext(Vec<BasisLabel>),
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[BasisLabel], sep: &str| {
            xs.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(sep)
        };
        match self {
            BasisLabel::Base(i) => write!(f, "e{}", i + 1),
            BasisLabel::Dual(l) => write!(f, "{l}*"),
            BasisLabel::Tensor(a, b) => write!(f, "({a}⊗{b})"),
            BasisLabel::Sym(xs) => write!(f, "({})", join(xs, "·")),
            BasisLabel::Ext(xs) => write!(f, "({})", join(xs, "∧")),
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Non-decreasing `r`-tuples over `0..d`, lexicographic.
pub fn multisets(d: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(d: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(d, r, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, r, 0, &mut Vec::new(), &mut out);
    out
}

/// Strictly increasing `r`-tuples over `0..d`, lexicographic.
pub fn subsets(d: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(d: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(d, r, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, r, 0, &mut Vec::new(), &mut out);
    out
}

fn index_of(tuples: &[Vec<usize>]) -> HashMap<Vec<usize>, usize> {
    tuples
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect()
}

/// Sorts a tuple with distinct entries, returning `false` as second
/// component for an odd permutation. `None` on a repeated entry.
fn sort_signed(mut t: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut even = true;
    for i in 0..t.len() {
        for j in 0..t.len() - 1 - i {
            match t[j].cmp(&t[j + 1]) {
                std::cmp::Ordering::Greater => {
                    t.swap(j, j + 1);
                    even = !even;
                }
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    if t.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((t, even))
}

/// `r`-th symmetric power of the map with matrix `g` (monomial basis).
fn sym_group<T: Ring>(g: &Matrix<T>, r: usize) -> Matrix<T> {
    let d = g.rows();
    let basis = multisets(d, r);
    let index = index_of(&basis);
    let mut out = Matrix::zeros(basis.len(), basis.len());
    for (col, tuple) in basis.iter().enumerate() {
        let mut terms: HashMap<Vec<usize>, T> = HashMap::from([(Vec::new(), T::one())]);
        for &j in tuple {
            let mut next: HashMap<Vec<usize>, T> = HashMap::new();
            for (t, coef) in &terms {
                for i in 0..d {
                    let gij = g.get(i, j);
                    if gij.is_zero() {
                        continue;
                    }
                    let mut key = t.clone();
                    let pos = key.partition_point(|&x| x <= i);
                    key.insert(pos, i);
                    let e = next.entry(key).or_insert_with(T::zero);
                    *e = e.clone() + coef.clone() * gij.clone();
                }
            }
            terms = next;
        }
        for (t, coef) in terms {
            out.set(index[&t], col, coef);
        }
    }
    out
}

/// `r`-th exterior power (compound matrix of `r×r` minors).
fn ext_group<T: Ring>(g: &Matrix<T>, r: usize) -> Matrix<T> {
    let d = g.rows();
    let basis = subsets(d, r);
    let index = index_of(&basis);
    let mut out = Matrix::zeros(basis.len(), basis.len());
    for (col, tuple) in basis.iter().enumerate() {
        let mut terms: HashMap<Vec<usize>, T> = HashMap::from([(Vec::new(), T::one())]);
        for &j in tuple {
            let mut next: HashMap<Vec<usize>, T> = HashMap::new();
            for (t, coef) in &terms {
                for i in 0..d {
                    let gij = g.get(i, j);
                    if gij.is_zero() || t.contains(&i) {
                        continue;
                    }
                    // e_t ∧ e_i: move e_i left past the larger entries
                    let pos = t.partition_point(|&x| x < i);
                    let odd = (t.len() - pos) % 2 == 1;
                    let mut key = t.clone();
                    key.insert(pos, i);
                    let term = coef.clone() * gij.clone();
                    let term = if odd { -term } else { term };
                    let e = next.entry(key).or_insert_with(T::zero);
                    *e = e.clone() + term;
                }
            }
            terms = next;
        }
        for (t, coef) in terms {
            out.set(index[&t], col, coef);
        }
    }
    out
}

/// Derivation induced on the `r`-th symmetric power.
fn sym_lie<T: Ring>(l: &Matrix<T>, r: usize) -> Matrix<T> {
    let d = l.rows();
    let basis = multisets(d, r);
    let index = index_of(&basis);
    let mut out: Matrix<T> = Matrix::zeros(basis.len(), basis.len());
    for (col, tuple) in basis.iter().enumerate() {
        for s in 0..r {
            let j = tuple[s];
            for i in 0..d {
                let lij = l.get(i, j);
                if lij.is_zero() {
                    continue;
                }
                let mut key = tuple.clone();
                key[s] = i;
                key.sort_unstable();
                let row = index[&key];
                let v = out.get(row, col).clone() + lij.clone();
                out.set(row, col, v);
            }
        }
    }
    out
}

/// Derivation induced on the `r`-th exterior power.
fn ext_lie<T: Ring>(l: &Matrix<T>, r: usize) -> Matrix<T> {
    let d = l.rows();
    let basis = subsets(d, r);
    let index = index_of(&basis);
    let mut out: Matrix<T> = Matrix::zeros(basis.len(), basis.len());
    for (col, tuple) in basis.iter().enumerate() {
        for s in 0..r {
            let j = tuple[s];
            for i in 0..d {
                let lij = l.get(i, j);
                if lij.is_zero() {
                    continue;
                }
                let mut seq = tuple.clone();
                seq[s] = i;
                let Some((key, even)) = sort_signed(seq) else {
                    continue;
                };
                let row = index[&key];
                let term = if even { lij.clone() } else { -lij.clone() };
                let v = out.get(row, col).clone() + term;
                out.set(row, col, v);
            }
        }
    }
    out
}

/// Group-level functor over any ring. `p_inv` must be supplied whenever the
/// construction contains a dual.
pub fn constr_group_with<T: Ring>(
    c: &Construction,
    p: &Matrix<T>,
    p_inv: Option<&Matrix<T>>,
) -> Result<Matrix<T>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p.rows(),
            got: p.cols(),
        });
    }
    c.dim(p.rows())?;
    if let Some(pi) = p_inv {
        check_dim(p.rows(), pi.rows())?;
    }
    Ok(group_rec(c, p, p_inv)?.0)
}

type Pair<T> = (Matrix<T>, Option<Matrix<T>>);

fn group_rec<T: Ring>(
    c: &Construction,
    p: &Matrix<T>,
    p_inv: Option<&Matrix<T>>,
) -> Result<Pair<T>> {
    Ok(match c {
        Construction::Base => (p.clone(), p_inv.cloned()),
        Construction::Dual(child) => {
            let (g, gi) = group_rec(child, p, p_inv)?;
            let gi = gi.ok_or(Error::SingularGauge)?;
            (gi.transpose(), Some(g.transpose()))
        }
        Construction::Tensor(a, b) => {
            let (ga, gai) = group_rec(a, p, p_inv)?;
            let (gb, gbi) = group_rec(b, p, p_inv)?;
            let inv = gai.zip(gbi).map(|(x, y)| x.kron(&y));
            (ga.kron(&gb), inv)
        }
        Construction::DirectSum(a, b) => {
            let (ga, gai) = group_rec(a, p, p_inv)?;
            let (gb, gbi) = group_rec(b, p, p_inv)?;
            let inv = gai.zip(gbi).map(|(x, y)| x.block_diag(&y));
            (ga.block_diag(&gb), inv)
        }
        Construction::Sym(r, child) => {
            let (g, gi) = group_rec(child, p, p_inv)?;
            (sym_group(&g, *r), gi.map(|x| sym_group(&x, *r)))
        }
        Construction::Ext(r, child) => {
            let (g, gi) = group_rec(child, p, p_inv)?;
            (ext_group(&g, *r), gi.map(|x| ext_group(&x, *r)))
        }
    })
}

/// Lie-level functor over any ring: the derivation induced by `n`.
pub fn constr_lie_with<T: Ring>(c: &Construction, n: &Matrix<T>) -> Result<Matrix<T>> {
    if !n.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n.rows(),
            got: n.cols(),
        });
    }
    c.dim(n.rows())?;
    Ok(lie_rec(c, n))
}

fn lie_rec<T: Ring>(c: &Construction, n: &Matrix<T>) -> Matrix<T> {
    match c {
        Construction::Base => n.clone(),
        Construction::Dual(child) => lie_rec(child, n).transpose().neg(),
        Construction::Tensor(a, b) => {
            let la = lie_rec(a, n);
            let lb = lie_rec(b, n);
            let ia = Matrix::identity(la.rows());
            let ib = Matrix::identity(lb.rows());
            la.kron(&ib).add(&ia.kron(&lb))
        }
        Construction::DirectSum(a, b) => lie_rec(a, n).block_diag(&lie_rec(b, n)),
        Construction::Sym(r, child) => sym_lie(&lie_rec(child, n), *r),
        Construction::Ext(r, child) => ext_lie(&lie_rec(child, n), *r),
    }
}

/// `Constr(P)` for an invertible matrix over the rational functions.
pub fn constr_group(c: &Construction, p: &MatRF) -> Result<MatRF> {
    if c.contains_dual() {
        let p_inv = p.try_inverse()?;
        constr_group_with(c, p, Some(&p_inv))
    } else {
        constr_group_with(c, p, None)
    }
}

/// `constr(N)` for a matrix over the rational functions.
pub fn constr_lie(c: &Construction, n: &MatRF) -> Result<MatRF> {
    constr_lie_with(c, n)
}

/// The system `∂v = constr(A)·v` of a construction.
pub fn construction_system(sys: &DiffSystem, c: &Construction) -> Result<DiffSystem> {
    DiffSystem::new(sys.var(), constr_lie(c, sys.matrix())?)
}

/// `∂F − (A·F − F·A)`; zero exactly when `F` is a horizontal endomorphism.
pub fn end_action(sys: &DiffSystem, f: &MatRF) -> Result<MatRF> {
    let a = sys.matrix();
    if f.rows() != a.rows() || f.cols() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: f.rows(),
        });
    }
    Ok(f.diff().sub(&a.commutator(f)))
}

/// Row-major flattening `End(M) → M ⊗ M*`.
pub fn end_flatten(f: &MatRF) -> Vec<RatFn> {
    f.vectorize()
}

pub fn end_unflatten(n: usize, v: &[RatFn]) -> Result<MatRF> {
    Matrix::from_vectorized(n, v)
}
