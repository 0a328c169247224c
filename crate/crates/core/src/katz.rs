//! Eigenrings, stability of candidate Lie algebras inside `End`,
//! annihilation of invariants and commutants.

use num_traits::Zero;

use crate::arith::matrix::{row_echelon_basis, to_ratfn, vector_rank};
use crate::arith::{MatQ, MatRF, Matrix, Poly, Rat, RatFn};
use crate::constr::{constr_lie, end_action, end_flatten, end_unflatten, Construction};
use crate::diffsys::{lcm_of_denominators, DiffSystem};
use crate::error::{check_dim, Error, Result};
use crate::reduction::{is_stable_span, wei_norman, LieBasis};
use crate::solutions::{canonical_basis, rational_solutions, Caps, SolutionSpace};

/// Matrices over the rational functions, independent over the constants.
#[derive(Clone, Debug, PartialEq)]
pub struct EndBasis {
    n: usize,
    elements: Vec<MatRF>,
}

impl EndBasis {
    pub fn new(n: usize, elements: Vec<MatRF>) -> Result<Self> {
        for e in &elements {
            if e.rows() != n || e.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.rows().max(e.cols()),
                });
            }
        }
        let flat: Vec<Vec<RatFn>> = elements.iter().map(end_flatten).collect();
        if canonical_basis(n * n, &flat).len() != elements.len() {
            return Err(Error::InvalidInput(
                "elements are linearly dependent".into(),
            ));
        }
        Ok(EndBasis { n, elements })
    }

    pub fn from_lie_basis(b: &LieBasis) -> Self {
        EndBasis {
            n: b.n(),
            elements: b.generators().iter().map(to_ratfn).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[MatRF] {
        &self.elements
    }

    fn flat(&self) -> Vec<Vec<RatFn>> {
        self.elements.iter().map(end_flatten).collect()
    }

    /// Span over the rational functions closed under the bracket.
    pub fn bracket_closed(&self) -> bool {
        let flat = self.flat();
        let r = vector_rank(self.n * self.n, &flat);
        self.elements.iter().enumerate().all(|(i, a)| {
            self.elements[i + 1..].iter().all(|b| {
                let mut ext = flat.clone();
                ext.push(end_flatten(&a.commutator(b)));
                vector_rank(self.n * self.n, &ext) == r
            })
        })
    }
}

/// Horizontal endomorphisms `∂F = AF − FA`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenring {
    pub n: usize,
    pub space: SolutionSpace,
    pub matrices: Vec<MatRF>,
}

impl Eigenring {
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// Echelon basis of the constant matrices in the eigenring.
    pub fn constant_elements(&self) -> Vec<MatQ> {
        let n = self.n;
        constant_members(n * n, &self.space.basis)
            .into_iter()
            .map(|v| Matrix::from_vectorized(n, &v).expect("square"))
            .collect()
    }
}

/// Constant vectors in the constant span of `vs`.
pub fn constant_members(dim: usize, vs: &[Vec<RatFn>]) -> Vec<Vec<Rat>> {
    if vs.is_empty() {
        return Vec::new();
    }
    // Σ a_j u_j − D·c = 0 with every vector written as u_j / D
    let d = lcm_of_denominators(vs.iter().flatten());
    let df = RatFn::from_poly(d.clone());
    let nums: Vec<Vec<Poly>> = vs
        .iter()
        .map(|v| v.iter().map(|e| (e * &df).num().clone()).collect())
        .collect();
    let width = nums
        .iter()
        .flatten()
        .chain([&d])
        .filter_map(Poly::degree)
        .max()
        .unwrap_or(0)
        + 1;
    let r = vs.len();
    let m = Matrix::from_fn(dim * width, r + dim, |row, col| {
        let (i, k) = (row / width, row % width);
        if col < r {
            nums[col][i].coeff(k)
        } else if col - r == i {
            -d.coeff(k)
        } else {
            Rat::zero()
        }
    });
    let cs: Vec<Vec<Rat>> = m.nullspace().into_iter().map(|v| v[r..].to_vec()).collect();
    row_echelon_basis(dim, &cs)
}

pub fn eigenring(sys: &DiffSystem, caps: &Caps) -> Eigenring {
    let n = sys.dim();
    let end = DiffSystem::new(
        sys.var(),
        constr_lie(&Construction::end(), sys.matrix()).expect("valid construction"),
    )
    .expect("square");
    let space = rational_solutions(&end, caps);
    let matrices = space
        .basis
        .iter()
        .map(|v| end_unflatten(n, v).expect("square"))
        .collect();
    Eigenring { n, space, matrices }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementStability {
    /// `∂F − [A, F]`.
    pub image: MatRF,
    /// Coordinates of the image in the basis, when it lies in the span.
    pub coordinates: Option<Vec<RatFn>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub elements: Vec<ElementStability>,
}

fn coordinates(cols: &[Vec<RatFn>], target: &[RatFn]) -> Option<Vec<RatFn>> {
    if cols.is_empty() {
        return target.iter().all(Zero::is_zero).then(Vec::new);
    }
    Matrix::from_fn(target.len(), cols.len(), |i, j| cols[j][i].clone()).solve(target)
}

/// Whether the span of the basis over the rational functions is stable
/// under `F ↦ ∂F − [A, F]`.
pub fn check_nabla_stable_span(sys: &DiffSystem, basis: &EndBasis) -> Result<StabilityReport> {
    check_dim(sys.dim(), basis.n)?;
    let flat = basis.flat();
    let elements = basis
        .elements
        .iter()
        .map(|f| {
            let image = end_action(sys, f)?;
            let coordinates = coordinates(&flat, &end_flatten(&image));
            Ok(ElementStability { image, coordinates })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        stable: elements.iter().all(|e| e.coordinates.is_some()),
        elements,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annihilation {
    pub generator: usize,
    pub invariant: usize,
    /// `constr(N)·v`.
    pub image: Vec<RatFn>,
}

impl Annihilation {
    pub fn annihilated(&self) -> bool {
        self.image.iter().all(Zero::is_zero)
    }
}

/// `constr(N)·v` for every generator and invariant.
pub fn annihilates_invariants(
    generators: &[MatRF],
    invariants: &[(Construction, Vec<RatFn>)],
) -> Result<Vec<Annihilation>> {
    let mut out = Vec::new();
    for (gi, g) in generators.iter().enumerate() {
        for (vi, (c, v)) in invariants.iter().enumerate() {
            let l = constr_lie(c, g)?;
            check_dim(l.cols(), v.len())?;
            out.push(Annihilation {
                generator: gi,
                invariant: vi,
                image: l.mul_vec(v),
            });
        }
    }
    Ok(out)
}

/// Echelon basis of the constant matrices commuting with every generator.
pub fn commutant(basis: &LieBasis) -> Vec<MatQ> {
    let n = basis.n();
    let nn = n * n;
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for g in basis.generators() {
        // column (k, l) holds vec([N, E_kl])
        let cols: Vec<Vec<Rat>> = (0..nn)
            .map(|kl| g.commutator(&Matrix::unit(n, kl / n, kl % n)).vectorize())
            .collect();
        rows.extend((0..nn).map(|i| cols.iter().map(|c| c[i].clone()).collect::<Vec<_>>()));
    }
    let m = Matrix::from_fn(rows.len(), nn, |i, j| rows[i][j].clone());
    row_echelon_basis(nn, &m.nullspace())
        .into_iter()
        .map(|v| Matrix::from_vectorized(n, &v).expect("square"))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceCriterion {
    /// `constr(N_i)·W ⊆ W` for every generator.
    pub generator_stable: bool,
    /// First generator moving `W`, if any.
    pub failing_generator: Option<usize>,
    /// `W` is stable under the connection, checked directly.
    pub nabla_stable: bool,
}

impl SubspaceCriterion {
    pub fn consistent(&self) -> bool {
        self.generator_stable == self.nabla_stable
    }
}

/// Compares stability of a constant subspace under the generators with its
/// stability under the connection, for a system in the span of the basis.
pub fn stable_subspace_criterion(
    sys: &DiffSystem,
    basis: &LieBasis,
    c: &Construction,
    ws: &[Vec<Rat>],
) -> Result<SubspaceCriterion> {
    if wei_norman(sys, basis).is_none() {
        return Err(Error::NotReduced);
    }
    let dim = c.dim(sys.dim())?;
    for w in ws {
        check_dim(dim, w.len())?;
    }
    let r = vector_rank(dim, ws);
    let failing_generator = basis.generators().iter().position(|g| {
        let l = crate::constr::constr_lie_with(c, g).expect("valid construction");
        ws.iter().any(|w| {
            let mut ext = ws.to_vec();
            ext.push(l.mul_vec(w));
            vector_rank(dim, &ext) != r
        })
    });
    let wr: Vec<Vec<RatFn>> = ws
        .iter()
        .map(|w| w.iter().cloned().map(RatFn::constant).collect())
        .collect();
    let l = constr_lie(c, sys.matrix())?;
    Ok(SubspaceCriterion {
        generator_stable: failing_generator.is_none(),
        failing_generator,
        nabla_stable: is_stable_span(&l, &wr),
    })
}

/// Size `n` of the base module for a vector of a construction, when unique.
pub fn infer_base_dim(c: &Construction, len: usize) -> Result<usize> {
    let hits: Vec<usize> = (1..=len.max(1))
        .filter(|&n| c.dim(n).is_ok_and(|d| d == len))
        .collect();
    match hits.as_slice() {
        [n] => Ok(*n),
        [] => Err(Error::InvalidInput(format!(
            "no base dimension gives a vector of length {len} for {c}"
        ))),
        _ => Err(Error::InvalidInput(format!(
            "base dimension for {c} is ambiguous at length {len}"
        ))),
    }
}

/// Basis of `{h : constr(h)·v = 0}` over the rational functions.
pub fn stabilizer_of_invariant(
    c: &Construction,
    v: &[RatFn],
    n: Option<usize>,
) -> Result<Vec<MatRF>> {
    let n = match n {
        Some(n) => n,
        None => infer_base_dim(c, v.len())?,
    };
    check_dim(c.dim(n)?, v.len())?;
    let nn = n * n;
    let cols = (0..nn)
        .map(|kl| Ok(constr_lie(c, &Matrix::unit(n, kl / n, kl % n))?.mul_vec(v)))
        .collect::<Result<Vec<Vec<RatFn>>>>()?;
    let m = Matrix::from_fn(v.len(), nn, |i, j| cols[j][i].clone());
    let kernel = m.nullspace();
    let kernel = row_echelon_basis(nn, &kernel);
    kernel
        .iter()
        .map(|k| Matrix::from_vectorized(n, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use num_traits::One;

    fn mat(rows: &[&[&str]]) -> MatRF {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| RatFn::parse(s, "x").unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    fn q(rows: &[&[i64]]) -> MatQ {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn example() -> DiffSystem {
        DiffSystem::new("x", mat(&[&["0", "1"], &["x", "1/(2*x)"]])).unwrap()
    }

    #[test]
    fn eigenrings() {
        let z = eigenring(&DiffSystem::zero("x", 2), &Caps::with_num_deg(2));
        assert_eq!(z.dim(), 4);
        assert_eq!(z.constant_elements().len(), 4);
        let d = DiffSystem::new("x", mat(&[&["0", "0"], &["0", "1"]])).unwrap();
        let e = eigenring(&d, &Caps::with_num_deg(3));
        assert_eq!(
            e.matrices,
            vec![
                mat(&[&["1", "0"], &["0", "0"]]),
                mat(&[&["0", "0"], &["0", "1"]])
            ]
        );
    }

    #[test]
    fn example_eigenring_is_scalars() {
        let caps = Caps {
            num_deg: 4,
            den_override: Some(Poly::x().pow(4)),
            ..Caps::default()
        };
        let e = eigenring(&example(), &caps);
        assert_eq!(e.matrices, vec![mat(&[&["1", "0"], &["0", "1"]])]);
    }

    #[test]
    fn nabla_stability() {
        let n1 = mat(&[&["0", "1/x"], &["1", "0"]]);
        let r = check_nabla_stable_span(&example(), &EndBasis::new(2, vec![n1]).unwrap()).unwrap();
        assert!(r.stable);
        assert_eq!(
            r.elements[0].coordinates,
            Some(vec![RatFn::parse("-1/(2*x)", "x").unwrap()])
        );
        let id = EndBasis::new(2, vec![Matrix::identity(2)]).unwrap();
        let r = check_nabla_stable_span(&example(), &id).unwrap();
        assert_eq!(r.elements[0].coordinates, Some(vec![RatFn::zero()]));
        let e12 = EndBasis::new(2, vec![mat(&[&["0", "1"], &["0", "0"]])]).unwrap();
        assert!(!check_nabla_stable_span(&example(), &e12).unwrap().stable);
    }

    #[test]
    fn end_basis_independence() {
        let a = mat(&[&["x", "0"], &["0", "0"]]);
        let b = mat(&[&["1", "0"], &["0", "0"]]);
        assert!(EndBasis::new(2, vec![a.clone(), b]).is_ok());
        assert!(EndBasis::new(2, vec![a.clone(), a.scale(&RatFn::constant(rat(2)))]).is_err());
        let sl2 = EndBasis::new(
            2,
            vec![
                mat(&[&["1", "0"], &["0", "-1"]]),
                mat(&[&["0", "1"], &["0", "0"]]),
                mat(&[&["0", "0"], &["1", "0"]]),
            ],
        )
        .unwrap();
        assert!(sl2.bracket_closed());
    }

    #[test]
    fn annihilation() {
        let id = (
            Construction::end(),
            vec![RatFn::one(), RatFn::zero(), RatFn::zero(), RatFn::one()],
        );
        let sigma = to_ratfn(&q(&[&[1, 0], &[0, -1]]));
        let n1 = mat(&[&["0", "1/x"], &["1", "0"]]);
        let res = annihilates_invariants(&[sigma, n1], &[id]).unwrap();
        assert!(res.iter().all(Annihilation::annihilated));
        let e12 = to_ratfn(&q(&[&[0, 1], &[0, 0]]));
        let v = (Construction::Base, vec![RatFn::zero(), RatFn::one()]);
        let res = annihilates_invariants(&[e12], &[v]).unwrap();
        assert!(!res[0].annihilated());
        assert_eq!(res[0].image, vec![RatFn::one(), RatFn::zero()]);
    }

    #[test]
    fn commutants() {
        let sigma = LieBasis::new(2, vec![q(&[&[1, 0], &[0, -1]])]).unwrap();
        assert_eq!(
            commutant(&sigma),
            vec![q(&[&[1, 0], &[0, 0]]), q(&[&[0, 0], &[0, 1]])]
        );
        assert_eq!(commutant(&LieBasis::new(2, vec![]).unwrap()).len(), 4);
        let swap = LieBasis::new(2, vec![q(&[&[0, 1], &[1, 0]])]).unwrap();
        assert_eq!(
            commutant(&swap),
            vec![q(&[&[1, 0], &[0, 1]]), q(&[&[0, 1], &[1, 0]])]
        );
    }

    #[test]
    fn subspace_criterion() {
        let b = DiffSystem::new(
            "t",
            Matrix::from_rows(vec![
                vec![RatFn::parse("2*t^2", "t").unwrap(), RatFn::zero()],
                vec![RatFn::zero(), RatFn::parse("-2*t^2", "t").unwrap()],
            ])
            .unwrap(),
        )
        .unwrap();
        let sigma = LieBasis::new(2, vec![q(&[&[1, 0], &[0, -1]])]).unwrap();
        let e1 =
            stable_subspace_criterion(&b, &sigma, &Construction::Base, &[vec![rat(1), rat(0)]])
                .unwrap();
        assert!(e1.generator_stable && e1.nabla_stable);
        let mixed =
            stable_subspace_criterion(&b, &sigma, &Construction::Base, &[vec![rat(1), rat(1)]])
                .unwrap();
        assert!(!mixed.generator_stable && !mixed.nabla_stable);
        assert_eq!(mixed.failing_generator, Some(0));
        assert_eq!(
            stable_subspace_criterion(&example(), &sigma, &Construction::Base, &[]),
            Err(Error::NotReduced)
        );
    }

    #[test]
    fn stabilizers() {
        // stabilizer of vec(Id) is all of gl_2
        let id = vec![RatFn::one(), RatFn::zero(), RatFn::zero(), RatFn::one()];
        assert_eq!(
            stabilizer_of_invariant(&Construction::end(), &id, None)
                .unwrap()
                .len(),
            4
        );
        // stabilizer of e1∧e2 is sl_2
        let det: Construction = "ext(2,base)".parse().unwrap();
        assert!(stabilizer_of_invariant(&det, &[RatFn::one()], None).is_err());
        assert_eq!(
            stabilizer_of_invariant(&det, &[RatFn::one()], Some(2))
                .unwrap()
                .len(),
            3
        );
        // stabilizer of vec(σ) is the diagonal matrices
        let s = vec![RatFn::one(), RatFn::zero(), RatFn::zero(), -RatFn::one()];
        let st = stabilizer_of_invariant(&Construction::end(), &s, None).unwrap();
        assert_eq!(
            st,
            vec![
                mat(&[&["1", "0"], &["0", "0"]]),
                mat(&[&["0", "0"], &["0", "1"]])
            ]
        );
    }
}
