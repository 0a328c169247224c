use num_traits::{One, Zero};
use proptest::prelude::*;

use redform::arith::{rat, MatRF, Matrix, Poly, Rat, RatFn};
use redform::constr::{constr_group, constr_lie, Construction};
use redform::diffsys::{gauge, pullback, DiffSystem};
use redform::series::Series;
use redform::solutions::canonical_basis;

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-4i64..=4, 0..=max_deg + 1)
        .prop_map(|cs| Poly::new(cs.into_iter().map(rat).collect()))
}

fn ratfn() -> impl Strategy<Value = RatFn> {
    (poly(3), poly(2)).prop_filter_map("zero denominator", |(n, d)| RatFn::new(n, d).ok())
}

fn nonzero_ratfn() -> impl Strategy<Value = RatFn> {
    ratfn().prop_filter("zero", |f| !f.is_zero())
}

fn matrix(n: usize) -> impl Strategy<Value = MatRF> {
    prop::collection::vec(ratfn(), n * n).prop_map(move |v| Matrix::new(n, n, v).unwrap())
}

fn invertible(n: usize) -> impl Strategy<Value = MatRF> {
    matrix(n).prop_filter("singular", |m| !m.determinant().is_zero())
}

fn constructions() -> impl Strategy<Value = Construction> {
    prop::sample::select(vec![
        "base",
        "dual(base)",
        "tensor(base,base)",
        "tensor(base,dual(base))",
        "sym(2,base)",
        "ext(2,base)",
        "dsum(base,dual(base))",
    ])
    .prop_map(|s| s.parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in ratfn(), b in ratfn(), c in nonzero_ratfn()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a / &c) * &c, a.clone());
        prop_assert_eq!(&a - &a, RatFn::zero());
        prop_assert_eq!(&c / &c, RatFn::one());
    }

    #[test]
    fn normal_form_invariants(f in ratfn()) {
        prop_assert!(f.den().is_monic());
        prop_assert!(f.num().gcd(f.den()).is_constant());
    }

    #[test]
    fn display_parse_round_trip(f in ratfn()) {
        for var in ["x", "t"] {
            prop_assert_eq!(RatFn::parse(&f.display(var), var).unwrap(), f.clone());
        }
    }

    #[test]
    fn leibniz_rule(a in ratfn(), b in nonzero_ratfn()) {
        prop_assert_eq!((&a * &b).diff(), &(&a.diff() * &b) + &(&a * &b.diff()));
        let quotient = &(&(&a.diff() * &b) - &(&a * &b.diff())) / &(&b * &b);
        prop_assert_eq!((&a / &b).diff(), quotient);
    }

    #[test]
    fn substitution_commutes_with_ring_ops(a in ratfn(), b in ratfn(), m in 1usize..4) {
        prop_assert_eq!((&a * &b).substitute_power(m), &a.substitute_power(m) * &b.substitute_power(m));
        prop_assert_eq!((&a + &b).substitute_power(m), &a.substitute_power(m) + &b.substitute_power(m));
    }

    #[test]
    fn gauge_cocycle(a in matrix(2), p in invertible(2), q in invertible(2)) {
        let sys = DiffSystem::new("x", a).unwrap();
        let twice = gauge(&gauge(&sys, &p).unwrap(), &q).unwrap();
        prop_assert_eq!(twice, gauge(&sys, &p.mul(&q)).unwrap());
        prop_assert_eq!(gauge(&sys, &Matrix::identity(2)).unwrap(), sys);
    }

    #[test]
    fn pullback_composes(a in matrix(2), m in 1usize..4, k in 1usize..3) {
        let sys = DiffSystem::new("x", a).unwrap();
        let twice = pullback(&pullback(&sys, m, "x"), k, "x");
        prop_assert_eq!(twice, pullback(&sys, m * k, "x"));
    }

    #[test]
    fn pullback_commutes_with_gauge(a in matrix(2), p in invertible(2), m in 2usize..4) {
        let sys = DiffSystem::new("x", a).unwrap();
        let left = pullback(&gauge(&sys, &p).unwrap(), m, "x");
        let right = gauge(&pullback(&sys, m, "x"), &p.substitute_power(m)).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn constructions_are_morphisms(c in constructions(), p in invertible(2), q in invertible(2), n in matrix(2), m in matrix(2)) {
        prop_assert_eq!(constr_group(&c, &p.mul(&q)).unwrap(), constr_group(&c, &p).unwrap().mul(&constr_group(&c, &q).unwrap()));
        prop_assert_eq!(constr_lie(&c, &n.commutator(&m)).unwrap(), constr_lie(&c, &n).unwrap().commutator(&constr_lie(&c, &m).unwrap()));
        prop_assert!(constr_group(&c, &Matrix::identity(2)).unwrap().is_identity());
    }

    #[test]
    fn canonical_basis_depends_only_on_span(
        vs in prop::collection::vec(prop::collection::vec(ratfn(), 3), 2),
        mix in prop::collection::vec(-3i64..=3, 4),
    ) {
        prop_assume!(mix[0] * mix[3] != mix[1] * mix[2]);
        let base = canonical_basis(3, &vs);
        // the solution spaces are spans over Q, so recombine with constants
        let other: Vec<Vec<RatFn>> = (0..2)
            .map(|i| {
                let (a, b) = (RatFn::constant(rat(mix[2 * i])), RatFn::constant(rat(mix[2 * i + 1])));
                (0..3).map(|k| &(&a * &vs[0][k]) + &(&b * &vs[1][k])).collect()
            })
            .collect();
        prop_assert_eq!(canonical_basis(3, &other), base.clone());
        let mut doubled = vs.clone();
        doubled.push(vs[0].iter().zip(&vs[1]).map(|(p, q)| p - q).collect());
        prop_assert_eq!(canonical_basis(3, &doubled), base);
    }

    #[test]
    fn taylor_is_a_ring_map(a in ratfn(), b in ratfn(), x0 in -2i64..=2) {
        let x0 = rat(x0);
        prop_assume!(!a.has_pole_at(&x0) && !b.has_pole_at(&x0));
        let prec = 8;
        let ta = Series::taylor(&a, &x0, prec).unwrap();
        let tb = Series::taylor(&b, &x0, prec).unwrap();
        prop_assert_eq!(Series::taylor(&(&a * &b), &x0, prec).unwrap(), ta.clone() * tb.clone());
        prop_assert_eq!(Series::taylor(&(&a + &b), &x0, prec).unwrap(), ta.clone() + tb);
        prop_assert_eq!(Series::taylor(&a.diff(), &x0, prec - 1).unwrap(), ta.derivative());
        prop_assert_eq!(ta.coeff(0), a.eval(&x0).unwrap());
    }

    #[test]
    fn poly_division_identity(a in poly(5), b in poly(3)) {
        prop_assume!(!b.is_zero());
        let (q, r) = a.div_rem(&b);
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.is_zero() || r.degree() < b.degree());
    }

    #[test]
    fn rational_roots_are_roots(cs in prop::collection::vec(-3i64..=3, 1..4)) {
        // plant the roots cs[i]/2 and check they are all recovered
        let p = cs.iter().fold(Poly::one(), |acc, &c| &acc * &Poly::linear_root(Rat::new(c.into(), 2.into())));
        let roots = p.rational_roots().unwrap();
        for c in cs {
            prop_assert!(roots.contains(&Rat::new(c.into(), 2.into())));
        }
        for r in &roots {
            prop_assert!(p.eval(r).is_zero());
        }
    }
}
