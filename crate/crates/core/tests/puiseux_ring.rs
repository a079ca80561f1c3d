use ahis_core::newton::semigroup_lattice;
use ahis_core::puiseux::{compose_analytic, CubeDomain, EtaPoly, PowerSeriesGerm, PuiseuxSeries};
use ahis_core::rational::{big, q, qi};
use ahis_core::{BigRational, Q};
use proptest::prelude::*;

fn exact(d: CubeDomain, t: Q, terms: &[(Q, i64, i64)]) -> PuiseuxSeries<BigRational> {
    PuiseuxSeries::from_terms(d, t, terms.iter().map(|&(q, n, den)| (q, EtaPoly::constant(d.eta_dim, big(n, den))))).unwrap()
}

#[test]
fn spec_examples() {
    let d = CubeDomain::new(0, 1.0, 1.0).unwrap();
    let a = exact(d, qi(2), &[(q(1, 2), 1, 1), (qi(1), 1, 1)]);
    let b = exact(d, qi(2), &[(q(1, 2), 1, 1), (qi(1), -1, 1)]);
    assert_eq!(a.mul(&b).unwrap(), exact(d, qi(2), &[(qi(1), 1, 1), (qi(2), -1, 1)]));
    let a = exact(d, qi(2), &[(q(1, 2), 2, 1)]);
    let b = exact(d, qi(2), &[(q(1, 3), 3, 1)]);
    assert_eq!(a.mul(&b).unwrap(), exact(d, qi(2), &[(q(5, 6), 6, 1)]));
    let zero = PuiseuxSeries::<BigRational>::zero(d, qi(2));
    assert_eq!(a.add(&zero).unwrap(), a);

    let d = CubeDomain::new(0, 1.0, 0.25).unwrap();
    assert_eq!(exact(d, qi(2), &[(q(1, 2), 1, 1)]).norm(), 0.5);
    assert_eq!(exact(d, qi(2), &[(qi(0), 1, 1)]).norm(), 1.0);
    assert_eq!(exact(d, qi(2), &[(q(1, 2), 1, 1)]).eval(0.25, &[]).unwrap(), 0.5);
    let d = CubeDomain::new(1, 0.5, 0.5).unwrap();
    let s = PuiseuxSeries::monomial(d, qi(2), qi(1), EtaPoly::<f64>::var(1, 0)).unwrap();
    assert_eq!(s.norm(), 0.25);
    let s2 = PuiseuxSeries::monomial(d, qi(2), qi(1), EtaPoly::<BigRational>::monomial(vec![2], big(1, 1))).unwrap();
    let ds = s2.eta_derivative(0, 1.0).unwrap();
    assert_eq!(ds.coefficient(qi(1)).unwrap(), &EtaPoly::monomial(vec![1], big(2, 1)));

    let d = CubeDomain::new(0, 1.0, 0.1).unwrap();
    let s = exact(d, qi(3), &[(qi(0), 1, 1), (qi(1), 1, 2), (qi(2), -1, 8)]);
    assert!((s.eval(0.01, &[]).unwrap() - 1.0049875).abs() < 1e-15);
    let s = exact(d, qi(3), &[(q(3, 2), 1, 1)]);
    assert_eq!(s.eval(0.0, &[]).unwrap(), 0.0);
    let ds = s.r_derivative(1.0).unwrap();
    assert_eq!(ds, exact(CubeDomain::new(0, 1.0, 0.1).unwrap(), qi(2), &[(q(1, 2), 3, 2)]));
    let c = exact(d, qi(3), &[(qi(0), 5, 1)]);
    assert!(c.r_derivative(1.0).unwrap().is_zero());
}

#[test]
fn identity_composition() {
    let d = CubeDomain::new(1, 0.5, 0.2).unwrap();
    let f = exact(d, qi(3), &[(q(1, 3), 1, 2), (qi(2), -3, 1)]);
    let g = PowerSeriesGerm::<BigRational>::identity();
    assert_eq!(compose_analytic(&g, &[f.clone()]).unwrap(), f);
}

const EXPONENTS: [(i64, i64); 7] = [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1), (3, 2), (2, 1)];

fn arb_exact() -> impl Strategy<Value = PuiseuxSeries<BigRational>> {
    prop::collection::vec((0usize..7, -4i64..=4, 1i64..4, 0u32..3), 0..5).prop_map(|terms| {
        let d = CubeDomain::new(1, 0.5, 0.3).unwrap();
        let mut s = PuiseuxSeries::zero(d, qi(3));
        for (i, n, den, k) in terms {
            let (a, b) = EXPONENTS[i];
            let t = PuiseuxSeries::monomial(d, qi(3), q(a, b), EtaPoly::monomial(vec![k], big(n, den))).unwrap();
            s = s.add(&t).unwrap();
        }
        s
    })
}

fn same_terms(a: &PuiseuxSeries<BigRational>, b: &PuiseuxSeries<BigRational>) -> bool {
    a.terms().eq(b.terms())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms_are_exact(a in arb_exact(), b in arb_exact(), c in arb_exact()) {
        prop_assert!(same_terms(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
        prop_assert!(same_terms(&a.add(&b).unwrap(), &b.add(&a).unwrap()));
        prop_assert!(same_terms(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(same_terms(&lhs, &rhs));
    }

    #[test]
    fn norms_are_sub_additive_and_multiplicative(a in arb_exact(), b in arb_exact()) {
        let s = a.add(&b).unwrap();
        prop_assert!(s.norm() <= a.norm() + b.norm() + 1e-12);
        let p = a.mul(&b).unwrap();
        prop_assert!(p.norm_with_tail() <= a.norm() * b.norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn composition_within_tail(f in arb_exact(), r in 0.0f64..0.3, eta in -0.5f64..0.5) {
        // Drop the constant term and scale into the polydisc.
        let d = f.domain;
        let f = f.sub(&PuiseuxSeries::from_terms(d, f.truncation, f.coefficient(qi(0)).map(|c| (qi(0), c.clone()))).unwrap()).unwrap();
        let n = f.norm();
        let f = if n > 0.4 { f.scale(&ahis_core::rational::big_from_f64(0.4 / n)) } else { f };
        let g = PowerSeriesGerm::<BigRational>::binomial(q(1, 2), 8, 0.5).unwrap();
        let s = compose_analytic(&g, &[f.clone()]).unwrap();
        let exact_value = (1.0 + f.eval(r, &[eta]).unwrap()).sqrt();
        let err = (s.eval(r, &[eta]).unwrap() - exact_value).abs();
        prop_assert!(err <= s.tail_bound + 1e-12, "err {} tail {}", err, s.tail_bound);

        let gens: Vec<Q> = f.exponents().into_iter().filter(|q| *q > qi(0)).collect();
        if !gens.is_empty() {
            let lattice = semigroup_lattice(&gens, s.truncation).unwrap();
            prop_assert!(s.check_lattice(&lattice).is_ok());
        }
    }
}
