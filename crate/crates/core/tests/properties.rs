use ffquad::characters::{chi_table, jacobi, jacobi_by_factorization, jacobi_poly, residue_index};
use ffquad::ffpoly::{
    count_irreducibles_sieve, factorize, prime_count, tau_k, Fq, MonicPoly, Poly,
};
use ffquad::lfunction::{compute_coeffs, compute_coeffs_direct, sample_discriminants};
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Fq> {
    prop_oneof![Just(5u32), Just(13), Just(17)].prop_map(|q| Fq::new(q).unwrap())
}

fn monic(fq: Fq, max_deg: usize) -> impl Strategy<Value = MonicPoly> {
    let q = fq.q();
    (0..=max_deg)
        .prop_flat_map(move |d| proptest::collection::vec(0..q, d))
        .prop_map(move |lower| MonicPoly::from_lower(fq, &lower))
}

fn poly(fq: Fq, max_len: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(0..fq.q(), 0..=max_len).prop_map(move |c| Poly::new(fq, c))
}

fn field_and<T: std::fmt::Debug>(
    f: impl Fn(Fq) -> BoxedStrategy<T> + 'static,
) -> impl Strategy<Value = (Fq, T)> {
    field().prop_flat_map(move |fq| (Just(fq), f(fq)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn display_then_parse_is_identity((fq, p) in field_and(|fq| poly(fq, 7).boxed())) {
        prop_assert_eq!(Poly::parse(fq, &p.to_string()).unwrap(), p);
    }

    #[test]
    fn rank_round_trip((fq, f) in field_and(|fq| monic(fq, 6).boxed())) {
        prop_assert_eq!(MonicPoly::unrank(fq, f.degree(), f.rank()), f);
    }

    #[test]
    fn factorization_multiplies_back((fq, f) in field_and(|fq| monic(fq, 8).boxed())) {
        let fac = factorize(&f);
        prop_assert_eq!(fac.product(fq), f.clone());
        for p in fac.primes() {
            prop_assert!(p.is_irreducible());
        }
    }

    #[test]
    fn tau_k_is_multiplicative(
        (_, (f, h)) in field_and(|fq| (monic(fq, 5), monic(fq, 5)).boxed()),
        k in 1u32..5,
    ) {
        prop_assume!(f.is_coprime(&h));
        prop_assert_eq!(tau_k(&f.mul(&h), k), tau_k(&f, k) * tau_k(&h, k));
    }

    #[test]
    fn jacobi_is_multiplicative_in_both_arguments(
        (_, (a, b, m, n)) in field_and(|fq| (monic(fq, 5), monic(fq, 5), monic(fq, 4), monic(fq, 4)).boxed()),
    ) {
        prop_assert_eq!(jacobi(&a.mul(&b), &m), jacobi(&a, &m) * jacobi(&b, &m));
        prop_assert_eq!(jacobi(&a, &m.mul(&n)), jacobi(&a, &m) * jacobi(&a, &n));
    }

    /// For q ≡ 1 mod 4 the reciprocity sign is +1 between monic polynomials.
    #[test]
    fn jacobi_reciprocity((_, (a, b)) in field_and(|fq| (monic(fq, 6), monic(fq, 6)).boxed())) {
        prop_assert_eq!(jacobi(&a, &b), jacobi(&b, &a));
    }

    #[test]
    fn jacobi_matches_factorization((_, (a, m)) in field_and(|fq| (poly(fq, 7), monic(fq, 5)).boxed())) {
        prop_assert_eq!(jacobi_poly(&a, &m), jacobi_by_factorization(&a, &m));
    }

    #[test]
    fn chi_table_entries((_, (m, a)) in field_and(|fq| (monic(fq, 4), poly(fq, 4)).boxed())) {
        let n = m.degree();
        let r = a.rem(m.as_poly()).unwrap();
        prop_assert_eq!(chi_table(&m)[residue_index(&r, n)], jacobi_poly(&a, &m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Field sizes and genera where building the coefficient engine is cheap.
    #[test]
    fn l_polynomials_on_random_discriminants(
        (q, g) in prop_oneof![(Just(5u32), 1usize..=3), (Just(13u32), 1usize..=2)],
        seed in any::<u64>(),
    ) {
        let fq = Fq::new(q).unwrap();
        let d = sample_discriminants(fq, g, 1, seed).pop().unwrap();
        let l = compute_coeffs(&d).unwrap();
        prop_assert!(l.functional_equation_holds());
        prop_assert_eq!(l.coeffs().len(), 2 * g + 1);
        let z = l.zeros().unwrap();
        prop_assert_eq!(z.count_with_multiplicity(), 2 * g);
        prop_assert!(z.radius_residual < 1e-8, "radius residual {}", z.radius_residual);
        if g <= 2 {
            let direct = compute_coeffs_direct(&d).unwrap();
            prop_assert_eq!(l.coeffs(), direct.coeffs());
        }
    }

    #[test]
    fn sieve_agrees_with_necklace_formula(fq in field(), n in 1usize..=6) {
        prop_assert_eq!(count_irreducibles_sieve(fq, n) as u128, prime_count(fq.q(), n));
    }
}
