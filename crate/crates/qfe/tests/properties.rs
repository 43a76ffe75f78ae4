//! Randomized invariant checks: exact-arithmetic laws, canonical-form
//! round-trips, evaluation consistency, template annihilation, product-peel
//! inversion, and keep-set enumeration policy.

use num_bigint::BigInt;
use proptest::prelude::*;

use qfe::algebra::PolyXQ;
use qfe::contiguous::{equation_residual, primary_equations};
use qfe::euler::{euler_exponents, expand_exponents};
use qfe::search::keep_subsets;
use qfe::series::{eval_series, SeriesParams, XMode};

fn poly() -> impl Strategy<Value = PolyXQ> {
    proptest::collection::vec(((0..=3u32, -3..=4i64), -9..=9i64), 0..=5).prop_map(|terms| {
        terms.into_iter().fold(PolyXQ::zero(), |acc, ((x, q), c)| {
            acc.add(&PolyXQ::monomial(BigInt::from(c), x, q))
        })
    })
}

/// Polynomials whose q-degrees are nonnegative, so they embed into
/// truncated series.
fn poly_nonneg_q() -> impl Strategy<Value = PolyXQ> {
    proptest::collection::vec(((0..=3u32, 0..=4i64), -9..=9i64), 0..=5).prop_map(|terms| {
        terms.into_iter().fold(PolyXQ::zero(), |acc, ((x, q), c)| {
            acc.add(&PolyXQ::monomial(BigInt::from(c), x, q))
        })
    })
}

fn admissible_params() -> impl Strategy<Value = SeriesParams> {
    (
        (1..=3i64, 1..=3i64, 1..=3i64),
        (-2..=3i64, -2..=3i64),
        (1..=2i64, 1..=2i64, 1..=3i64, 1..=3i64, 1..=2i64),
        (prop_oneof![Just(1i64), Just(-1i64)], prop_oneof![Just(1i64), Just(-1i64)]),
    )
        .prop_map(|((b11, b22, b12), (c1, c2), (d1, d2, k1, k2, gamma), (eps1, eps2))| {
            SeriesParams { b11, b22, b12, c1, c2, d1, d2, k1, k2, gamma, eps1, eps2 }
        })
        .prop_filter("seed admissible", |p| p.is_admissible())
}

proptest! {
    #[test]
    fn poly_ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn poly_display_parses_back(a in poly()) {
        let round: PolyXQ = a.to_string().parse().expect("canonical form parses");
        prop_assert_eq!(round, a);
    }

    #[test]
    fn poly_exact_division_inverts_multiplication(a in poly(), b in poly()) {
        prop_assume!(!b.is_zero());
        let product = a.mul(&b);
        let back = product.divide_exact(&b).expect("constructed multiple divides");
        prop_assert_eq!(back, a);
    }

    #[test]
    fn series_embedding_respects_multiplication(
        a in poly_nonneg_q(),
        b in poly_nonneg_q(),
    ) {
        let order = 12u32;
        let sa = a.to_series(order).expect("nonnegative degrees");
        let product = a.mul(&b).to_series(order).expect("nonnegative degrees");
        prop_assert_eq!(sa.mul_poly(&b).expect("same order"), product);
    }

    #[test]
    fn substituted_evaluation_matches_symbolic(
        p in admissible_params(),
        s in 0..=2u32,
    ) {
        let order = 16u32;
        let direct = eval_series(&p, order, XMode::PowQ(s)).expect("admissible");
        let via_symbolic = eval_series(&p, order, XMode::Symbolic)
            .expect("admissible")
            .subst_x_pow_q(s);
        prop_assert_eq!(direct, via_symbolic);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn templates_annihilate_their_family(p in admissible_params().prop_filter(
        "template references admissible",
        |p| primary_equations(p, p.c1, p.c2)
            .iter()
            .flat_map(|eq| eq.refs())
            .all(|r| p.with_pair(r.c1, r.c2).is_admissible()),
    )) {
        for eq in primary_equations(&p, p.c1, p.c2) {
            let residual = equation_residual(&p, &eq, 20).expect("admissible refs");
            prop_assert!(residual.is_zero(), "nonzero residual for {}: {}", p, eq);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn peel_inverts_expansion(a in proptest::collection::vec(-3..=3i64, 1..=24)) {
        let b = expand_exponents(&a, a.len());
        let got = euler_exponents(&b).expect("constant term 1");
        prop_assert_eq!(&got[..], &a[..]);
    }

    #[test]
    fn keep_subset_policy_holds(
        extra in proptest::collection::btree_set((-3..=3i64, -3..=3i64), 0..=6),
        d in 1..=3usize,
        cap in 1..=12usize,
    ) {
        let seed = (0i64, 0i64);
        let mut pairs: Vec<(i64, i64)> = extra.into_iter().collect();
        if !pairs.contains(&seed) {
            pairs.push(seed);
        }
        pairs.sort_unstable();
        let subsets = keep_subsets(&pairs, seed, d, cap);
        prop_assert!(subsets.len() <= cap);
        for ks in &subsets {
            prop_assert_eq!(ks.len(), d);
            prop_assert!(ks.contains(&seed));
            prop_assert!(ks.windows(2).all(|w| w[0] < w[1]), "sorted, duplicate-free");
            prop_assert!(ks.iter().all(|p| pairs.contains(p)));
        }
        let mut seen = subsets.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), subsets.len(), "no duplicate keep-sets");
    }
}
