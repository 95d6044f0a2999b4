mod common;

use copekit::factorizer::{gpt_to_trivial_ontological, quasi_from_gpt};
use copekit::linalg::independent_columns;
use copekit::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(seed: u64) -> CopeMatrix {
    common::random_cope(&mut ChaCha8Rng::seed_from_u64(seed), 6, 6, &[1, 2, 3, 4])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pregpt_reconstructs_with_a_unit(seed in any::<u64>()) {
        let c = matrix(seed);
        let m = pregpt_from_svd(&c);
        let rep = classify_model(&c, &m).unwrap();
        prop_assert!(rep.reconstruction_ok && rep.unit_ok);
        prop_assert_eq!(m.inner_dim(), c.num_rows());
    }

    #[test]
    fn gpt_is_equirank(seed in any::<u64>()) {
        let c = matrix(seed);
        let g = gpt(&c);
        let rep = classify_model(&c, &g).unwrap();
        prop_assert!(rep.is(ModelKind::Gpt));
        prop_assert_eq!(g.inner_dim(), c.rank());
        prop_assert!(g.backend.is_exact());
    }

    #[test]
    fn quasi_has_unit_ones(seed in any::<u64>()) {
        let c = matrix(seed);
        let g = gpt(&c);
        let tom = independent_columns(c.data(), c.backend());
        let quasi = quasi_from_gpt(&g, &tom).unwrap();
        let rep = classify_model(&c, &quasi).unwrap();
        prop_assert!(rep.is(ModelKind::Quasiprobabilistic));
        prop_assert!(rep.unit_is_ones);
    }

    #[test]
    fn trivial_models_are_ontological(seed in any::<u64>()) {
        let c = matrix(seed);
        let t = trivial_ontological(&c);
        prop_assert!(classify_model(&c, &t).unwrap().is(ModelKind::Ontological));
        let via_gpt = gpt_to_trivial_ontological(&gpt(&c), &c).unwrap();
        prop_assert_eq!(via_gpt.effects, t.effects);
    }

    #[test]
    fn merging_preserves_rank(seed in any::<u64>()) {
        let c = matrix(seed);
        let merged = c.merge_measurements();
        prop_assert_eq!(merged.rank(), c.rank());
        prop_assert_eq!(merged.num_measurements(), 1);
        prop_assert!(merged.is_valid());
    }

    #[test]
    fn quotienting_is_idempotent(seed in any::<u64>()) {
        let c = matrix(seed);
        let once = c.quotient_extremal().quotiented;
        let twice = once.quotient_extremal().quotiented;
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.is_valid());
        prop_assert_eq!(once.rank(), c.rank());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nmf_outputs_are_verified(seed in any::<u64>()) {
        let c = matrix(seed);
        let opts = NmfOptions { max_restarts: 4, ..NmfOptions::with_inner_dim(c.num_preparations()) };
        let m = nmf(&c, &opts).expect("inner dimension n always admits the trivial model");
        let rep = classify_model(&c, &m).unwrap();
        prop_assert!(rep.is(ModelKind::Ontological));
        prop_assert!(rep.nonnegative_ok && rep.states_column_stochastic_ok && rep.unit_is_ones);
    }

    #[test]
    fn enmf_claims_hold(seed in any::<u64>()) {
        let c = matrix(seed);
        let opts = NmfOptions { max_restarts: 4, ..NmfOptions::default() };
        if let Some(m) = enmf(&c, &opts) {
            prop_assert!(classify_model(&c, &m).unwrap().is(ModelKind::NoncontextualOntological));
        }
    }
}

#[test]
fn nmf_below_rank_is_absent() {
    let c = theories::spekkens();
    assert!(nmf(&c, &NmfOptions::with_inner_dim(3)).is_none());
}

#[test]
fn quasi_rejects_singular_choices() {
    let c = theories::spekkens();
    let g = gpt(&c);
    // Columns 0 and 1 mix to the same point as columns 2 and 3.
    assert!(matches!(quasi_from_gpt(&g, &[0, 1, 2, 3]), Err(CopeError::Singular(_))));
    assert!(matches!(quasi_from_gpt(&g, &[0, 1]), Err(CopeError::Precondition(_))));
}

#[test]
fn restarts_are_deterministic_across_thread_counts() {
    let c = theories::spekkens();
    let base = NmfOptions { seed: 7, ..NmfOptions::default() };
    let one = enmf(&c, &NmfOptions { threads: Some(1), ..base.clone() }).unwrap();
    let many = enmf(&c, &NmfOptions { threads: Some(4), ..base }).unwrap();
    assert_eq!(one, many);
}
