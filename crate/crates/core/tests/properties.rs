//! Property tests over randomized generators and parameters.

use hmmq_core::generator::random::{random_generator, RandomKind};
use hmmq_core::generator::DEFAULT_WORD_BUDGET;
use hmmq_core::numeric::round_sig;
use hmmq_core::quantum::{solve_overlaps, EncodingScheme};
use hmmq_core::renewal::RenewalFamily;
use hmmq_core::spectra;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_kind() -> impl Strategy<Value = RandomKind> {
    prop_oneof![
        Just(RandomKind::Dense),
        Just(RandomKind::Unifilar),
        Just(RandomKind::Retrodictive)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_generators_satisfy_stationarity(
        seed in 0u64..1_000_000,
        n_states in 2usize..=5,
        n_symbols in 2usize..=3,
        kind in arb_kind(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = random_generator(&mut rng, n_states, n_symbols, kind);
        let pi = gen.stationary();
        prop_assert!((pi.sum() - 1.0).abs() < 1e-12);
        prop_assert!(pi.min() > 0.0);
        let mut out = nalgebra::DVector::zeros(gen.n_states());
        for x in 0..gen.n_symbols() {
            out += gen.propagate(x, pi);
        }
        prop_assert!((out - pi).amax() < 1e-10);
    }

    #[test]
    fn word_probabilities_form_a_distribution(
        seed in 0u64..1_000_000,
        n_states in 2usize..=4,
        kind in arb_kind(),
        l in 1usize..=5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = random_generator(&mut rng, n_states, 2, kind);
        let words = gen.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
        let total: f64 = words.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(words.iter().all(|&(_, p)| (0.0..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn gram_matrices_are_psd_with_unit_diagonal(
        seed in 0u64..1_000_000,
        n_states in 2usize..=5,
        kind in arb_kind(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = random_generator(&mut rng, n_states, 2, kind);
        let gram = solve_overlaps(&gen, &EncodingScheme::EndStateLabel).unwrap();
        let spectrum = spectra::eigenvalues_complex(gram.entries()).unwrap();
        prop_assert!(spectra::check_psd(&spectrum).is_ok());
        for j in 0..gram.n() {
            prop_assert!((gram.entry(j, j).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn survival_is_monotone_and_normalized(p in 0.05f64..0.95) {
        let fam = RenewalFamily::sns(p).unwrap();
        let mut prev = 1.0f64;
        for n in 0..=fam.truncation() {
            let s = fam.survival(n);
            prop_assert!(s <= prev + 1e-15);
            prop_assert!(s >= 0.0);
            prev = s;
        }
        let total: f64 = (1..=fam.truncation()).map(|n| fam.phi(n)).sum();
        prop_assert!((total - 1.0).abs() < 1e-11);
    }

    #[test]
    fn round_sig_is_idempotent_and_close(x in -1.0e6f64..1.0e6) {
        let r = round_sig(x, 12);
        prop_assert_eq!(round_sig(r, 12), r);
        if x != 0.0 {
            prop_assert!(((r - x) / x).abs() < 1e-11);
        }
    }

    #[test]
    fn merge_never_increases_state_count(
        seed in 0u64..1_000_000,
        n_states in 2usize..=5,
        kind in arb_kind(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = random_generator(&mut rng, n_states, 2, kind);
        let merged = gen.merge_equivalent_states();
        prop_assert!(merged.n_states() <= gen.n_states());
        prop_assert_eq!(
            merged.merge_equivalent_states().n_states(),
            merged.n_states()
        );
    }
}
