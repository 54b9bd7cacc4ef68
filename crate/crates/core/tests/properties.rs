//! Randomized invariants: stochastic rows, beliefs staying on the simplex,
//! sound pruning, exact value iteration agreeing with brute-force
//! expectimax, flattening agreeing with the factored model, and cascades
//! responding monotonically to islanding.

mod common;

use proptest::prelude::*;

use sensact::instances::{
    example1_mdp, example2_mdp, example3_instance, example4_instance, GapParams,
};

fn ok(check: common::Check) -> std::result::Result<(), TestCaseError> {
    check.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_instances_have_stochastic_rows(seed in any::<u64>()) {
        ok(common::rows_are_stochastic(seed))?;
    }

    #[test]
    fn flatten_matches_random_factored_models(seed in any::<u64>()) {
        ok(common::random_flatten_agrees(seed))?;
    }

    #[test]
    fn belief_updates_stay_on_the_simplex(seed in any::<u64>(), n in 2usize..6, no in 1usize..4) {
        ok(common::beliefs_stay_on_simplex(seed, n, no))?;
    }

    #[test]
    fn pruning_preserves_the_upper_envelope(seed in any::<u64>(), dim in 2usize..6, count in 1usize..40) {
        ok(common::pruning_is_sound(seed, dim, count))?;
    }

    #[test]
    fn value_iteration_matches_expectimax(seed in any::<u64>(), n in 2usize..4, stages in 1usize..=3) {
        ok(common::matches_expectimax(seed, n, stages))?;
    }

    #[test]
    fn islanding_more_nodes_never_spreads_faults_further(seed in any::<u64>(), extra in 0usize..20) {
        ok(common::cascade_is_monotone(seed, extra))?;
    }
}

#[test]
fn flatten_matches_the_gadget_examples() {
    let gap = GapParams::new(1.0, 0.5, 5.0, 0.01, 0.9);
    for mdp in [
        example1_mdp(1.0, 0.1, 0.9).unwrap().mdp,
        example2_mdp(1.0, 0.1, 0.9).unwrap().mdp,
        example3_instance(&gap).unwrap().mdp,
        example4_instance(&gap).unwrap().mdp,
    ] {
        common::flatten_agrees(&mdp).unwrap();
    }
}
