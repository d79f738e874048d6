mod common;

use common::{instance_strategy, props};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn degree_is_a_fraction_of_one(inst in instance_strategy(), by_class in any::<bool>()) {
        props::degree_in_unit_interval(&inst, by_class)?;
    }

    #[test]
    fn full_degree_iff_criterion(inst in instance_strategy(), by_class in any::<bool>()) {
        props::full_degree_iff_criterion(&inst, by_class)?;
    }

    #[test]
    fn adding_associations_never_lowers_the_degree(
        inst in instance_strategy(),
        t in 0usize..6,
        m in 0usize..6,
        by_class in any::<bool>(),
    ) {
        props::monotone_in_associations(&inst, t, m, by_class)?;
    }

    #[test]
    fn raising_k_never_raises_the_degree(inst in instance_strategy(), by_class in any::<bool>()) {
        props::non_increasing_in_k(&inst, by_class)?;
    }

    #[test]
    fn greedy_trace_strictly_increases(inst in instance_strategy(), decile in 0u64..10, seed in any::<u64>()) {
        props::greedy_trace_increasing(&inst, decile, seed)?;
    }

    #[test]
    fn results_are_deterministic_under_a_seed(inst in instance_strategy(), decile in 0u64..10, seed in any::<u64>()) {
        props::deterministic_under_seed(&inst, decile, seed)?;
    }

    #[test]
    fn satisfying_suites_satisfy(inst in instance_strategy(), seed in any::<u64>()) {
        props::satisfying_suites_satisfy(&inst, seed)?;
    }
}
