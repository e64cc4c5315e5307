mod common;

use proptest::prelude::*;
use satforge::cnf::evaluate;
use satforge::local_search::{gsat, trace_metrics, LsConfig};
use satforge::solver::brute_force;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_flip_is_greedy(f in common::formula(12, 50, 3), seed in any::<u64>(), max_flips in 1usize..40, restarts in 0usize..3) {
        let config = LsConfig { max_flips, max_restarts: restarts, seed };
        let outcome = gsat(&f, &config);
        prop_assert_eq!(common::check_greedy_descent(&f, &outcome.trace, max_flips), Ok(()));
        prop_assert_eq!(outcome.trace.starts.len(), outcome.trace.steps.iter().filter(|s| s.flipped.is_none()).count());
        prop_assert!(outcome.trace.starts.len() <= restarts + 1);
        prop_assert_eq!(outcome.solved, evaluate(&f, &outcome.assignment).unwrap().satisfied);
        prop_assert_eq!(outcome.solved, outcome.trace.final_unsat() == Some(0));
        if outcome.solved {
            prop_assert!(brute_force(&f).unwrap().is_sat());
        } else {
            prop_assert_eq!(outcome.trace.starts.len(), restarts + 1);
        }
        let metrics = trace_metrics(&outcome.trace);
        prop_assert_eq!(metrics.unsat.len(), outcome.trace.steps.len());
        prop_assert_eq!(metrics.flips.iter().map(|&b| b as usize).sum::<usize>(), outcome.trace.num_flips());
        prop_assert!(metrics.distinct_assignments <= outcome.trace.steps.len());
    }

    #[test]
    fn runs_are_reproducible(f in common::formula(10, 30, 3), seed in any::<u64>()) {
        let config = LsConfig { max_flips: 20, max_restarts: 1, seed };
        let a = gsat(&f, &config);
        let b = gsat(&f, &config);
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.assignment, b.assignment);
    }
}
