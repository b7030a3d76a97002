//! Small hand-built grammars shared by unit tests.

use crate::datasets;
use crate::grammar::{DerivationGraph, StepTableau};
use crate::objective::ObservedDistribution;

/// Two-stratum vowel tensing/laxing chain (the `french-opaque` built-in):
/// constraints are (*lax-in-open-syllable, *tense-in-closed-syllable,
/// vowel faithfulness).
pub fn french_graphs() -> Vec<DerivationGraph> {
    datasets::builtin("french-opaque")
        .expect("built-in exists")
        .graphs()
        .to_vec()
}

pub fn french_observed() -> ObservedDistribution {
    datasets::builtin("french-opaque")
        .expect("built-in exists")
        .observed()
        .clone()
}

/// Three strata, two constraints, two candidates per step, with forms that
/// merge and diverge; exercises deeper chains than the built-in datasets.
pub fn deep_graph() -> DerivationGraph {
    DerivationGraph::new(
        "A",
        3,
        vec![
            StepTableau::new(0, "A", vec![("B", vec![0, 1]), ("C", vec![1, 0])]).unwrap(),
            StepTableau::new(1, "B", vec![("D", vec![2, 0]), ("E", vec![0, 1])]).unwrap(),
            StepTableau::new(1, "C", vec![("D", vec![1, 1]), ("E", vec![0, 0])]).unwrap(),
            StepTableau::new(2, "D", vec![("F", vec![0, 2]), ("G", vec![1, 0])]).unwrap(),
            StepTableau::new(2, "E", vec![("F", vec![1, 0]), ("G", vec![0, 1])]).unwrap(),
        ],
    )
    .unwrap()
}
