//! Stratal maximum-entropy grammars.
//!
//! A grammar is a chain of log-linear (MaxEnt) evaluations: each underlying
//! form is rewritten stratum by stratum, every rewrite step is a softmax over
//! weighted constraint violations, and the probability of a surface form is
//! the total probability of every derivational path that reaches it. Learning
//! minimizes KL-divergence from observed surface distributions plus an L2
//! penalty, subject to nonnegative weights.
//!
//! Modules:
//! - [`grammar`]: tableaux, derivation graphs, weights, surface distributions
//! - [`objective`]: KL-divergence, L2 penalty, analytic gradient
//! - [`optimizer`]: bound-constrained limited-memory quasi-Newton minimizer
//! - [`datasets`]: built-in datasets and the JSON interchange format
//! - [`experiment`]: multi-restart sweeps, clustering, reports, weight sweeps

pub mod datasets;
pub mod experiment;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod grammar;
pub mod objective;
pub mod optimizer;

pub use datasets::Dataset;
pub use grammar::{
    ConstraintSet, DerivationGraph, DerivationPath, GrammarError, PathStep, StepTableau,
    SurfaceDistribution, WeightVector,
};
pub use objective::{ObjectiveValue, ObservedDistribution, RegularizationConfig};
pub use optimizer::{OptimizeResult, OptimizerConfig, Termination};
pub use experiment::{ExperimentConfig, ExperimentOutput, ReportFormat, RunRecord};
