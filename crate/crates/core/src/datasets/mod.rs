//! Datasets: named bundles of constraints, derivation graphs, and observed
//! surface distributions, plus built-ins and a JSON interchange format.

mod builtin;
mod format;

pub use builtin::{all_builtins, builtin, builtin_names};
pub use format::{parse_dataset, serialize_dataset};

use thiserror::Error;

use crate::grammar::{ConstraintSet, DerivationGraph, GrammarError, WeightVector};
use crate::objective::{ObjectiveError, ObservedDistribution, RegularizationConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset JSON is not valid: {0}")]
    Json(String),
    #[error("{location}: violation count {value} is negative")]
    NegativeViolation { location: String, value: i64 },
    #[error("{location}: stratum {value} is negative")]
    NegativeStratum { location: String, value: i64 },
    #[error("{location}: {source}")]
    Tableau {
        location: String,
        source: GrammarError,
    },
    #[error("input `{ur}`: {source}")]
    Graph { ur: String, source: GrammarError },
    #[error("observed data: {source}")]
    Observed { source: ObjectiveError },
    #[error("observed entry `{ur}` -> `{surface}`: surface form is not reachable")]
    UnreachableSurface { ur: String, surface: String },
    #[error("observed entry names unknown input `{ur}`")]
    UnknownObservedUr { ur: String },
    #[error("two inputs share the underlying form `{ur}`")]
    DuplicateInput { ur: String },
    #[error("input `{ur}`: tableaux have {found} violation columns, dataset declares {expected} constraints")]
    WidthMismatch {
        ur: String,
        expected: usize,
        found: usize,
    },
    #[error("input `{ur}`: graph spans {found} strata, dataset declares {expected}")]
    StrataMismatch {
        ur: String,
        expected: usize,
        found: usize,
    },
    #[error("sigma2 must be positive, got {0}")]
    NonpositiveSigma2(f64),
    #[error("unknown built-in dataset `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },
}

/// A named learning problem: constraint inventory, one derivation graph per
/// underlying form, observed surface probabilities, and the default prior
/// variance used when fitting it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    sigma2_default: f64,
    strata: usize,
    constraints: ConstraintSet,
    graphs: Vec<DerivationGraph>,
    observed: ObservedDistribution,
}

impl Dataset {
    /// Validates cross-references and normalizes input order (graphs are kept
    /// sorted by underlying form so that structurally equal datasets compare
    /// and serialize identically).
    pub fn new(
        name: impl Into<String>,
        sigma2_default: f64,
        strata: usize,
        constraints: ConstraintSet,
        mut graphs: Vec<DerivationGraph>,
        observed: ObservedDistribution,
    ) -> Result<Self, DatasetError> {
        let name = name.into();
        if !(sigma2_default > 0.0) {
            return Err(DatasetError::NonpositiveSigma2(sigma2_default));
        }
        graphs.sort_by(|a, b| a.ur().cmp(b.ur()));
        for pair in graphs.windows(2) {
            if pair[0].ur() == pair[1].ur() {
                return Err(DatasetError::DuplicateInput {
                    ur: pair[0].ur().to_string(),
                });
            }
        }
        for graph in &graphs {
            if graph.constraint_count() != constraints.len() {
                return Err(DatasetError::WidthMismatch {
                    ur: graph.ur().to_string(),
                    expected: constraints.len(),
                    found: graph.constraint_count(),
                });
            }
            if graph.strata() != strata {
                return Err(DatasetError::StrataMismatch {
                    ur: graph.ur().to_string(),
                    expected: strata,
                    found: graph.strata(),
                });
            }
        }
        for (ur, surface, _) in observed.iter() {
            let Some(graph) = graphs.iter().find(|g| g.ur() == ur) else {
                return Err(DatasetError::UnknownObservedUr { ur: ur.to_string() });
            };
            if !graph.surface_forms().contains(surface) {
                return Err(DatasetError::UnreachableSurface {
                    ur: ur.to_string(),
                    surface: surface.to_string(),
                });
            }
        }
        Ok(Self {
            name,
            sigma2_default,
            strata,
            constraints,
            graphs,
            observed,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sigma2_default(&self) -> f64 {
        self.sigma2_default
    }

    pub fn strata(&self) -> usize {
        self.strata
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn graphs(&self) -> &[DerivationGraph] {
        &self.graphs
    }

    pub fn graph(&self, ur: &str) -> Option<&DerivationGraph> {
        self.graphs.iter().find(|g| g.ur() == ur)
    }

    pub fn observed(&self) -> &ObservedDistribution {
        &self.observed
    }

    /// Zero mean, dataset-default variance.
    pub fn regularization(&self) -> RegularizationConfig {
        RegularizationConfig::with_sigma2(self.sigma2_default)
    }

    pub fn zero_weights(&self) -> WeightVector {
        WeightVector::zeros(self.strata, self.constraints.len())
    }

    pub fn weight_count(&self) -> usize {
        self.strata * self.constraints.len()
    }
}
