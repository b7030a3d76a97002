//! Multi-restart learning experiments: seeded random initializations, one
//! optimizer run per restart, success classification, clustering of the
//! reached optima, and report emission.

mod report;

pub use report::{emit_report, ReportFormat};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::BTreeMap;

use crate::datasets::{builtin, Dataset, DatasetError};
use crate::grammar::{surface_distribution, SurfaceDistribution, WeightVector};
use crate::objective::{ObjectiveError, ObjectiveValue, ObservedDistribution, RegularizationConfig};
use crate::optimizer::{minimize, OptimizerConfig, Termination};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("experiment needs at least one run")]
    NoRuns,
    #[error("initialization bounds [{low}, {high}] are not a finite nonempty interval")]
    BadInitRange { low: f64, high: f64 },
    #[error("sweep axis over (stratum {stratum}, constraint {constraint}) has no values")]
    EmptySweepAxis { stratum: usize, constraint: usize },
    #[error("sweep axes disagree on row count ({first} vs {other}); lists must share one length or be singletons")]
    RaggedSweep { first: usize, other: usize },
    #[error("sweep axis names stratum {stratum}, constraint {constraint}, outside the weight shape")]
    SweepAxisOutOfRange { stratum: usize, constraint: usize },
}

/// Full description of a multi-restart experiment. Serializable, so a config
/// file mirrors these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in dataset names, run in the order given.
    pub datasets: Vec<String>,
    /// Restarts per dataset.
    pub runs: usize,
    pub seed: u64,
    /// Initial weights are drawn uniformly from [init_low, init_high].
    pub init_low: f64,
    pub init_high: f64,
    /// When true, every dataset with the same weight shape sees the same
    /// initialization sequence; when false, the dataset's position is mixed
    /// into the seed.
    pub shared_inits: bool,
    pub optimizer: OptimizerConfig,
    /// Overrides every dataset's own default prior when set.
    pub regularization: Option<RegularizationConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            runs: 100,
            seed: 0,
            init_low: 0.0,
            init_high: 10.0,
            shared_inits: true,
            optimizer: OptimizerConfig::default(),
            regularization: None,
        }
    }
}

/// An attested surface form the fitted grammar fails to prefer.
#[derive(Debug, Clone, PartialEq)]
pub struct FailingForm {
    pub ur: String,
    pub surface: String,
    pub probability: f64,
}

/// Success means every attested surface form (observed probability 1) is
/// predicted with probability strictly greater than one half.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub success: bool,
    pub failing: Vec<FailingForm>,
}

/// One restart: where it started, where it ended, and what that grammar says.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_index: usize,
    pub initial_weights: WeightVector,
    pub final_weights: WeightVector,
    pub final_objective: ObjectiveValue,
    pub iterations: usize,
    pub termination: Termination,
    /// Predicted surface distribution per underlying form, in dataset order.
    pub distributions: Vec<SurfaceDistribution>,
    pub success: bool,
    pub failing: Vec<FailingForm>,
}

/// Runs that reached the same surface distributions after rounding.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// 1-based rank in the report, assigned largest-first.
    pub id: usize,
    /// Member run indices, ascending.
    pub runs: Vec<usize>,
    pub success: bool,
    /// Rounded per-UR surface distributions shared by the members.
    pub signature: BTreeMap<String, BTreeMap<String, f64>>,
    /// Lowest member run index; reports print its weights.
    pub representative: usize,
}

#[derive(Debug, Clone)]
pub struct DatasetResult {
    pub dataset: Dataset,
    pub success_count: usize,
    pub runs: Vec<RunRecord>,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetResult>,
}

/// Draws `runs` initial weight vectors of the given shape, uniformly from
/// [low, high], deterministically from `seed`. The sequence depends only on
/// (seed, runs, shape).
pub fn draw_initializations(
    seed: u64,
    runs: usize,
    low: f64,
    high: f64,
    strata: usize,
    constraints: usize,
) -> Result<Vec<WeightVector>, ExperimentError> {
    if runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    if !(low.is_finite() && high.is_finite() && low <= high) {
        return Err(ExperimentError::BadInitRange { low, high });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = strata * constraints;
    Ok((0..runs)
        .map(|_| {
            let flat: Vec<f64> = (0..n).map(|_| rng.gen_range(low..=high)).collect();
            WeightVector::new(strata, constraints, flat).expect("drawn to shape")
        })
        .collect())
}

/// Seed used for one dataset's initializations: the configured seed when
/// inits are shared, otherwise the seed mixed with the dataset's position.
fn dataset_seed(config: &ExperimentConfig, dataset_index: usize) -> u64 {
    if config.shared_inits {
        config.seed
    } else {
        config
            .seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(dataset_index as u64 + 1))
    }
}

fn classify_distributions(
    observed: &ObservedDistribution,
    distributions: &[SurfaceDistribution],
) -> Classification {
    let mut failing = Vec::new();
    for (ur, surface, p_obs) in observed.iter() {
        if p_obs != 1.0 {
            continue;
        }
        let predicted = distributions
            .iter()
            .find(|d| d.ur() == ur)
            .map(|d| d.probability(surface))
            .unwrap_or(0.0);
        if !(predicted > 0.5) {
            failing.push(FailingForm {
                ur: ur.to_string(),
                surface: surface.to_string(),
                probability: predicted,
            });
        }
    }
    Classification {
        success: failing.is_empty(),
        failing,
    }
}

/// Classifies a weight setting against a dataset: success iff every attested
/// surface form is predicted with probability above one half.
pub fn classify(dataset: &Dataset, weights: &WeightVector) -> Result<Classification, ObjectiveError> {
    let mut distributions = Vec::with_capacity(dataset.graphs().len());
    for graph in dataset.graphs() {
        distributions.push(surface_distribution(graph, weights)?);
    }
    Ok(classify_distributions(dataset.observed(), &distributions))
}

fn execute_run(
    dataset: &Dataset,
    regularization: &RegularizationConfig,
    optimizer: &OptimizerConfig,
    run_index: usize,
    init: &WeightVector,
) -> RunRecord {
    let result =
        minimize(dataset, init, regularization, optimizer).expect("dataset validated up front");
    let distributions: Vec<SurfaceDistribution> = dataset
        .graphs()
        .iter()
        .map(|graph| {
            surface_distribution(graph, &result.final_weights).expect("dataset validated up front")
        })
        .collect();
    let classification = classify_distributions(dataset.observed(), &distributions);
    RunRecord {
        run_index,
        initial_weights: result.initial_weights,
        final_weights: result.final_weights,
        final_objective: result.final_objective,
        iterations: result.iterations,
        termination: result.termination,
        distributions,
        success: classification.success,
        failing: classification.failing,
    }
}

/// Runs the full experiment on pre-resolved datasets (`config.datasets` is
/// ignored in favor of the list given here).
pub fn run_experiment_on(
    datasets: &[Dataset],
    config: &ExperimentConfig,
) -> Result<ExperimentOutput, ExperimentError> {
    let mut results = Vec::with_capacity(datasets.len());
    for (index, dataset) in datasets.iter().enumerate() {
        let regularization = config
            .regularization
            .unwrap_or_else(|| dataset.regularization());
        let inits = draw_initializations(
            dataset_seed(config, index),
            config.runs,
            config.init_low,
            config.init_high,
            dataset.strata(),
            dataset.constraints().len(),
        )?;
        // Surfaces any structural problem once, so the parallel runs below
        // cannot fail.
        minimize(
            dataset,
            &inits[0],
            &regularization,
            &OptimizerConfig {
                max_iterations: 0,
                ..config.optimizer
            },
        )?;
        let runs: Vec<RunRecord> = inits
            .par_iter()
            .enumerate()
            .map(|(run_index, init)| {
                execute_run(dataset, &regularization, &config.optimizer, run_index, init)
            })
            .collect();
        let success_count = runs.iter().filter(|r| r.success).count();
        let clusters = cluster_runs(&runs, 2);
        results.push(DatasetResult {
            dataset: dataset.clone(),
            success_count,
            runs,
            clusters,
        });
    }
    Ok(ExperimentOutput {
        config: config.clone(),
        datasets: results,
    })
}

/// Runs the experiment described by `config`, resolving its dataset names
/// from the built-in catalog.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let datasets = config
        .datasets
        .iter()
        .map(|name| builtin(name))
        .collect::<Result<Vec<_>, _>>()?;
    run_experiment_on(&datasets, config)
}

/// Groups runs whose predicted surface distributions agree after rounding to
/// `decimals` places (and whose success flags agree, so that cluster sizes
/// partition the success count). Clusters come back largest first, ids from 1.
pub fn cluster_runs(runs: &[RunRecord], decimals: u32) -> Vec<Cluster> {
    let scale = 10f64.powi(decimals as i32);
    let mut groups: BTreeMap<(bool, Vec<(String, String, i64)>), Vec<usize>> = BTreeMap::new();
    for record in runs {
        let mut key = Vec::new();
        for dist in &record.distributions {
            for (surface, p) in dist.iter() {
                key.push((
                    dist.ur().to_string(),
                    surface.to_string(),
                    (p * scale).round() as i64,
                ));
            }
        }
        groups
            .entry((!record.success, key))
            .or_default()
            .push(record.run_index);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|((failed, key), mut members)| {
            members.sort_unstable();
            let mut signature: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
            for (ur, surface, rounded) in key {
                signature
                    .entry(ur)
                    .or_default()
                    .insert(surface, rounded as f64 / scale);
            }
            Cluster {
                id: 0,
                representative: members[0],
                runs: members,
                success: !failed,
                signature,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.runs
            .len()
            .cmp(&a.runs.len())
            .then(a.representative.cmp(&b.representative))
    });
    for (rank, cluster) in clusters.iter_mut().enumerate() {
        cluster.id = rank + 1;
    }
    clusters
}

/// One axis of a diagnostic sweep: the weight at (stratum, constraint) takes
/// these values down the rows. A single-value axis broadcasts.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub stratum: usize,
    pub constraint: usize,
    pub values: Vec<f64>,
}

/// One sweep row: the composed weights and what the grammar does with them.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub weights: WeightVector,
    pub distributions: Vec<SurfaceDistribution>,
    pub objective: ObjectiveValue,
}

/// Evaluates the dataset along rows formed by zipping the axes over `base`
/// (axes advance together; singleton axes broadcast). No optimization runs;
/// this tabulates the objective and predictions at chosen weight settings.
pub fn diagnostic_sweep(
    dataset: &Dataset,
    base: &WeightVector,
    axes: &[SweepAxis],
    regularization: Option<&RegularizationConfig>,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    let default_reg = dataset.regularization();
    let reg = regularization.unwrap_or(&default_reg);

    let mut rows = 1;
    for axis in axes {
        if axis.values.is_empty() {
            return Err(ExperimentError::EmptySweepAxis {
                stratum: axis.stratum,
                constraint: axis.constraint,
            });
        }
        if axis.stratum >= base.strata() || axis.constraint >= base.constraints() {
            return Err(ExperimentError::SweepAxisOutOfRange {
                stratum: axis.stratum,
                constraint: axis.constraint,
            });
        }
        let len = axis.values.len();
        if len > 1 {
            if rows > 1 && rows != len {
                return Err(ExperimentError::RaggedSweep {
                    first: rows,
                    other: len,
                });
            }
            rows = len;
        }
    }

    let mut points = Vec::with_capacity(rows);
    for row in 0..rows {
        let mut weights = base.clone();
        for axis in axes {
            let value = if axis.values.len() == 1 {
                axis.values[0]
            } else {
                axis.values[row]
            };
            weights.set(axis.stratum, axis.constraint, value);
        }
        let mut distributions = Vec::with_capacity(dataset.graphs().len());
        for graph in dataset.graphs() {
            distributions.push(surface_distribution(graph, &weights).map_err(ObjectiveError::from)?);
        }
        let objective =
            crate::objective::objective(dataset.graphs(), dataset.observed(), &weights, reg)?;
        points.push(SweepPoint {
            weights,
            distributions,
            objective,
        });
    }
    Ok(points)
}
