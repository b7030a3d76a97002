//! The learning objective: KL-divergence from observed surface distributions
//! plus a Gaussian (L2) penalty on weights, with an analytic gradient.
//!
//! For observed distribution `p_obs` and predicted distribution `p_exp`,
//! `D_KL = sum p_obs * ln(p_obs / p_exp)`, summed over every (underlying
//! form, surface form) pair. The penalty is `sum (w - mu)^2 / (2 sigma2)`.
//! The gradient of `-ln p_exp(sr)` with respect to a stratum-`s` weight is
//! the posterior expectation, over derivational paths that reach `sr`, of
//! `v_k(chosen) - E[v_k]` at each stratum-`s` step; it is computed here by a
//! forward-backward pass rather than by enumerating paths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{
    step_distribution, surface_distribution, DerivationGraph, GrammarError, SurfaceDistribution,
    WeightVector,
};

/// Predicted probabilities are clamped here before taking logs so that the
/// objective stays finite for line searches; crossing the floor is recorded
/// in the `saturated` flag instead.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("observed probability for `{ur}` -> `{surface}` is {p}, outside [0, 1]")]
    InvalidProbability { ur: String, surface: String, p: f64 },
    #[error("observed entry for `{ur}` -> `{surface}` appears more than once")]
    DuplicateEntry { ur: String, surface: String },
    #[error("observed probabilities for `{ur}` sum to {total}, expected 1")]
    UnnormalizedObserved { ur: String, total: f64 },
    #[error("no derivation graph for observed underlying form `{ur}`")]
    UnknownUr { ur: String },
    #[error("two derivation graphs share the underlying form `{ur}`")]
    DuplicateGraph { ur: String },
    #[error("no predicted distribution for observed underlying form `{ur}`")]
    MissingPrediction { ur: String },
    #[error("sigma2 must be positive, got {0}")]
    NonpositiveSigma2(f64),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Gaussian prior on weights: mean `mu`, variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationConfig {
    pub mu: f64,
    pub sigma2: f64,
}

impl RegularizationConfig {
    pub fn with_sigma2(sigma2: f64) -> Self {
        Self { mu: 0.0, sigma2 }
    }

    fn validate(&self) -> Result<(), ObjectiveError> {
        if !(self.sigma2 > 0.0) {
            return Err(ObjectiveError::NonpositiveSigma2(self.sigma2));
        }
        Ok(())
    }
}

/// Observed surface probabilities, grouped by underlying form. Each group
/// must sum to 1 (within 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedDistribution {
    by_ur: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ObservedDistribution {
    pub fn new<I, S>(entries: I) -> Result<Self, ObjectiveError>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut by_ur: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (ur, surface, p) in entries {
            let (ur, surface) = (ur.into(), surface.into());
            if !(0.0..=1.0).contains(&p) {
                return Err(ObjectiveError::InvalidProbability { ur, surface, p });
            }
            let group = by_ur.entry(ur.clone()).or_default();
            if group.insert(surface.clone(), p).is_some() {
                return Err(ObjectiveError::DuplicateEntry { ur, surface });
            }
        }
        for (ur, group) in &by_ur {
            let total: f64 = group.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(ObjectiveError::UnnormalizedObserved {
                    ur: ur.clone(),
                    total,
                });
            }
        }
        Ok(Self { by_ur })
    }

    pub fn urs(&self) -> impl Iterator<Item = &str> {
        self.by_ur.keys().map(String::as_str)
    }

    pub fn for_ur(&self, ur: &str) -> Option<&BTreeMap<String, f64>> {
        self.by_ur.get(ur)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.by_ur.iter().flat_map(|(ur, group)| {
            group
                .iter()
                .map(move |(surface, p)| (ur.as_str(), surface.as_str(), *p))
        })
    }

    pub fn probability(&self, ur: &str, surface: &str) -> f64 {
        self.by_ur
            .get(ur)
            .and_then(|group| group.get(surface))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.by_ur.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_ur.is_empty()
    }
}

/// KL-divergence in nats plus a flag for predicted probabilities at or below
/// the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDivergence {
    pub nats: f64,
    pub saturated: bool,
}

/// Objective value split into its two terms; `total = kl + penalty`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub kl: f64,
    pub penalty: f64,
    pub total: f64,
    pub saturated: bool,
}

fn kl_impl(
    observed: &ObservedDistribution,
    expected: &BTreeMap<&str, &SurfaceDistribution>,
    floor: Option<f64>,
) -> Result<KlDivergence, ObjectiveError> {
    let mut nats = 0.0;
    let mut saturated = false;
    for (ur, group) in &observed.by_ur {
        let Some(prediction) = expected.get(ur.as_str()) else {
            return Err(ObjectiveError::MissingPrediction { ur: ur.clone() });
        };
        for (surface, p_obs) in group {
            if *p_obs == 0.0 {
                continue;
            }
            let p_exp = prediction.probability(surface);
            match floor {
                Some(floor) if p_exp < floor => {
                    saturated = true;
                    nats += p_obs * (p_obs / floor).ln();
                }
                None if p_exp == 0.0 => {
                    saturated = true;
                    nats = f64::INFINITY;
                }
                _ => {
                    nats += p_obs * (p_obs / p_exp).ln();
                }
            }
        }
    }
    Ok(KlDivergence { nats, saturated })
}

fn index_expected<'a>(
    expected: &'a [SurfaceDistribution],
) -> Result<BTreeMap<&'a str, &'a SurfaceDistribution>, ObjectiveError> {
    let mut map = BTreeMap::new();
    for dist in expected {
        if map.insert(dist.ur(), dist).is_some() {
            return Err(ObjectiveError::DuplicateGraph {
                ur: dist.ur().to_string(),
            });
        }
    }
    Ok(map)
}

/// Exact KL-divergence; positive infinity (with the flag set) when an
/// attested surface form has predicted probability zero.
pub fn kl_divergence(
    observed: &ObservedDistribution,
    expected: &[SurfaceDistribution],
) -> Result<KlDivergence, ObjectiveError> {
    kl_impl(observed, &index_expected(expected)?, None)
}

/// KL-divergence with predictions clamped at [`PROBABILITY_FLOOR`]; always
/// finite, which keeps line searches well-defined.
pub fn kl_divergence_clamped(
    observed: &ObservedDistribution,
    expected: &[SurfaceDistribution],
) -> Result<KlDivergence, ObjectiveError> {
    kl_impl(observed, &index_expected(expected)?, Some(PROBABILITY_FLOOR))
}

/// `sum (w - mu)^2 / (2 sigma2)` over every weight.
pub fn l2_penalty(weights: &WeightVector, config: &RegularizationConfig) -> f64 {
    let mut sum = 0.0;
    for w in weights.as_flat() {
        let d = w - config.mu;
        sum += d * d;
    }
    sum / (2.0 * config.sigma2)
}

fn index_graphs<'a>(
    graphs: &'a [DerivationGraph],
) -> Result<BTreeMap<&'a str, &'a DerivationGraph>, ObjectiveError> {
    let mut map = BTreeMap::new();
    for graph in graphs {
        if map.insert(graph.ur(), graph).is_some() {
            return Err(ObjectiveError::DuplicateGraph {
                ur: graph.ur().to_string(),
            });
        }
    }
    Ok(map)
}

/// Clamped KL plus penalty at `weights`. Observed underlying forms must each
/// have a graph; graphs without observed data contribute only through the
/// penalty (which depends on weights alone).
pub fn objective(
    graphs: &[DerivationGraph],
    observed: &ObservedDistribution,
    weights: &WeightVector,
    config: &RegularizationConfig,
) -> Result<ObjectiveValue, ObjectiveError> {
    config.validate()?;
    let by_ur = index_graphs(graphs)?;
    let mut expected = Vec::with_capacity(observed.by_ur.len());
    for ur in observed.urs() {
        let Some(graph) = by_ur.get(ur) else {
            return Err(ObjectiveError::UnknownUr { ur: ur.to_string() });
        };
        expected.push(surface_distribution(graph, weights)?);
    }
    let kl = kl_divergence_clamped(observed, &expected)?;
    let penalty = l2_penalty(weights, config);
    Ok(ObjectiveValue {
        kl: kl.nats,
        penalty,
        total: kl.nats + penalty,
        saturated: kl.saturated,
    })
}

/// Analytic gradient of [`objective`] with respect to every weight, shaped
/// like the weights themselves (entries may be negative).
pub fn gradient(
    graphs: &[DerivationGraph],
    observed: &ObservedDistribution,
    weights: &WeightVector,
    config: &RegularizationConfig,
) -> Result<WeightVector, ObjectiveError> {
    Ok(objective_and_gradient(graphs, observed, weights, config)?.1)
}

/// Computes the objective and its gradient in one pass per underlying form.
pub fn objective_and_gradient(
    graphs: &[DerivationGraph],
    observed: &ObservedDistribution,
    weights: &WeightVector,
    config: &RegularizationConfig,
) -> Result<(ObjectiveValue, WeightVector), ObjectiveError> {
    config.validate()?;
    let by_ur = index_graphs(graphs)?;
    let constraints = weights.constraints();
    let mut grad = vec![0.0; weights.strata() * constraints];
    let mut kl = 0.0;
    let mut saturated = false;

    for (ur, group) in &observed.by_ur {
        let Some(graph) = by_ur.get(ur.as_str()) else {
            return Err(ObjectiveError::UnknownUr { ur: ur.clone() });
        };
        let (term, term_saturated) =
            accumulate_for_graph(graph, group, weights, &mut grad)?;
        kl += term;
        saturated |= term_saturated;
    }

    // Penalty term and its gradient.
    let penalty = l2_penalty(weights, config);
    for (g, w) in grad.iter_mut().zip(weights.as_flat()) {
        *g += (w - config.mu) / config.sigma2;
    }

    let value = ObjectiveValue {
        kl,
        penalty,
        total: kl + penalty,
        saturated,
    };
    let gradient = WeightVector::new(weights.strata(), constraints, grad)
        .expect("gradient has the weight shape");
    Ok((value, gradient))
}

/// Central-difference approximation of the objective's gradient, one
/// coordinate at a time with step `h`. Slow; exists as an independent check
/// on [`gradient`].
pub fn numeric_gradient(
    graphs: &[DerivationGraph],
    observed: &ObservedDistribution,
    weights: &WeightVector,
    config: &RegularizationConfig,
    h: f64,
) -> Result<WeightVector, ObjectiveError> {
    let flat = weights.as_flat();
    let strata = weights.strata();
    let constraints = weights.constraints();
    let mut out = Vec::with_capacity(flat.len());
    for i in 0..flat.len() {
        let mut plus = flat.to_vec();
        plus[i] += h;
        let mut minus = flat.to_vec();
        minus[i] -= h;
        let plus = WeightVector::new(strata, constraints, plus).expect("same shape");
        let minus = WeightVector::new(strata, constraints, minus).expect("same shape");
        let fp = objective(graphs, observed, &plus, config)?.total;
        let fm = objective(graphs, observed, &minus, config)?.total;
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(WeightVector::new(strata, constraints, out).expect("same shape"))
}

/// Adds one underlying form's KL term and KL gradient. Forward masses and
/// per-step distributions are computed once; a backward pass per attested
/// surface form turns them into posterior step occupancies.
fn accumulate_for_graph(
    graph: &DerivationGraph,
    group: &BTreeMap<String, f64>,
    weights: &WeightVector,
    grad: &mut [f64],
) -> Result<(f64, bool), ObjectiveError> {
    let strata = graph.strata();
    let constraints = graph.constraint_count();

    // Forward masses per layer and cached step distributions.
    let mut layers: Vec<BTreeMap<String, f64>> = Vec::with_capacity(strata + 1);
    let mut dists: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    let mut mass: BTreeMap<String, f64> = BTreeMap::from([(graph.ur().to_string(), 1.0)]);
    for stratum in 0..strata {
        let mut next: BTreeMap<String, f64> = BTreeMap::new();
        for (form, incoming) in &mass {
            let tableau = graph.tableau(stratum, form).expect("graph is complete");
            let dist = step_distribution(tableau, weights)?;
            for (candidate, p) in tableau.candidates().iter().zip(&dist) {
                *next.entry(candidate.clone()).or_insert(0.0) += incoming * p;
            }
            dists.insert((stratum, form.clone()), dist);
        }
        layers.push(mass);
        mass = next;
    }
    layers.push(mass);

    let mut kl = 0.0;
    let mut saturated = false;
    for (surface, p_obs) in group {
        if *p_obs == 0.0 {
            continue;
        }
        let p_exp = layers[strata].get(surface).copied().unwrap_or(0.0);
        if p_exp < PROBABILITY_FLOOR {
            saturated = true;
        }
        let p_clamped = p_exp.max(PROBABILITY_FLOOR);
        kl += p_obs * (p_obs / p_clamped).ln();

        // Backward probabilities of finishing at `surface`.
        let mut backs: Vec<BTreeMap<&str, f64>> = vec![BTreeMap::new(); strata + 1];
        backs[strata].insert(surface.as_str(), 1.0);
        for stratum in (0..strata).rev() {
            let mut layer: BTreeMap<&str, f64> = BTreeMap::new();
            for form in layers[stratum].keys() {
                let tableau = graph.tableau(stratum, form).expect("graph is complete");
                let dist = &dists[&(stratum, form.clone())];
                let mut b = 0.0;
                for (candidate, p) in tableau.candidates().iter().zip(dist) {
                    b += p * backs[stratum + 1]
                        .get(candidate.as_str())
                        .copied()
                        .unwrap_or(0.0);
                }
                layer.insert(form.as_str(), b);
            }
            backs[stratum] = layer;
        }

        // Posterior occupancy of each step candidate, conditioned on the
        // surface form; each contributes (violations - expected violations).
        for stratum in 0..strata {
            for (form, alpha) in &layers[stratum] {
                let tableau = graph.tableau(stratum, form).expect("graph is complete");
                let dist = &dists[&(stratum, form.clone())];
                let rows = tableau.violations();
                let mut expected_violations = vec![0.0; constraints];
                for (p, row) in dist.iter().zip(rows) {
                    for (ev, v) in expected_violations.iter_mut().zip(row) {
                        *ev += p * f64::from(*v);
                    }
                }
                for ((candidate, p), row) in tableau.candidates().iter().zip(dist).zip(rows) {
                    let downstream = backs[stratum + 1]
                        .get(candidate.as_str())
                        .copied()
                        .unwrap_or(0.0);
                    let occupancy = p_obs * alpha * p * downstream / p_clamped;
                    if occupancy == 0.0 {
                        continue;
                    }
                    let base = stratum * constraints;
                    for (k, (v, ev)) in row.iter().zip(&expected_violations).enumerate() {
                        grad[base + k] += occupancy * (f64::from(*v) - ev);
                    }
                }
            }
        }
    }
    Ok((kl, saturated))
}
