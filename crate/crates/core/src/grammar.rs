//! Tableaux, derivation graphs, and the probability machinery they support.
//!
//! One evaluation step is a log-linear choice among candidates: candidate `i`
//! has harmony `H_i = -sum_k w_k * v_ik` (weights `w` nonnegative, violation
//! counts `v` nonnegative), and probability `exp(H_i) / sum_j exp(H_j)`.
//! A derivation graph chains steps across strata: the chosen candidate of a
//! stratum-`s` step is the input of a stratum-`s+1` step, and the probability
//! of a surface form marginalizes over every root-to-surface path.

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("expected {weights} violation counts to match the weights, found {violations}")]
    LengthMismatch { weights: usize, violations: usize },
    #[error("constraint name `{0}` appears more than once")]
    DuplicateConstraint(String),
    #[error("constraint set is empty")]
    EmptyConstraintSet,
    #[error("tableau at stratum {stratum} for input `{input}` has no candidates")]
    EmptyTableau { stratum: usize, input: String },
    #[error("tableau at stratum {stratum} for input `{input}` lists candidate `{candidate}` more than once")]
    DuplicateCandidate {
        stratum: usize,
        input: String,
        candidate: String,
    },
    #[error(
        "candidate `{candidate}` at stratum {stratum} (input `{input}`) has {found} violation \
         counts, expected {expected}"
    )]
    ViolationWidth {
        stratum: usize,
        input: String,
        candidate: String,
        expected: usize,
        found: usize,
    },
    #[error("weight vector has {found} entries, expected {strata} strata x {constraints} constraints")]
    WeightShape {
        strata: usize,
        constraints: usize,
        found: usize,
    },
    #[error("weights cover {weight_strata} strata but the graph has {graph_strata}")]
    StrataMismatch {
        weight_strata: usize,
        graph_strata: usize,
    },
    #[error("weights cover {weight_constraints} constraints but the graph has {graph_constraints}")]
    ConstraintMismatch {
        weight_constraints: usize,
        graph_constraints: usize,
    },
    #[error("graph for `{ur}` must have at least one stratum")]
    NoStrata { ur: String },
    #[error("graph for `{ur}` has no stratum-0 tableau whose input is the underlying form")]
    MissingRoot { ur: String },
    #[error("graph for `{ur}` has two tableaux at stratum {stratum} for input `{input}`")]
    DuplicateTableau {
        ur: String,
        stratum: usize,
        input: String,
    },
    #[error(
        "graph for `{ur}`: candidate `{candidate}` at stratum {stratum} has no stratum-{next} \
         tableau",
        next = stratum + 1
    )]
    MissingSuccessor {
        ur: String,
        stratum: usize,
        candidate: String,
    },
    #[error("graph for `{ur}`: tableau at stratum {stratum} for input `{input}` is unreachable")]
    UnreachableTableau {
        ur: String,
        stratum: usize,
        input: String,
    },
    #[error("graph for `{ur}`: tableau stratum {stratum} is outside 0..{strata}")]
    StratumOutOfRange {
        ur: String,
        stratum: usize,
        strata: usize,
    },
    #[error("graph for `{ur}`: tableaux disagree on constraint count ({first} vs {other})")]
    MixedWidths { ur: String, first: usize, other: usize },
    #[error("path has {found} steps but the graph has {expected} strata")]
    PathLength { expected: usize, found: usize },
    #[error("path step at stratum {stratum} expects input `{expected}`, found `{found}`")]
    PathInput {
        stratum: usize,
        expected: String,
        found: String,
    },
    #[error("path step at stratum {stratum}: `{candidate}` is not a candidate for input `{input}`")]
    PathCandidate {
        stratum: usize,
        input: String,
        candidate: String,
    },
}

/// Ordered set of constraint names; order fixes the meaning of violation
/// rows and weight columns everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    names: Vec<String>,
}

impl ConstraintSet {
    pub fn new<I, S>(names: I) -> Result<Self, GrammarError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(GrammarError::EmptyConstraintSet);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(GrammarError::DuplicateConstraint(name.clone()));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One evaluation step: the candidates considered for a single input form at
/// a single stratum, with one violation row per candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTableau {
    stratum: usize,
    input: String,
    candidates: Vec<String>,
    violations: Vec<Vec<u32>>,
}

impl StepTableau {
    pub fn new<S: Into<String>>(
        stratum: usize,
        input: S,
        rows: Vec<(S, Vec<u32>)>,
    ) -> Result<Self, GrammarError> {
        let input = input.into();
        if rows.is_empty() {
            return Err(GrammarError::EmptyTableau { stratum, input });
        }
        let mut candidates = Vec::with_capacity(rows.len());
        let mut violations = Vec::with_capacity(rows.len());
        for (form, row) in rows {
            candidates.push(form.into());
            violations.push(row);
        }
        let width = violations[0].len();
        let mut seen = BTreeSet::new();
        for (form, row) in candidates.iter().zip(&violations) {
            if !seen.insert(form.clone()) {
                return Err(GrammarError::DuplicateCandidate {
                    stratum,
                    input,
                    candidate: form.clone(),
                });
            }
            if row.len() != width {
                return Err(GrammarError::ViolationWidth {
                    stratum,
                    input,
                    candidate: form.clone(),
                    expected: width,
                    found: row.len(),
                });
            }
        }
        Ok(Self {
            stratum,
            input,
            candidates,
            violations,
        })
    }

    pub fn stratum(&self) -> usize {
        self.stratum
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn violations(&self) -> &[Vec<u32>] {
        &self.violations
    }

    pub fn constraint_count(&self) -> usize {
        self.violations[0].len()
    }

    pub fn candidate_index(&self, form: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == form)
    }
}

/// Weights laid out stratum-major: row `s` holds the weights every stratum-`s`
/// step uses. Entries are ordinarily nonnegative; the optimizer's projection
/// is what maintains that, so the container itself accepts any reals.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    strata: usize,
    constraints: usize,
    flat: Vec<f64>,
}

impl WeightVector {
    pub fn new(strata: usize, constraints: usize, flat: Vec<f64>) -> Result<Self, GrammarError> {
        if flat.len() != strata * constraints {
            return Err(GrammarError::WeightShape {
                strata,
                constraints,
                found: flat.len(),
            });
        }
        Ok(Self {
            strata,
            constraints,
            flat,
        })
    }

    pub fn zeros(strata: usize, constraints: usize) -> Self {
        Self {
            strata,
            constraints,
            flat: vec![0.0; strata * constraints],
        }
    }

    /// Builds from one row per stratum; rows must be nonempty and equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GrammarError> {
        let strata = rows.len();
        let constraints = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(strata * constraints);
        for row in rows {
            if row.len() != constraints {
                return Err(GrammarError::WeightShape {
                    strata,
                    constraints,
                    found: row.len() + flat.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::new(strata, constraints, flat)
    }

    pub fn strata(&self) -> usize {
        self.strata
    }

    pub fn constraints(&self) -> usize {
        self.constraints
    }

    pub fn row(&self, stratum: usize) -> &[f64] {
        let start = stratum * self.constraints;
        &self.flat[start..start + self.constraints]
    }

    pub fn get(&self, stratum: usize, constraint: usize) -> f64 {
        self.flat[stratum * self.constraints + constraint]
    }

    pub fn set(&mut self, stratum: usize, constraint: usize, value: f64) {
        self.flat[stratum * self.constraints + constraint] = value;
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn min(&self) -> f64 {
        self.flat.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.flat.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `H = -sum_k w_k * v_k`. Zero when either side is all zeros; never positive
/// for nonnegative weights.
pub fn harmony(weights: &[f64], violations: &[u32]) -> Result<f64, GrammarError> {
    if weights.len() != violations.len() {
        return Err(GrammarError::LengthMismatch {
            weights: weights.len(),
            violations: violations.len(),
        });
    }
    let mut sum = 0.0;
    for (w, v) in weights.iter().zip(violations) {
        sum += w * f64::from(*v);
    }
    Ok(-sum)
}

/// Softmax over the tableau's harmonies using the weight row for the
/// tableau's stratum. Max-shifted so arbitrarily large weights stay finite.
pub fn step_distribution(
    tableau: &StepTableau,
    weights: &WeightVector,
) -> Result<Vec<f64>, GrammarError> {
    if tableau.stratum >= weights.strata {
        return Err(GrammarError::StrataMismatch {
            weight_strata: weights.strata,
            graph_strata: tableau.stratum + 1,
        });
    }
    step_distribution_row(tableau, weights.row(tableau.stratum))
}

fn step_distribution_row(tableau: &StepTableau, row: &[f64]) -> Result<Vec<f64>, GrammarError> {
    let mut harmonies = Vec::with_capacity(tableau.candidates.len());
    for violations in &tableau.violations {
        harmonies.push(harmony(row, violations)?);
    }
    let shift = harmonies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut exps: Vec<f64> = harmonies.iter().map(|h| (h - shift).exp()).collect();
    let total: f64 = exps.iter().sum();
    for e in &mut exps {
        *e /= total;
    }
    Ok(exps)
}

/// One chosen candidate per stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub stratum: usize,
    pub input: String,
    pub chosen: String,
}

/// A root-to-surface derivation: the stratum-0 input is the underlying form
/// and each chosen candidate feeds the next stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationPath {
    steps: Vec<PathStep>,
}

impl DerivationPath {
    pub fn new(steps: Vec<PathStep>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn surface(&self) -> &str {
        &self.steps.last().expect("paths are never empty").chosen
    }
}

/// Probability distribution over the surface forms reachable from one
/// underlying form; always sums to 1 up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistribution {
    ur: String,
    probabilities: BTreeMap<String, f64>,
}

impl SurfaceDistribution {
    pub fn ur(&self) -> &str {
        &self.ur
    }

    pub fn probability(&self, surface: &str) -> f64 {
        self.probabilities.get(surface).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probabilities.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.probabilities.keys().map(String::as_str)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Complete derivation graph for one underlying form: a stratum-0 tableau for
/// the root, and a successor tableau for every candidate below the last
/// stratum. Construction validates completeness and rejects orphans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationGraph {
    ur: String,
    strata: usize,
    constraint_count: usize,
    tableaux: BTreeMap<(usize, String), StepTableau>,
}

impl DerivationGraph {
    pub fn new<S: Into<String>>(
        ur: S,
        strata: usize,
        tableaux: Vec<StepTableau>,
    ) -> Result<Self, GrammarError> {
        let ur = ur.into();
        if strata == 0 {
            return Err(GrammarError::NoStrata { ur });
        }
        let mut map: BTreeMap<(usize, String), StepTableau> = BTreeMap::new();
        let mut constraint_count = None;
        for tableau in tableaux {
            if tableau.stratum >= strata {
                return Err(GrammarError::StratumOutOfRange {
                    ur,
                    stratum: tableau.stratum,
                    strata,
                });
            }
            let width = tableau.constraint_count();
            match constraint_count {
                None => constraint_count = Some(width),
                Some(first) if first != width => {
                    return Err(GrammarError::MixedWidths {
                        ur,
                        first,
                        other: width,
                    });
                }
                _ => {}
            }
            let key = (tableau.stratum, tableau.input.clone());
            if map.contains_key(&key) {
                return Err(GrammarError::DuplicateTableau {
                    ur,
                    stratum: key.0,
                    input: key.1,
                });
            }
            map.insert(key, tableau);
        }
        if !map.contains_key(&(0, ur.clone())) {
            return Err(GrammarError::MissingRoot { ur });
        }

        // Walk forward from the root: every candidate below the last stratum
        // needs a successor, and every tableau must be reached.
        let mut reached: BTreeSet<(usize, String)> = BTreeSet::new();
        let mut frontier: BTreeSet<String> = BTreeSet::from([ur.clone()]);
        for stratum in 0..strata {
            let mut next = BTreeSet::new();
            for form in frontier {
                let key = (stratum, form);
                let Some(tableau) = map.get(&key) else {
                    return Err(GrammarError::MissingSuccessor {
                        ur,
                        stratum: stratum - 1,
                        candidate: key.1,
                    });
                };
                reached.insert(key);
                for candidate in &tableau.candidates {
                    next.insert(candidate.clone());
                }
            }
            frontier = next;
        }
        for key in map.keys() {
            if !reached.contains(key) {
                return Err(GrammarError::UnreachableTableau {
                    ur,
                    stratum: key.0,
                    input: key.1.clone(),
                });
            }
        }

        Ok(Self {
            ur,
            strata,
            constraint_count: constraint_count.expect("root tableau exists"),
            tableaux: map,
        })
    }

    pub fn ur(&self) -> &str {
        &self.ur
    }

    pub fn strata(&self) -> usize {
        self.strata
    }

    pub fn constraint_count(&self) -> usize {
        self.constraint_count
    }

    pub fn tableau(&self, stratum: usize, input: &str) -> Option<&StepTableau> {
        self.tableaux.get(&(stratum, input.to_string()))
    }

    /// All tableaux in (stratum, input) order.
    pub fn tableaux(&self) -> impl Iterator<Item = &StepTableau> {
        self.tableaux.values()
    }

    pub fn surface_forms(&self) -> BTreeSet<String> {
        let mut forms = BTreeSet::new();
        for ((stratum, _), tableau) in &self.tableaux {
            if *stratum == self.strata - 1 {
                forms.extend(tableau.candidates.iter().cloned());
            }
        }
        forms
    }

    fn check_weights(&self, weights: &WeightVector) -> Result<(), GrammarError> {
        if weights.strata != self.strata {
            return Err(GrammarError::StrataMismatch {
                weight_strata: weights.strata,
                graph_strata: self.strata,
            });
        }
        if weights.constraints != self.constraint_count {
            return Err(GrammarError::ConstraintMismatch {
                weight_constraints: weights.constraints,
                graph_constraints: self.constraint_count,
            });
        }
        Ok(())
    }
}

/// Product of the chosen candidate's step probability at every stratum.
pub fn path_probability(
    graph: &DerivationGraph,
    path: &DerivationPath,
    weights: &WeightVector,
) -> Result<f64, GrammarError> {
    graph.check_weights(weights)?;
    if path.steps.len() != graph.strata {
        return Err(GrammarError::PathLength {
            expected: graph.strata,
            found: path.steps.len(),
        });
    }
    let mut expected_input = graph.ur.clone();
    let mut probability = 1.0;
    for (stratum, step) in path.steps.iter().enumerate() {
        if step.stratum != stratum || step.input != expected_input {
            return Err(GrammarError::PathInput {
                stratum,
                expected: expected_input,
                found: step.input.clone(),
            });
        }
        let tableau = graph
            .tableau(stratum, &step.input)
            .expect("graph is complete");
        let Some(index) = tableau.candidate_index(&step.chosen) else {
            return Err(GrammarError::PathCandidate {
                stratum,
                input: step.input.clone(),
                candidate: step.chosen.clone(),
            });
        };
        let distribution = step_distribution_row(tableau, weights.row(stratum))?;
        probability *= distribution[index];
        expected_input = step.chosen.clone();
    }
    Ok(probability)
}

/// Every root-to-surface path, depth-first in candidate order.
pub fn enumerate_paths(graph: &DerivationGraph) -> Vec<DerivationPath> {
    let mut paths = Vec::new();
    let mut steps: Vec<PathStep> = Vec::with_capacity(graph.strata);
    walk(graph, 0, graph.ur.clone(), &mut steps, &mut paths);
    paths
}

fn walk(
    graph: &DerivationGraph,
    stratum: usize,
    input: String,
    steps: &mut Vec<PathStep>,
    paths: &mut Vec<DerivationPath>,
) {
    if stratum == graph.strata {
        paths.push(DerivationPath::new(steps.clone()));
        return;
    }
    let tableau = graph.tableau(stratum, &input).expect("graph is complete");
    for candidate in tableau.candidates() {
        steps.push(PathStep {
            stratum,
            input: input.clone(),
            chosen: candidate.clone(),
        });
        walk(graph, stratum + 1, candidate.clone(), steps, paths);
        steps.pop();
    }
}

/// Marginal distribution over surface forms, computed by propagating input
/// mass forward one stratum at a time. Agrees with summing
/// [`path_probability`] over [`enumerate_paths`] (the tests pin this), but
/// costs one softmax per reached tableau instead of one per path.
pub fn surface_distribution(
    graph: &DerivationGraph,
    weights: &WeightVector,
) -> Result<SurfaceDistribution, GrammarError> {
    graph.check_weights(weights)?;
    let mut mass: BTreeMap<String, f64> = BTreeMap::from([(graph.ur.clone(), 1.0)]);
    for stratum in 0..graph.strata {
        let mut next: BTreeMap<String, f64> = BTreeMap::new();
        for (form, incoming) in &mass {
            let tableau = graph.tableau(stratum, form).expect("graph is complete");
            let distribution = step_distribution_row(tableau, weights.row(stratum))?;
            for (candidate, p) in tableau.candidates().iter().zip(&distribution) {
                *next.entry(candidate.clone()).or_insert(0.0) += incoming * p;
            }
        }
        mass = next;
    }
    Ok(SurfaceDistribution {
        ur: graph.ur.clone(),
        probabilities: mass,
    })
}

/// Per-stratum input masses encountered while propagating forward; the
/// display layer uses this to show which tableaux a grammar actually visits.
pub fn forward_masses(
    graph: &DerivationGraph,
    weights: &WeightVector,
) -> Result<Vec<BTreeMap<String, f64>>, GrammarError> {
    graph.check_weights(weights)?;
    let mut layers = Vec::with_capacity(graph.strata + 1);
    let mut mass: BTreeMap<String, f64> = BTreeMap::from([(graph.ur.clone(), 1.0)]);
    for stratum in 0..graph.strata {
        layers.push(mass.clone());
        let mut next: BTreeMap<String, f64> = BTreeMap::new();
        for (form, incoming) in &mass {
            let tableau = graph.tableau(stratum, form).expect("graph is complete");
            let distribution = step_distribution_row(tableau, weights.row(stratum))?;
            for (candidate, p) in tableau.candidates().iter().zip(&distribution) {
                *next.entry(candidate.clone()).or_insert(0.0) += incoming * p;
            }
        }
        mass = next;
    }
    layers.push(mass);
    Ok(layers)
}
