//! JSON interchange format for datasets.
//!
//! Layout (keys always in this order):
//!
//! ```json
//! {
//!   "name": "...",
//!   "sigma2": 10000.0,
//!   "constraints": ["..."],
//!   "strata": 2,
//!   "inputs": [
//!     {
//!       "ur": "...",
//!       "tableaux": [
//!         {
//!           "stratum": 0,
//!           "input": "...",
//!           "candidates": [{ "form": "...", "violations": [0, 1] }]
//!         }
//!       ]
//!     }
//!   ],
//!   "observed": [{ "ur": "...", "surface": "...", "p": 1.0 }]
//! }
//! ```
//!
//! `serialize_dataset` emits a canonical form: two-space indentation, keys in
//! the order above, constraints in declared order, inputs sorted by underlying
//! form, tableaux sorted by (stratum, input), explicit zero counts. Parsing a
//! file and serializing it again yields that canonical form byte-for-byte
//! identically, and structurally equal datasets serialize identically.

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};
use crate::grammar::{ConstraintSet, DerivationGraph, StepTableau};
use crate::objective::ObservedDistribution;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: String,
    sigma2: f64,
    constraints: Vec<String>,
    strata: usize,
    inputs: Vec<RawInput>,
    observed: Vec<RawObserved>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    ur: String,
    tableaux: Vec<RawTableau>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableau {
    stratum: i64,
    input: String,
    candidates: Vec<RawCandidate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCandidate {
    form: String,
    violations: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserved {
    ur: String,
    surface: String,
    p: f64,
}

/// Parses and fully validates a dataset from JSON text. Errors name the
/// offending location (`inputs[i] (ur ...) tableaux[j] ...`).
pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let raw: RawDataset =
        serde_json::from_str(text).map_err(|e| DatasetError::Json(e.to_string()))?;

    let constraints = ConstraintSet::new(raw.constraints).map_err(|source| {
        DatasetError::Tableau {
            location: "constraints".to_string(),
            source,
        }
    })?;

    let mut graphs = Vec::with_capacity(raw.inputs.len());
    for (i, input) in raw.inputs.into_iter().enumerate() {
        let ur = input.ur;
        let mut tableaux = Vec::with_capacity(input.tableaux.len());
        for (j, t) in input.tableaux.into_iter().enumerate() {
            let location = format!("inputs[{i}] (ur `{ur}`) tableaux[{j}]");
            if t.stratum < 0 {
                return Err(DatasetError::NegativeStratum {
                    location,
                    value: t.stratum,
                });
            }
            let mut rows = Vec::with_capacity(t.candidates.len());
            for candidate in t.candidates {
                let mut row = Vec::with_capacity(candidate.violations.len());
                for (m, &count) in candidate.violations.iter().enumerate() {
                    if count < 0 {
                        return Err(DatasetError::NegativeViolation {
                            location: format!(
                                "{location} candidate `{}` violations[{m}]",
                                candidate.form
                            ),
                            value: count,
                        });
                    }
                    row.push(count as u32);
                }
                rows.push((candidate.form, row));
            }
            let tableau = StepTableau::new(t.stratum as usize, t.input, rows)
                .map_err(|source| DatasetError::Tableau { location, source })?;
            tableaux.push(tableau);
        }
        let graph = DerivationGraph::new(ur.clone(), raw.strata, tableaux)
            .map_err(|source| DatasetError::Graph { ur, source })?;
        graphs.push(graph);
    }

    let observed = ObservedDistribution::new(
        raw.observed
            .into_iter()
            .map(|entry| (entry.ur, entry.surface, entry.p)),
    )
    .map_err(|source| DatasetError::Observed { source })?;

    Dataset::new(
        raw.name,
        raw.sigma2,
        raw.strata,
        constraints,
        graphs,
        observed,
    )
}

/// Serializes a dataset to its canonical JSON form (see module docs).
pub fn serialize_dataset(dataset: &Dataset) -> String {
    let raw = RawDataset {
        name: dataset.name().to_string(),
        sigma2: dataset.sigma2_default(),
        constraints: dataset.constraints().names().to_vec(),
        strata: dataset.strata(),
        inputs: dataset
            .graphs()
            .iter()
            .map(|graph| RawInput {
                ur: graph.ur().to_string(),
                tableaux: graph
                    .tableaux()
                    .map(|tableau| RawTableau {
                        stratum: tableau.stratum() as i64,
                        input: tableau.input().to_string(),
                        candidates: tableau
                            .candidates()
                            .iter()
                            .zip(tableau.violations())
                            .map(|(form, row)| RawCandidate {
                                form: form.clone(),
                                violations: row.iter().map(|&v| v as i64).collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
        observed: dataset
            .observed()
            .iter()
            .map(|(ur, surface, p)| RawObserved {
                ur: ur.to_string(),
                surface: surface.to_string(),
                p,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("dataset serializes");
    text.push('\n');
    text
}
