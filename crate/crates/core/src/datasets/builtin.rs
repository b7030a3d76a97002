//! Built-in datasets.
//!
//! Two families, both two-stratum (word stratum 0, phrase stratum 1):
//!
//! * `french-opaque` — tense/lax vowel alternations conditioned by syllable
//!   structure, where word-level closed syllables are destroyed by phrase-level
//!   resyllabification.
//! * `en-{opaque,transparent}-…` — diphthong raising interacting with
//!   flapping, over the word set mitre/cider (+ optionally life and lie-for),
//!   with attested surface forms chosen per dialect.

use super::{Dataset, DatasetError};
use crate::grammar::{ConstraintSet, DerivationGraph, StepTableau};
use crate::objective::ObservedDistribution;

const BUILTIN_NAMES: [&str; 9] = [
    "french-opaque",
    "en-opaque-mitre-cider",
    "en-opaque-mitre-cider-life",
    "en-opaque-mitre-cider-lie-for",
    "en-opaque-mitre-cider-life-lie-for",
    "en-transparent-mitre-cider",
    "en-transparent-mitre-cider-life",
    "en-transparent-mitre-cider-lie-for",
    "en-transparent-mitre-cider-life-lie-for",
];

/// Names of all built-in datasets, in catalog order.
pub fn builtin_names() -> &'static [&'static str] {
    &BUILTIN_NAMES
}

/// Looks up a built-in dataset by name.
pub fn builtin(name: &str) -> Result<Dataset, DatasetError> {
    match name {
        "french-opaque" => Ok(french()),
        "en-opaque-mitre-cider" => Ok(english(name, true, false, false)),
        "en-opaque-mitre-cider-life" => Ok(english(name, true, true, false)),
        "en-opaque-mitre-cider-lie-for" => Ok(english(name, true, false, true)),
        "en-opaque-mitre-cider-life-lie-for" => Ok(english(name, true, true, true)),
        "en-transparent-mitre-cider" => Ok(english(name, false, false, false)),
        "en-transparent-mitre-cider-life" => Ok(english(name, false, true, false)),
        "en-transparent-mitre-cider-lie-for" => Ok(english(name, false, false, true)),
        "en-transparent-mitre-cider-life-lie-for" => Ok(english(name, false, true, true)),
        _ => Err(DatasetError::UnknownBuiltin {
            name: name.to_string(),
            available: BUILTIN_NAMES.join(", "),
        }),
    }
}

/// All built-ins, in catalog order.
pub fn all_builtins() -> Vec<Dataset> {
    BUILTIN_NAMES
        .iter()
        .map(|name| builtin(name).expect("catalog names resolve"))
        .collect()
}

fn step(stratum: usize, input: &str, rows: &[(&str, &[u32])]) -> StepTableau {
    let rows = rows
        .iter()
        .map(|(form, violations)| (form.to_string(), violations.to_vec()))
        .collect();
    StepTableau::new(stratum, input.to_string(), rows).expect("built-in tableau is well-formed")
}

fn graph(ur: &str, tableaux: Vec<StepTableau>) -> DerivationGraph {
    DerivationGraph::new(ur, 2, tableaux).expect("built-in graph is well-formed")
}

fn assemble(
    name: &str,
    sigma2: f64,
    constraints: &[&str],
    graphs: Vec<DerivationGraph>,
    observed: Vec<(&str, &str, f64)>,
) -> Dataset {
    let constraints =
        ConstraintSet::new(constraints.iter().copied()).expect("built-in constraint names");
    let observed = ObservedDistribution::new(observed).expect("built-in observed data");
    Dataset::new(name, sigma2, 2, constraints, graphs, observed)
        .expect("built-in dataset is well-formed")
}

/// Tense-mid vowels in open syllables vs. lax in closed ones, destroyed by
/// phrase-level resyllabification: word-level /set#a/ -> sɛt#a closes the
/// syllable, phrase-level sɛ.ta reopens it, so surface [sɛ.ta] violates the
/// markedness constraint that drove the word-level change.
///
/// Constraints: `*[-tense]/Open` (lax mid vowel in an open syllable),
/// `*[+tense]/Closed` (tense mid vowel in a closed syllable), `Ident(V)`
/// (vowel tenseness changed from the step's input).
fn french() -> Dataset {
    let set_a = graph(
        "set#a",
        vec![
            step(0, "set#a", &[("set#a", &[0, 1, 0]), ("sɛt#a", &[0, 0, 1])]),
            step(1, "set#a", &[("se.ta", &[0, 0, 0]), ("sɛ.ta", &[1, 0, 1])]),
            step(1, "sɛt#a", &[("se.ta", &[0, 0, 1]), ("sɛ.ta", &[1, 0, 0])]),
        ],
    );
    let se_ta = graph(
        "se#ta",
        vec![
            step(0, "se#ta", &[("se#ta", &[0, 0, 0]), ("sɛ#ta", &[1, 0, 1])]),
            step(1, "se#ta", &[("se.ta", &[0, 0, 0]), ("sɛ.ta", &[1, 0, 1])]),
            step(1, "sɛ#ta", &[("se.ta", &[0, 0, 1]), ("sɛ.ta", &[1, 0, 0])]),
        ],
    );
    assemble(
        "french-opaque",
        10_000.0,
        &["*[-tense]/Open", "*[+tense]/Closed", "Ident(V)"],
        vec![set_a, se_ta],
        vec![("set#a", "sɛ.ta", 1.0), ("se#ta", "se.ta", 1.0)],
    )
}

// English constraint columns, in order:
//   Ident(son)       — flapping changed t/d to ɾ (or back) relative to the
//                      step's input
//   Ident(low)       — diphthong raised aɪ to ʌɪ (or lowered back) relative
//                      to the step's input
//   *V́TV             — candidate contains an alveolar stop t/d between a
//                      stressed vowel and an unstressed one
//   *aɪ,aʊ/_[-vce]   — candidate contains unraised aɪ immediately before a
//                      voiceless consonant; at the word stratum the window
//                      stops at the word edge, at the phrase stratum it spans
//                      the whole utterance

/// mitre: /maɪtə/, four candidates crossing raising with flapping. The t is
/// voiceless, so unraised aɪ before it violates the raising constraint.
fn mitre_graph() -> DerivationGraph {
    graph(
        "maɪtə",
        vec![
            step(
                0,
                "maɪtə",
                &[
                    ("maɪtə", &[0, 0, 1, 1]),
                    ("maɪɾə", &[1, 0, 0, 0]),
                    ("mʌɪtə", &[0, 1, 1, 0]),
                    ("mʌɪɾə", &[1, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "maɪtə",
                &[
                    ("maɪtə", &[0, 0, 1, 1]),
                    ("maɪɾə", &[1, 0, 0, 0]),
                    ("mʌɪtə", &[0, 1, 1, 0]),
                    ("mʌɪɾə", &[1, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "maɪɾə",
                &[
                    ("maɪtə", &[1, 0, 1, 1]),
                    ("maɪɾə", &[0, 0, 0, 0]),
                    ("mʌɪtə", &[1, 1, 1, 0]),
                    ("mʌɪɾə", &[0, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "mʌɪtə",
                &[
                    ("maɪtə", &[0, 1, 1, 1]),
                    ("maɪɾə", &[1, 1, 0, 0]),
                    ("mʌɪtə", &[0, 0, 1, 0]),
                    ("mʌɪɾə", &[1, 0, 0, 0]),
                ],
            ),
            step(
                1,
                "mʌɪɾə",
                &[
                    ("maɪtə", &[1, 1, 1, 1]),
                    ("maɪɾə", &[0, 1, 0, 0]),
                    ("mʌɪtə", &[1, 0, 1, 0]),
                    ("mʌɪɾə", &[0, 0, 0, 0]),
                ],
            ),
        ],
    )
}

/// cider: /saɪdə/. The d is voiced, so the raising constraint never fires;
/// raising any candidate is gratuitous unfaithfulness.
fn cider_graph() -> DerivationGraph {
    graph(
        "saɪdə",
        vec![
            step(
                0,
                "saɪdə",
                &[
                    ("saɪdə", &[0, 0, 1, 0]),
                    ("saɪɾə", &[1, 0, 0, 0]),
                    ("sʌɪdə", &[0, 1, 1, 0]),
                    ("sʌɪɾə", &[1, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "saɪdə",
                &[
                    ("saɪdə", &[0, 0, 1, 0]),
                    ("saɪɾə", &[1, 0, 0, 0]),
                    ("sʌɪdə", &[0, 1, 1, 0]),
                    ("sʌɪɾə", &[1, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "saɪɾə",
                &[
                    ("saɪdə", &[1, 0, 1, 0]),
                    ("saɪɾə", &[0, 0, 0, 0]),
                    ("sʌɪdə", &[1, 1, 1, 0]),
                    ("sʌɪɾə", &[0, 1, 0, 0]),
                ],
            ),
            step(
                1,
                "sʌɪdə",
                &[
                    ("saɪdə", &[0, 1, 1, 0]),
                    ("saɪɾə", &[1, 1, 0, 0]),
                    ("sʌɪdə", &[0, 0, 1, 0]),
                    ("sʌɪɾə", &[1, 0, 0, 0]),
                ],
            ),
            step(
                1,
                "sʌɪɾə",
                &[
                    ("saɪdə", &[1, 1, 1, 0]),
                    ("saɪɾə", &[0, 1, 0, 0]),
                    ("sʌɪdə", &[1, 0, 1, 0]),
                    ("sʌɪɾə", &[0, 0, 0, 0]),
                ],
            ),
        ],
    )
}

/// life: /laɪf/. Word-internal aɪ before voiceless f, no flapping site, so the
/// raising environment is already visible at the word stratum.
fn life_graph() -> DerivationGraph {
    graph(
        "laɪf",
        vec![
            step(
                0,
                "laɪf",
                &[("laɪf", &[0, 0, 0, 1]), ("lʌɪf", &[0, 1, 0, 0])],
            ),
            step(
                1,
                "laɪf",
                &[("laɪf", &[0, 0, 0, 1]), ("lʌɪf", &[0, 1, 0, 0])],
            ),
            step(
                1,
                "lʌɪf",
                &[("laɪf", &[0, 1, 0, 1]), ("lʌɪf", &[0, 0, 0, 0])],
            ),
        ],
    )
}

/// lie-for: /laɪ#fɔɹ/. The aɪ is word-final, so the word stratum sees no
/// voiceless consonant after it; only the phrase stratum, where the boundary
/// is gone, puts aɪ before f.
fn lie_for_graph() -> DerivationGraph {
    graph(
        "laɪ#fɔɹ",
        vec![
            step(
                0,
                "laɪ#fɔɹ",
                &[("laɪ#fɔɹ", &[0, 0, 0, 0]), ("lʌɪ#fɔɹ", &[0, 1, 0, 0])],
            ),
            step(
                1,
                "laɪ#fɔɹ",
                &[("laɪ fɔɹ", &[0, 0, 0, 1]), ("lʌɪ fɔɹ", &[0, 1, 0, 0])],
            ),
            step(
                1,
                "lʌɪ#fɔɹ",
                &[("laɪ fɔɹ", &[0, 1, 0, 1]), ("lʌɪ fɔɹ", &[0, 0, 0, 0])],
            ),
        ],
    )
}

/// The opaque dialect raises in mitre even though the surface flap is voiced
/// (overapplication) and fails to raise in lie-for even though surface aɪ
/// precedes voiceless f (underapplication). The transparent dialect does the
/// surface-true opposite in both words; cider and life are attested
/// identically in the two dialects.
fn english(name: &str, opaque: bool, with_life: bool, with_lie_for: bool) -> Dataset {
    let mut graphs = vec![mitre_graph(), cider_graph()];
    let mut observed = vec![
        ("maɪtə", if opaque { "mʌɪɾə" } else { "maɪɾə" }, 1.0),
        ("saɪdə", "saɪɾə", 1.0),
    ];
    if with_life {
        graphs.push(life_graph());
        observed.push(("laɪf", "lʌɪf", 1.0));
    }
    if with_lie_for {
        graphs.push(lie_for_graph());
        observed.push((
            "laɪ#fɔɹ",
            if opaque { "laɪ fɔɹ" } else { "lʌɪ fɔɹ" },
            1.0,
        ));
    }
    assemble(
        name,
        9_000.0,
        &["Ident(son)", "Ident(low)", "*V́TV", "*aɪ,aʊ/_[-vce]"],
        graphs,
        observed,
    )
}
