//! Report emission for experiment outputs: a human-readable table and a
//! machine-readable CSV, both deterministic for a given output.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{DatasetResult, ExperimentOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TableText,
    Csv,
}

/// Renders the experiment output in the requested format.
pub fn emit_report(output: &ExperimentOutput, format: ReportFormat) -> String {
    match format {
        ReportFormat::TableText => table_text(output),
        ReportFormat::Csv => csv_text(output),
    }
}

fn table_text(output: &ExperimentOutput) -> String {
    let mut text = String::new();
    let config = &output.config;
    writeln!(
        text,
        "experiment: runs={} seed={} init=[{:.2}, {:.2}] shared_inits={}",
        config.runs, config.seed, config.init_low, config.init_high, config.shared_inits
    )
    .unwrap();
    writeln!(
        text,
        "optimizer: memory={} max_iterations={} gradient_tolerance={:e} objective_tolerance={:e}",
        config.optimizer.memory,
        config.optimizer.max_iterations,
        config.optimizer.gradient_tolerance,
        config.optimizer.objective_tolerance
    )
    .unwrap();
    match &config.regularization {
        Some(reg) => writeln!(text, "regularization: mu={} sigma2={}", reg.mu, reg.sigma2).unwrap(),
        None => writeln!(text, "regularization: per-dataset default").unwrap(),
    }
    text.push('\n');

    let name_width = output
        .datasets
        .iter()
        .map(|r| r.dataset.name().chars().count())
        .max()
        .unwrap_or(0)
        .max("dataset".len());
    writeln!(text, "{:<name_width$}  successes/runs", "dataset").unwrap();
    for result in &output.datasets {
        writeln!(
            text,
            "{:<name_width$}  {:>9}/{}",
            result.dataset.name(),
            result.success_count,
            result.runs.len()
        )
        .unwrap();
    }

    for result in &output.datasets {
        text.push('\n');
        dataset_section(&mut text, result);
    }
    text
}

fn dataset_section(text: &mut String, result: &DatasetResult) {
    let dataset = &result.dataset;
    writeln!(
        text,
        "dataset {} (sigma2={}, {} strata, {} constraints)",
        dataset.name(),
        dataset.sigma2_default(),
        dataset.strata(),
        dataset.constraints().len()
    )
    .unwrap();

    let observed: Vec<String> = dataset
        .observed()
        .iter()
        .map(|(ur, surface, p)| format!("{ur} -> {surface} ({p:.2})"))
        .collect();
    writeln!(text, "  observed: {}", observed.join("; ")).unwrap();

    for cluster in &result.clusters {
        writeln!(
            text,
            "  cluster {}: {} runs, {}, representative run {}",
            cluster.id,
            cluster.runs.len(),
            if cluster.success { "success" } else { "failure" },
            cluster.representative
        )
        .unwrap();
        for (ur, surfaces) in &cluster.signature {
            let cells: Vec<String> = surfaces
                .iter()
                .map(|(surface, p)| format!("{surface}={p:.2}"))
                .collect();
            writeln!(text, "    {ur}: {}", cells.join(" ")).unwrap();
        }
        let representative = &result.runs[cluster.representative];
        debug_assert_eq!(representative.run_index, cluster.representative);
        for stratum in 0..dataset.strata() {
            let cells: Vec<String> = dataset
                .constraints()
                .names()
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    format!("{name}={:.2}", representative.final_weights.get(stratum, k))
                })
                .collect();
            writeln!(text, "    weights[{stratum}]: {}", cells.join(" ")).unwrap();
        }
    }
}

fn csv_text(output: &ExperimentOutput) -> String {
    // Union column sets across datasets, sorted for determinism.
    let mut prob_columns: BTreeSet<(String, String)> = BTreeSet::new();
    let mut weight_columns: BTreeSet<(usize, String)> = BTreeSet::new();
    for result in &output.datasets {
        let dataset = &result.dataset;
        for graph in dataset.graphs() {
            for surface in graph.surface_forms() {
                prob_columns.insert((graph.ur().to_string(), surface));
            }
        }
        for stratum in 0..dataset.strata() {
            for name in dataset.constraints().names() {
                weight_columns.insert((stratum, name.clone()));
            }
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "dataset",
        "run",
        "seed",
        "success",
        "termination",
        "iterations",
        "objective_total",
        "objective_kl",
        "objective_penalty",
        "cluster",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for (ur, surface) in &prob_columns {
        header.push(format!("p:{ur}->{surface}"));
    }
    for (stratum, name) in &weight_columns {
        header.push(format!("init:{stratum}:{name}"));
    }
    for (stratum, name) in &weight_columns {
        header.push(format!("w:{stratum}:{name}"));
    }
    writer.write_record(&header).expect("csv writes to memory");

    for result in &output.datasets {
        let dataset = &result.dataset;
        let mut cluster_of = std::collections::BTreeMap::new();
        for cluster in &result.clusters {
            for run in &cluster.runs {
                cluster_of.insert(*run, cluster.id);
            }
        }
        for run in &result.runs {
            let mut record: Vec<String> = vec![
                dataset.name().to_string(),
                run.run_index.to_string(),
                output.config.seed.to_string(),
                run.success.to_string(),
                run.termination.to_string(),
                run.iterations.to_string(),
                format!("{:.9}", run.final_objective.total),
                format!("{:.9}", run.final_objective.kl),
                format!("{:.9}", run.final_objective.penalty),
                cluster_of[&run.run_index].to_string(),
            ];
            for (ur, surface) in &prob_columns {
                let cell = run
                    .distributions
                    .iter()
                    .find(|d| d.ur() == ur)
                    .map(|d| format!("{:.6}", d.probability(surface)))
                    .unwrap_or_default();
                record.push(cell);
            }
            let names = dataset.constraints().names();
            for weights in [&run.initial_weights, &run.final_weights] {
                for (stratum, name) in &weight_columns {
                    let cell = if *stratum < dataset.strata() {
                        names
                            .iter()
                            .position(|n| n == name)
                            .map(|k| format!("{:.6}", weights.get(*stratum, k)))
                            .unwrap_or_default()
                    } else {
                        String::new()
                    };
                    record.push(cell);
                }
            }
            writer.write_record(&record).expect("csv writes to memory");
        }
    }
    String::from_utf8(writer.into_inner().expect("csv writes to memory"))
        .expect("csv output is utf-8")
}
