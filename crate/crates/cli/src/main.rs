//! `stratal`: command-line front end for the stratal maximum-entropy grammar
//! learner.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 3 when a requested
//! check runs cleanly but fails (a fitted grammar that misses attested forms,
//! or a gradient check that finds a mismatch).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stratal_core::datasets::{self, Dataset};
use stratal_core::experiment::{
    self, classify, draw_initializations, emit_report, ExperimentConfig, ReportFormat,
};
use stratal_core::grammar::{
    forward_masses, harmony, step_distribution, surface_distribution, WeightVector,
};
use stratal_core::objective::{gradient, numeric_gradient, RegularizationConfig};
use stratal_core::optimizer::{minimize, OptimizerConfig};

const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "stratal",
    version,
    about = "Fit and inspect stratal maximum-entropy grammars"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every tableau a weight setting actually visits, with harmonies
    /// and probabilities, plus the resulting surface distribution.
    Tableau {
        #[command(flatten)]
        source: DatasetSource,
        /// Weights: comma-separated, stratum 0 first (`@path` reads a file).
        #[arg(long)]
        weights: String,
        /// Underlying form to derive (defaults to every input).
        #[arg(long)]
        ur: Option<String>,
    },
    /// Fit weights to a dataset from one initialization and classify the fit.
    Learn {
        #[command(flatten)]
        source: DatasetSource,
        /// Initial weights: `zero`, `random`, a comma list, or `@path`.
        #[arg(long, default_value = "zero")]
        init: String,
        /// Seed for `--init random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bounds for `--init random`.
        #[arg(long, default_value_t = 0.0)]
        init_low: f64,
        #[arg(long, default_value_t = 10.0)]
        init_high: f64,
        /// Prior variance override (defaults to the dataset's).
        #[arg(long)]
        sigma2: Option<f64>,
        /// Prior mean override (defaults to 0).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        gradient_tolerance: Option<f64>,
        #[arg(long)]
        objective_tolerance: Option<f64>,
        /// Curvature-pair history size.
        #[arg(long)]
        memory: Option<usize>,
    },
    /// Run a multi-restart experiment and write table-text and CSV reports.
    Experiment {
        /// JSON file mirroring the experiment config fields; excludes the
        /// other selection flags.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in dataset names, comma-separated.
        #[arg(long, value_delimiter = ',')]
        datasets: Vec<String>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        init_low: f64,
        #[arg(long, default_value_t = 10.0)]
        init_high: f64,
        /// Share the initialization sequence across same-shaped datasets.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        shared_inits: bool,
        /// Prior variance override for every dataset.
        #[arg(long)]
        sigma2: Option<f64>,
        /// Report path prefix; writes `<out>.txt` and `<out>.csv`.
        #[arg(long, default_value = "experiment")]
        out: PathBuf,
    },
    /// Compare the analytic gradient against central differences at random
    /// points.
    Gradcheck {
        #[command(flatten)]
        source: DatasetSource,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Central-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-7)]
        abs_tol: f64,
        /// Prior variance override (defaults to the dataset's).
        #[arg(long)]
        sigma2: Option<f64>,
        /// Test hook: bias added to every analytic component; a nonzero value
        /// must make the check fail.
        #[arg(long, hide = true, default_value_t = 0.0)]
        nudge: f64,
    },
    /// List the built-in datasets.
    Datasets,
    /// Parse and validate a dataset file.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args)]
struct DatasetSource {
    /// Built-in dataset name (see `stratal datasets`).
    #[arg(long, conflicts_with = "file")]
    dataset: Option<String>,
    /// Dataset JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl DatasetSource {
    fn load(&self) -> Result<Dataset> {
        match (&self.dataset, &self.file) {
            (Some(name), None) => Ok(datasets::builtin(name)?),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(datasets::parse_dataset(&text)
                    .with_context(|| format!("parsing {}", path.display()))?)
            }
            _ => bail!("choose exactly one of --dataset or --file"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Tableau {
            source,
            weights,
            ur,
        } => cmd_tableau(&source, &weights, ur.as_deref()),
        Command::Learn {
            source,
            init,
            seed,
            init_low,
            init_high,
            sigma2,
            mu,
            max_iterations,
            gradient_tolerance,
            objective_tolerance,
            memory,
        } => cmd_learn(
            &source,
            &init,
            seed,
            (init_low, init_high),
            sigma2,
            mu,
            max_iterations,
            gradient_tolerance,
            objective_tolerance,
            memory,
        ),
        Command::Experiment {
            config,
            datasets,
            runs,
            seed,
            init_low,
            init_high,
            shared_inits,
            sigma2,
            out,
        } => {
            let config = build_experiment_config(
                config,
                datasets,
                runs,
                seed,
                init_low,
                init_high,
                shared_inits,
                sigma2,
            )?;
            cmd_experiment(&config, &out)
        }
        Command::Gradcheck {
            source,
            points,
            seed,
            step,
            rel_tol,
            abs_tol,
            sigma2,
            nudge,
        } => cmd_gradcheck(&source, points, seed, step, rel_tol, abs_tol, sigma2, nudge),
        Command::Datasets => cmd_datasets(),
        Command::Validate { file } => cmd_validate(&file),
    }
}

/// Parses `spec` as weights for `dataset`: a comma/whitespace separated list
/// in stratum-major order, or `@path` to read the same format from a file.
fn parse_weights(spec: &str, dataset: &Dataset) -> Result<WeightVector> {
    let text;
    let spec = if let Some(path) = spec.strip_prefix('@') {
        text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        text.as_str()
    } else {
        spec
    };
    let mut flat = Vec::new();
    for token in spec.split(|c: char| c == ',' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        flat.push(
            token
                .parse::<f64>()
                .with_context(|| format!("weight `{token}` is not a number"))?,
        );
    }
    let expected = dataset.weight_count();
    if flat.len() != expected {
        bail!(
            "got {} weights, need {} ({} strata x {} constraints, stratum 0 first)",
            flat.len(),
            expected,
            dataset.strata(),
            dataset.constraints().len()
        );
    }
    Ok(WeightVector::new(dataset.strata(), dataset.constraints().len(), flat)?)
}

fn regularization_for(dataset: &Dataset, sigma2: Option<f64>, mu: Option<f64>) -> RegularizationConfig {
    let mut reg = dataset.regularization();
    if let Some(sigma2) = sigma2 {
        reg.sigma2 = sigma2;
    }
    if let Some(mu) = mu {
        reg.mu = mu;
    }
    reg
}

fn format_weight_rows(dataset: &Dataset, weights: &WeightVector, indent: &str) -> String {
    let mut out = String::new();
    for stratum in 0..dataset.strata() {
        let cells: Vec<String> = dataset
            .constraints()
            .names()
            .iter()
            .enumerate()
            .map(|(k, name)| format!("{name}={:.2}", weights.get(stratum, k)))
            .collect();
        out.push_str(&format!("{indent}stratum {stratum}: {}\n", cells.join("  ")));
    }
    out
}

fn cmd_tableau(source: &DatasetSource, weights_spec: &str, ur: Option<&str>) -> Result<ExitCode> {
    let dataset = source.load()?;
    let weights = parse_weights(weights_spec, &dataset)?;
    let urs: Vec<&str> = match ur {
        Some(ur) => {
            if dataset.graph(ur).is_none() {
                bail!(
                    "dataset `{}` has no input `{ur}`; inputs: {}",
                    dataset.name(),
                    dataset
                        .graphs()
                        .iter()
                        .map(|g| g.ur())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            vec![ur]
        }
        None => dataset.graphs().iter().map(|g| g.ur()).collect(),
    };

    println!("dataset {}", dataset.name());
    print!("{}", format_weight_rows(&dataset, &weights, ""));
    for ur in urs {
        let graph = dataset.graph(ur).expect("checked above");
        let layers = forward_masses(graph, &weights)?;
        println!("\ninput {ur}");
        for stratum in 0..dataset.strata() {
            for (form, mass) in &layers[stratum] {
                let tableau = graph
                    .tableau(stratum, form)
                    .expect("forward masses only visit existing tableaux");
                println!("  stratum {stratum}: input {form} (mass {mass:.3})");
                print_tableau_rows(&dataset, tableau, &weights)?;
            }
        }
        let surface = surface_distribution(graph, &weights)?;
        let cells: Vec<String> = surface
            .iter()
            .map(|(form, p)| format!("{form}={p:.3}"))
            .collect();
        println!("  surface: {}", cells.join(" "));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_tableau_rows(
    dataset: &Dataset,
    tableau: &stratal_core::grammar::StepTableau,
    weights: &WeightVector,
) -> Result<()> {
    let names = dataset.constraints().names();
    let dist = step_distribution(tableau, weights)?;
    let row_weights = weights.row(tableau.stratum());

    let candidate_width = tableau
        .candidates()
        .iter()
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(0)
        .max("candidate".len());
    let col_widths: Vec<usize> = names.iter().map(|n| n.chars().count().max(2)).collect();

    let mut header = format!("    {:<candidate_width$}", "candidate");
    for (name, width) in names.iter().zip(&col_widths) {
        header.push_str(&format!("  {name:>width$}"));
    }
    header.push_str(&format!("  {:>8}  {:>8}  {:>6}", "H", "exp(H)", "p"));
    println!("{header}");

    for ((candidate, violations), p) in tableau
        .candidates()
        .iter()
        .zip(tableau.violations())
        .zip(&dist)
    {
        let h = harmony(row_weights, violations)?;
        let mut line = format!("    {:<candidate_width$}", candidate);
        for (v, width) in violations.iter().zip(&col_widths) {
            line.push_str(&format!("  {v:>width$}"));
        }
        line.push_str(&format!("  {h:>8.2}  {:>8.3}  {p:>6.3}", h.exp()));
        println!("{line}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_learn(
    source: &DatasetSource,
    init_spec: &str,
    seed: u64,
    init_range: (f64, f64),
    sigma2: Option<f64>,
    mu: Option<f64>,
    max_iterations: Option<usize>,
    gradient_tolerance: Option<f64>,
    objective_tolerance: Option<f64>,
    memory: Option<usize>,
) -> Result<ExitCode> {
    let dataset = source.load()?;
    let init = match init_spec {
        "zero" => dataset.zero_weights(),
        "random" => draw_initializations(
            seed,
            1,
            init_range.0,
            init_range.1,
            dataset.strata(),
            dataset.constraints().len(),
        )?
        .pop()
        .expect("one draw requested"),
        other => parse_weights(other, &dataset)?,
    };
    let reg = regularization_for(&dataset, sigma2, mu);
    let mut config = OptimizerConfig::default();
    if let Some(max_iterations) = max_iterations {
        config.max_iterations = max_iterations;
    }
    if let Some(tol) = gradient_tolerance {
        config.gradient_tolerance = tol;
    }
    if let Some(tol) = objective_tolerance {
        config.objective_tolerance = tol;
    }
    if let Some(memory) = memory {
        config.memory = memory;
    }

    let result = minimize(&dataset, &init, &reg, &config)?;
    println!(
        "dataset {} (sigma2={}, mu={})",
        dataset.name(),
        reg.sigma2,
        reg.mu
    );
    println!("initial weights:");
    print!("{}", format_weight_rows(&dataset, &result.initial_weights, "  "));
    println!(
        "initial objective: total={:.6} kl={:.6} penalty={:.6}",
        result.initial_objective.total, result.initial_objective.kl, result.initial_objective.penalty
    );
    println!(
        "stopped after {} iterations ({})",
        result.iterations, result.termination
    );
    println!("final weights:");
    print!("{}", format_weight_rows(&dataset, &result.final_weights, "  "));
    println!(
        "final objective: total={:.6} kl={:.6} penalty={:.6}",
        result.final_objective.total, result.final_objective.kl, result.final_objective.penalty
    );

    for graph in dataset.graphs() {
        let dist = surface_distribution(graph, &result.final_weights)?;
        let cells: Vec<String> = dist
            .iter()
            .map(|(form, p)| format!("{form}={p:.3}"))
            .collect();
        println!("predicted {}: {}", graph.ur(), cells.join(" "));
    }

    let classification = classify(&dataset, &result.final_weights)?;
    if classification.success {
        println!("fit: success (every attested form above 0.5)");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("fit: FAILURE");
        for failing in &classification.failing {
            println!(
                "  {} -> {} predicted {:.3} (needs > 0.5)",
                failing.ur, failing.surface, failing.probability
            );
        }
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

#[allow(clippy::too_many_arguments)]
fn build_experiment_config(
    config_path: Option<PathBuf>,
    datasets: Vec<String>,
    runs: usize,
    seed: u64,
    init_low: f64,
    init_high: f64,
    shared_inits: bool,
    sigma2: Option<f64>,
) -> Result<ExperimentConfig> {
    if let Some(path) = config_path {
        if !datasets.is_empty() {
            bail!("--config and --datasets are mutually exclusive");
        }
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        return Ok(config);
    }
    if datasets.is_empty() {
        bail!("give --datasets (comma-separated built-in names) or --config FILE");
    }
    Ok(ExperimentConfig {
        datasets,
        runs,
        seed,
        init_low,
        init_high,
        shared_inits,
        regularization: sigma2.map(RegularizationConfig::with_sigma2),
        ..ExperimentConfig::default()
    })
}

fn cmd_experiment(config: &ExperimentConfig, out: &PathBuf) -> Result<ExitCode> {
    let output = experiment::run_experiment(config)?;
    let table = emit_report(&output, ReportFormat::TableText);
    let csv = emit_report(&output, ReportFormat::Csv);

    let txt_path = out.with_extension("txt");
    let csv_path = out.with_extension("csv");
    fs::write(&txt_path, &table).with_context(|| format!("writing {}", txt_path.display()))?;
    fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;

    print!("{table}");
    eprintln!(
        "wrote {} and {}",
        txt_path.display(),
        csv_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gradcheck(
    source: &DatasetSource,
    points: usize,
    seed: u64,
    step: f64,
    rel_tol: f64,
    abs_tol: f64,
    sigma2: Option<f64>,
    nudge: f64,
) -> Result<ExitCode> {
    let dataset = source.load()?;
    let reg = regularization_for(&dataset, sigma2, None);
    let inits = draw_initializations(
        seed,
        points,
        0.0,
        10.0,
        dataset.strata(),
        dataset.constraints().len(),
    )?;

    let mut failures = 0usize;
    for (index, point) in inits.iter().enumerate() {
        let analytic = gradient(dataset.graphs(), dataset.observed(), point, &reg)?;
        let numeric = numeric_gradient(dataset.graphs(), dataset.observed(), point, &reg, step)?;
        let mut worst_diff = 0.0f64;
        let mut worst: Option<(usize, f64, f64)> = None;
        for (i, (a, n)) in analytic
            .as_flat()
            .iter()
            .zip(numeric.as_flat())
            .enumerate()
        {
            let a = a + nudge;
            let diff = (a - n).abs();
            let ok = diff <= abs_tol || diff <= rel_tol * n.abs().max(a.abs());
            if diff > worst_diff {
                worst_diff = diff;
            }
            if !ok && worst.map_or(true, |(_, _, d)| diff > d) {
                worst = Some((i, a, diff));
            }
        }
        match worst {
            None => println!("point {index:>3}: ok (max diff {worst_diff:.2e})"),
            Some((coordinate, a, diff)) => {
                failures += 1;
                let stratum = coordinate / dataset.constraints().len();
                let k = coordinate % dataset.constraints().len();
                let name = &dataset.constraints().names()[k];
                println!(
                    "point {index:>3}: FAIL at stratum {stratum} {name}: analytic {a:.9} vs numeric {:.9} (diff {diff:.2e})",
                    numeric.as_flat()[coordinate]
                );
            }
        }
    }
    println!(
        "gradcheck: {}/{points} points ok (step {step:e}, rel {rel_tol:e}, abs {abs_tol:e})",
        points - failures
    );
    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

fn cmd_datasets() -> Result<ExitCode> {
    let name_width = datasets::builtin_names()
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(0)
        .max("name".len());
    println!(
        "{:<name_width$}  strata  constraints  inputs  sigma2",
        "name"
    );
    for name in datasets::builtin_names() {
        let dataset = datasets::builtin(name)?;
        println!(
            "{:<name_width$}  {:>6}  {:>11}  {:>6}  {:>6}",
            name,
            dataset.strata(),
            dataset.constraints().len(),
            dataset.graphs().len(),
            dataset.sigma2_default()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(file: &PathBuf) -> Result<ExitCode> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    match datasets::parse_dataset(&text) {
        Ok(dataset) => {
            println!(
                "ok: {} ({} inputs, {} strata, {} constraints, {} observed entries)",
                dataset.name(),
                dataset.graphs().len(),
                dataset.strata(),
                dataset.constraints().len(),
                dataset.observed().len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => {
            eprintln!("invalid: {err}");
            Ok(ExitCode::from(2))
        }
    }
}
