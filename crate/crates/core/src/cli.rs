//! Command-line interface: learn, classify, edit, derive-w, experiment.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numeric
//! failure (singularity, instability).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis;
use crate::dynamics::{self, SolverKind};
use crate::error::Error;
use crate::feedforward;
use crate::io;
use crate::learning;
use crate::model::{ActivationVector, InputVector, SolverConfig, TargetStop};

#[derive(Debug, Parser)]
#[command(
    name = "genrec",
    version,
    about = "Generative fixed-point classifier: recognition by reconstruction dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn an expectation model from a labeled dataset CSV by
    /// class-conditional averaging.
    Learn {
        /// Dataset CSV: header `label,<feature...>`, one exemplar per row.
        dataset: PathBuf,
        /// Where to write the model file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Classify an input vector with a model.
    Classify {
        /// Model file to load.
        model: PathBuf,
        /// Input vector as comma-separated values, e.g. `1,0,0,1`.
        #[arg(short, long)]
        input: String,
        /// Solver: `rf` (regulatory feedback), `ls` (least squares), or
        /// `ff` (derive W once, single pass).
        #[arg(short, long, default_value = "rf")]
        solver: String,
        /// Use the raw expectations as feedforward weights (demonstrates why
        /// that fails); overrides --solver.
        #[arg(long)]
        naive_ff: bool,
        /// Write a per-iteration CSV (step, activations, energy) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver_opts: SolverOpts,
        /// Stop once --target-class reaches this activation.
        #[arg(long)]
        threshold: Option<f64>,
        /// Class label watched by --threshold.
        #[arg(long)]
        target_class: Option<String>,
    },
    /// Apply a localized edit (add-class, set, remove-class) and write the
    /// result; untouched entries stay bit-identical.
    Edit {
        /// Model file to load.
        model: PathBuf,
        #[command(subcommand)]
        op: EditOp,
    },
    /// Derive the feedforward weights W by pseudoinverse and write them as CSV.
    DeriveW {
        /// Model file to load.
        model: PathBuf,
        /// Where to write the weights CSV (classes as rows).
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Measure iterations-to-threshold, similarity, and condition number for
    /// every pattern pair and write a CSV sorted by similarity.
    Experiment {
        /// Patterns CSV (same format as a dataset; one named pattern per row).
        #[arg(long, conflicts_with_all = ["random", "seed", "count", "dim"])]
        patterns: Option<PathBuf>,
        /// Generate a seeded random pattern set instead of reading a file.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 26)]
        count: usize,
        #[arg(long, default_value_t = 512)]
        dim: usize,
        /// Step size for the least-squares solver; default picks the largest
        /// value stable for every pair.
        #[arg(long)]
        dt_ls: Option<f64>,
        /// Step size for the regulatory-feedback solver.
        #[arg(long, default_value_t = 1.0)]
        dt_rf: f64,
        /// Activation threshold that stops a presentation.
        #[arg(long, default_value_t = analysis::DEFAULT_TARGET_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Where to write the results CSV.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SolverOpts {
    /// Step size; defaults to 1.0 for rf and to the stable limit for ls.
    #[arg(long)]
    dt: Option<f64>,
    /// Convergence tolerance on the per-step change of Y.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Debug, Subcommand)]
enum EditOp {
    /// Add a class column: `add-class rollerblade 4,0,0,0 -o out.model`.
    AddClass {
        label: String,
        /// Expectations as comma-separated values.
        expectations: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Set one expectation entry: `set bicycle horizontal 0.5 -o out.model`.
    Set {
        class: String,
        feature: String,
        value: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Remove a class column.
    RemoveClass {
        label: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// CLI failure: either a usage problem (exit 1) or a library error (exit 2
/// or 3 depending on kind).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) => e.exit_code(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn parse_vector(text: &str) -> Result<InputVector, CliError> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|field| field.trim().parse::<f64>())
        .collect();
    let values =
        values.map_err(|_| CliError::Usage(format!("'{text}' is not a comma-separated vector")))?;
    Ok(InputVector::new(values)?)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Learn { dataset, output } => {
            let data = io::read_dataset(&dataset)?;
            let model = learning::learn_expectations(&data)?;
            io::write_model(&output, &model)?;
            println!(
                "learned {} classes x {} features -> {}",
                model.n_classes(),
                model.n_features(),
                output.display()
            );
            Ok(())
        }
        Command::Classify {
            model,
            input,
            solver,
            naive_ff,
            trace,
            solver_opts,
            threshold,
            target_class,
        } => classify(
            model,
            &input,
            &solver,
            naive_ff,
            trace,
            solver_opts,
            threshold,
            target_class,
        ),
        Command::Edit { model, op } => edit(model, op),
        Command::DeriveW { model, output } => {
            let m = io::read_model(&model)?;
            let w = feedforward::pseudoinverse(&m)?;
            std::fs::write(
                &output,
                io::feedforward_to_csv(&w, m.class_labels(), m.feature_labels()),
            )
            .map_err(Error::from)?;
            println!("condition number: {}", analysis::condition_number(&m));
            println!(
                "wrote {} x {} weights -> {}",
                w.n_classes(),
                w.n_features(),
                output.display()
            );
            Ok(())
        }
        Command::Experiment {
            patterns,
            random,
            seed,
            count,
            dim,
            dt_ls,
            dt_rf,
            threshold,
            tol,
            max_iter,
            output,
        } => experiment(
            patterns, random, seed, count, dim, dt_ls, dt_rf, threshold, tol, max_iter, output,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn classify(
    model: PathBuf,
    input: &str,
    solver: &str,
    naive_ff: bool,
    trace_path: Option<PathBuf>,
    solver_opts: SolverOpts,
    threshold: Option<f64>,
    target_class: Option<String>,
) -> Result<(), CliError> {
    let m = io::read_model(&model)?;
    let x = parse_vector(input)?;

    if naive_ff {
        let w0 = crate::model::FeedforwardMatrix::naive_from_expectations(&m);
        let y = feedforward::classify_feedforward(&w0, &x)?;
        print_activations(m.class_labels(), &y);
        println!("solver: naive expectation weights (single pass)");
        return Ok(());
    }

    let kind = match solver {
        "rf" => Some(SolverKind::RegulatoryFeedback),
        "ls" => Some(SolverKind::LeastSquares),
        "ff" => None,
        other => {
            return Err(CliError::Usage(format!(
                "unknown solver '{other}' (expected rf, ls, or ff)"
            )))
        }
    };

    match kind {
        None => {
            let w = feedforward::pseudoinverse(&m)?;
            let y = feedforward::classify_feedforward(&w, &x)?;
            print_activations(m.class_labels(), &y);
            println!("solver: derived feedforward weights (single pass)");
        }
        Some(kind) => {
            let mut config = SolverConfig {
                convergence_tol: solver_opts.tol,
                max_iterations: solver_opts.max_iter,
                ..SolverConfig::default()
            };
            config.dt = solver_opts.dt.unwrap_or_else(|| match kind {
                SolverKind::RegulatoryFeedback => 1.0,
                SolverKind::LeastSquares => dynamics::stable_least_squares_dt(&m),
            });
            config.target = match (threshold, target_class) {
                (None, None) => None,
                (Some(t), Some(label)) => {
                    let class = m
                        .class_index(&label)
                        .ok_or(CliError::Lib(Error::UnknownClass(label)))?;
                    Some(TargetStop {
                        class,
                        threshold: t,
                    })
                }
                _ => {
                    return Err(CliError::Usage(
                        "--threshold and --target-class must be given together".into(),
                    ))
                }
            };
            let y0 = ActivationVector::small_seed(m.n_classes());
            let (y, run_trace) = dynamics::solve(&m, &x, &y0, kind, &config)?;
            print_activations(m.class_labels(), &y);
            println!(
                "solver: {kind}, stop: {} after {} iterations ({})",
                run_trace.stop_reason,
                run_trace.iterations(),
                if run_trace.converged {
                    "converged"
                } else {
                    "not converged"
                }
            );
            if let Some(path) = trace_path {
                std::fs::write(&path, io::trace_to_csv(&run_trace, m.class_labels()))
                    .map_err(Error::from)?;
                println!("trace -> {}", path.display());
            }
        }
    }
    Ok(())
}

fn print_activations(labels: &[String], y: &ActivationVector) {
    for (label, value) in labels.iter().zip(y.as_slice()) {
        println!("{label}: {value}");
    }
}

fn edit(model: PathBuf, op: EditOp) -> Result<(), CliError> {
    let m = io::read_model(&model)?;
    let (edited, output, description) = match op {
        EditOp::AddClass {
            label,
            expectations,
            output,
        } => {
            let values = parse_vector(&expectations)?;
            let edited = learning::add_class(&m, &label, &values)?;
            (edited, output, format!("added class '{label}'"))
        }
        EditOp::Set {
            class,
            feature,
            value,
            output,
        } => {
            let edited = learning::set_expectation(&m, &class, &feature, value)?;
            (
                edited,
                output,
                format!("set ({class}, {feature}) = {value}"),
            )
        }
        EditOp::RemoveClass { label, output } => {
            let edited = learning::remove_class(&m, &label)?;
            (edited, output, format!("removed class '{label}'"))
        }
    };
    let changed = feedforward::entries_changed(m.entries(), edited.entries());
    io::write_model(&output, &edited)?;
    println!("{description} -> {}", output.display());
    println!(
        "locality: {changed} of {} shared entries changed; classes {} -> {}",
        m.n_features() * m.n_classes().min(edited.n_classes()),
        m.n_classes(),
        edited.n_classes()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    patterns_path: Option<PathBuf>,
    random: bool,
    seed: u64,
    count: usize,
    dim: usize,
    dt_ls: Option<f64>,
    dt_rf: f64,
    threshold: f64,
    tol: f64,
    max_iter: usize,
    output: PathBuf,
) -> Result<(), CliError> {
    let patterns = match (patterns_path, random) {
        (Some(path), false) => io::read_patterns(&path)?,
        (None, true) => analysis::random_patterns(seed, count, dim)?,
        (None, false) => {
            return Err(CliError::Usage(
                "pass either --patterns <file> or --random".into(),
            ))
        }
        (Some(_), true) => {
            return Err(CliError::Usage(
                "--patterns and --random are mutually exclusive".into(),
            ))
        }
    };

    let base = SolverConfig {
        convergence_tol: tol,
        max_iterations: max_iter,
        target: Some(TargetStop {
            class: 0,
            threshold,
        }),
        ..SolverConfig::default()
    };
    let ls_dt = match dt_ls {
        Some(dt) => dt,
        None => analysis::sweep_least_squares_dt(&patterns)?,
    };
    let ls_config = base.clone().with_dt(ls_dt);
    let rf_config = base.with_dt(dt_rf);

    let results = analysis::sweep_all_pairs(&patterns, &ls_config, &rf_config)?;
    std::fs::write(&output, io::experiment_to_csv(&results)).map_err(Error::from)?;

    let singular = results
        .iter()
        .filter(|r| r.condition_number.is_singular())
        .count();
    println!(
        "{} pairs ({} singular, skipped); dt_ls = {ls_dt}, dt_rf = {dt_rf} -> {}",
        results.len(),
        singular,
        output.display()
    );

    // Correlations over pairs where both solvers reached the threshold.
    let clean: Vec<&analysis::PairExperimentResult> = results
        .iter()
        .filter(|r| {
            r.least_squares.is_some_and(|s| s.converged)
                && r.regulatory_feedback.is_some_and(|s| s.converged)
        })
        .collect();
    if clean.len() >= 2 {
        let sims: Vec<f64> = clean.iter().map(|r| r.similarity).collect();
        let ls_iters: Vec<f64> = clean
            .iter()
            .map(|r| r.least_squares.unwrap().mean_iterations)
            .collect();
        let rf_iters: Vec<f64> = clean
            .iter()
            .map(|r| r.regulatory_feedback.unwrap().mean_iterations)
            .collect();
        let kappas: Vec<f64> = clean
            .iter()
            .map(|r| r.condition_number.value().unwrap_or(f64::INFINITY))
            .collect();
        println!(
            "rank correlation similarity vs iterations (least squares):      {:.3}",
            analysis::rank_correlation(&sims, &ls_iters)
        );
        println!(
            "rank correlation similarity vs iterations (regulatory feedback): {:.3}",
            analysis::rank_correlation(&sims, &rf_iters)
        );
        println!(
            "rank correlation similarity vs condition number:                 {:.3}",
            analysis::rank_correlation(&sims, &kappas)
        );
    } else {
        println!("too few converged pairs for correlation statistics");
    }
    Ok(())
}
