//! The `superlearn` command line: one subcommand per pipeline stage.
//!
//! Every command resolves a [`RunConfig`] from the defaults, an optional
//! TOML file (`--config`) and `--set key.path=value` overrides, in that
//! order; dedicated flags such as `--seed` count as overrides. The resolved
//! config is embedded in every JSON artifact.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration or usage
//! error, 3 data error, 4 training failure, 5 equivalence failure.

mod commands;
mod config;
mod vectors;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_emit, cmd_eval, cmd_export_vectors, cmd_gen_data, cmd_ingest, cmd_optimize, cmd_roundtrip,
    cmd_train, created_stamp, load_dataset, model_run_config, scoring_rows, split, Artifact, Dataset,
    OptimizeOutcome, OptimizeResult, TrainOutcome,
};
pub use config::{DataConfig, EvalConfig, RoundtripConfig, RunConfig};
pub use vectors::{
    EquivalenceReport, HarnessReport, HarnessRow, HarnessSummary, TestVector, TestVectorFile,
    VECTOR_COLUMNS,
};

use crate::codegen::{FloatWidth, TreeStyle};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_TRAINING: i32 = 4;
pub const EXIT_EQUIVALENCE: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Codegen(_) => EXIT_CONFIG,
        Error::Parse { .. }
        | Error::Data(_)
        | Error::Dimension { .. }
        | Error::Schema { .. }
        | Error::Model(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_DATA,
        Error::Training { .. } | Error::NonFiniteLoss { .. } | Error::NotFinalized => EXIT_TRAINING,
        Error::Equivalence(_) => EXIT_EQUIVALENCE,
        Error::Io { .. } => EXIT_OTHER,
    }
}

#[derive(Debug, Parser)]
#[command(name = "superlearn", version, about = "Super-learner flow classifier: train, shrink, evaluate, emit C")]
pub struct Cli {
    /// TOML run configuration applied over the defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Config override such as `stack.forest.n_trees=20`; repeatable, applied
    /// after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Master seed for generation, splits and training.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Write a synthetic labeled flow dataset as CSV.
    GenData {
        #[arg(long)]
        n: Option<usize>,
        /// Fraction of malicious flows.
        #[arg(long)]
        balance: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Encode a Zeek conn.log(.labeled) into the CSV dataset format.
    Ingest {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train the full stack and evaluate it on the held-out split.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Accuracy-gated reduction followed by dead-node pruning.
    Optimize {
        #[arg(long)]
        data: PathBuf,
        /// Start from this model's stack, seed and encoder.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Transpile a model to C99.
    Emit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "emitted")]
        out_dir: PathBuf,
        /// Emit trees as node tables instead of nested conditionals.
        #[arg(long)]
        node_table: bool,
        /// Single-precision arithmetic.
        #[arg(long)]
        f32: bool,
    },
    /// Accuracy, TPR, FPR, ROC AUC, inference time and size of a model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Score every row instead of the model's validation split.
        #[arg(long)]
        all: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write reference predictions in the harness vector format.
    ExportVectors {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        all: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Check a compiled C harness against the reference predictions.
    Roundtrip {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        harness: PathBuf,
        #[arg(long, default_value = "roundtrip")]
        work_dir: PathBuf,
        #[arg(long)]
        all: bool,
    },
}

impl Cli {
    /// Resolved config: file, then `--set`, then dedicated flags.
    pub fn run_config(&self) -> crate::Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        match &self.command {
            Cmd::GenData { n, balance, .. } => {
                if let Some(n) = n {
                    overrides.push(format!("data.n={n}"));
                }
                if let Some(b) = balance {
                    overrides.push(format!("data.class_balance={b:?}"));
                }
            }
            Cmd::Emit { node_table, f32, .. } => {
                if *node_table {
                    overrides.push(format!("emit.tree_style={}", json_name(TreeStyle::NodeTable)));
                }
                if *f32 {
                    overrides.push(format!("emit.float={}", json_name(FloatWidth::F32)));
                }
            }
            _ => {}
        }
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

fn json_name<T: serde::Serialize>(v: T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn execute(cli: &Cli) -> crate::Result<()> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Cmd::GenData { out, .. } => {
            let [b, m] = cmd_gen_data(&cfg, out)?;
            println!("wrote {} flows ({b} benign, {m} malicious) to {}", b + m, out.display());
        }
        Cmd::Ingest { input, out } => {
            let ds = cmd_ingest(input, out)?;
            let [b, m] = crate::flowdata::class_counts(&ds.vectors);
            println!(
                "encoded {} flows ({b} benign, {m} malicious, {} malformed lines skipped) to {}",
                ds.vectors.len(),
                ds.rejected_lines,
                out.display()
            );
        }
        Cmd::Train { data, out_dir } => {
            let o = cmd_train(&cfg, data, out_dir)?;
            print!("{}", o.report.table("super learner"));
            println!("model: {}\nreport: {}", o.model_path.display(), o.report_path.display());
        }
        Cmd::Optimize { data, model, out_dir } => {
            let o = cmd_optimize(&cfg, data, model.as_deref(), out_dir)?;
            print!("{}", o.result.reduction.table());
            print!("{}", o.result.evaluation.table("optimized"));
            println!("model: {}\nreport: {}", o.model_path.display(), o.report_path.display());
        }
        Cmd::Emit { model, out_dir, .. } => {
            let a = cmd_emit(&cfg, model, out_dir)?;
            let m = &a.manifest;
            println!(
                "wrote {} to {} ({} source bytes, {} static data bytes, {} parameters)",
                m.files.join(", "),
                out_dir.display(),
                m.source_bytes,
                m.static_data_bytes,
                m.parameter_count
            );
        }
        Cmd::Eval { model, data, all, out } => {
            let r = cmd_eval(&cfg, model, data, *all, out.as_deref())?;
            print!("{}", r.table("super learner"));
        }
        Cmd::ExportVectors { model, data, all, out } => {
            let v = cmd_export_vectors(&cfg, model, data, *all, out)?;
            println!("wrote {} vectors to {}", v.rows.len(), out.display());
        }
        Cmd::Roundtrip {
            model,
            data,
            harness,
            work_dir,
            all,
        } => {
            let r = cmd_roundtrip(&cfg, model, data, harness, work_dir, *all)?;
            println!(
                "equivalent: {} rows, 0 class mismatches, max |dp| = {:e}",
                r.rows, r.max_abs_dp
            );
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
