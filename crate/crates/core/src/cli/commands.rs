use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use super::config::RunConfig;
use super::vectors::{EquivalenceReport, HarnessReport, TestVectorFile};
use crate::codegen::{emit_super_learner, EmittedArtifact};
use crate::flowdata::{
    class_counts, encode, fit_encoder, parse_zeek_log, read_dataset_csv, stratified_split,
    synth_generate_with, write_dataset_csv, Encoder, FeatureVector, SynthConfig, FEATURE_NAMES,
};
use crate::metrics::{evaluate, EvalReport};
use crate::optimizer::{feature_reduction_loop, sha256_hex, ReductionReport};
use crate::stacker::{load_model, save_model, train_super_learner, Provenance, SuperLearnerModel};
use crate::{Error, Result};

/// An encoded dataset plus where it came from.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub vectors: Vec<FeatureVector>,
    /// Fitted on the input for Zeek logs; empty for CSV input, whose
    /// categorical columns are already codes.
    pub encoder: Encoder,
    pub sha256: String,
    /// Zeek lines skipped for having the wrong column count.
    pub rejected_lines: usize,
}

/// Reads a CSV dataset or a Zeek log, told apart by the CSV header. Zeek
/// input is encoded with `encoder` when given, otherwise with a dictionary
/// fitted on the file.
pub fn load_dataset(path: &Path, encoder: Option<&Encoder>) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha256 = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::Data(format!("{} is not UTF-8", path.display())))?;
    let csv_header = format!("{},", FEATURE_NAMES[0]);
    if text.trim_start().starts_with(&csv_header) {
        let vectors = read_dataset_csv(text.as_bytes())?;
        return Ok(Dataset {
            vectors,
            encoder: encoder.cloned().unwrap_or_default(),
            sha256,
            rejected_lines: 0,
        });
    }
    let parsed = parse_zeek_log(&text)?;
    let encoder = match encoder {
        Some(e) => e.clone(),
        None => fit_encoder(&parsed.records)?,
    };
    let vectors = parsed.records.iter().map(|r| encode(r, &encoder)).collect();
    Ok(Dataset {
        vectors,
        encoder,
        sha256,
        rejected_lines: parsed.rejected.len(),
    })
}

/// `created` stamp for artifacts: `SOURCE_DATE_EPOCH` when set, otherwise
/// the epoch, so repeated runs write identical files.
pub fn created_stamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Envelope for every JSON report: the command, its resolved config, the
/// input hash and the result.
#[derive(Debug, Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub command: &'a str,
    pub tool_version: &'a str,
    pub created: String,
    pub input_sha256: Option<&'a str>,
    pub config: serde_json::Value,
    pub result: &'a T,
}

fn write_artifact<T: Serialize>(
    path: &Path,
    command: &str,
    cfg: &RunConfig,
    input_sha256: Option<&str>,
    result: &T,
) -> Result<()> {
    let artifact = Artifact {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        created: created_stamp(),
        input_sha256,
        config: cfg.to_json(),
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&artifact)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn split(cfg: &RunConfig, data: &[FeatureVector]) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    stratified_split(data, cfg.data.train_fraction, cfg.seed)
}

/// The config a model was trained under: its recorded run config when
/// present, with the stack section and seed always taken from the model.
pub fn model_run_config(model: &SuperLearnerModel, fallback: &RunConfig) -> Result<RunConfig> {
    let mut cfg = model
        .provenance()
        .run_config
        .as_ref()
        .and_then(|v| serde_json::from_value::<RunConfig>(v.clone()).ok())
        .unwrap_or_else(|| fallback.clone());
    cfg.seed = model.config().seed;
    cfg.stack = model.config().clone();
    cfg.resolve()
}

fn provenance(cfg: &RunConfig, sha: &str) -> Provenance {
    Provenance {
        created: created_stamp(),
        input_sha256: Some(sha.to_string()),
        run_config: Some(cfg.to_json()),
    }
}

/// Writes a synthetic dataset and returns its `[benign, malicious]` counts.
pub fn cmd_gen_data(cfg: &RunConfig, out: &Path) -> Result<[usize; 2]> {
    let data = synth_generate_with(&SynthConfig {
        n: cfg.data.n,
        class_balance: cfg.data.class_balance,
        camouflage: cfg.data.camouflage,
        seed: cfg.seed,
    });
    let file = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    write_dataset_csv(std::io::BufWriter::new(file), &data)?;
    Ok(class_counts(&data))
}

/// Encodes a Zeek log to the CSV dataset format.
pub fn cmd_ingest(input: &Path, out: &Path) -> Result<Dataset> {
    let ds = load_dataset(input, None)?;
    let file = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    write_dataset_csv(std::io::BufWriter::new(file), &ds.vectors)?;
    Ok(ds)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SuperLearnerModel,
    pub report: EvalReport,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
}

/// Trains on the stratified training share, evaluates on the rest, and
/// writes `model.json` and `train-report.json` into `out_dir`.
pub fn cmd_train(cfg: &RunConfig, data: &Path, out_dir: &Path) -> Result<TrainOutcome> {
    let ds = load_dataset(data, None)?;
    let (train, valid) = split(cfg, &ds.vectors)?;
    let model = train_super_learner(&train, ds.encoder, &cfg.stack)?.with_provenance(provenance(cfg, &ds.sha256));
    let report = evaluate(&model, &valid, cfg.eval.timing_repetitions)?;
    create_dir(out_dir)?;
    let model_path = out_dir.join("model.json");
    let report_path = out_dir.join("train-report.json");
    save_model(&model, &model_path)?;
    write_artifact(&report_path, "train", cfg, Some(&ds.sha256), &report)?;
    Ok(TrainOutcome {
        model,
        report,
        model_path,
        report_path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub reduction: ReductionReport,
    pub evaluation: EvalReport,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub model: SuperLearnerModel,
    pub result: OptimizeResult,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
}

/// Runs the gated reduction loop and dead-node pruning. With `model`, the
/// stack, seed, split and encoder come from that model; the schedule always
/// comes from `cfg`. Writes `model-optimized.json` and
/// `reduction-report.json`.
pub fn cmd_optimize(cfg: &RunConfig, data: &Path, model: Option<&Path>, out_dir: &Path) -> Result<OptimizeOutcome> {
    let (cfg, ds) = match model {
        Some(path) => {
            let m = load_model(path)?;
            let mut resolved = model_run_config(&m, cfg)?;
            resolved.schedule = cfg.schedule.clone();
            resolved.eval = cfg.eval.clone();
            (resolved, load_dataset(data, Some(m.encoder()))?)
        }
        None => (cfg.clone(), load_dataset(data, None)?),
    };
    let (train, valid) = split(&cfg, &ds.vectors)?;
    let (model, reduction) = feature_reduction_loop(&train, &valid, &ds.encoder, &cfg.stack, &cfg.schedule)?;
    let model = model.with_provenance(provenance(&cfg, &ds.sha256));
    let evaluation = evaluate(&model, &valid, cfg.eval.timing_repetitions)?;
    create_dir(out_dir)?;
    let model_path = out_dir.join("model-optimized.json");
    let report_path = out_dir.join("reduction-report.json");
    save_model(&model, &model_path)?;
    let result = OptimizeResult { reduction, evaluation };
    write_artifact(&report_path, "optimize", &cfg, Some(&ds.sha256), &result)?;
    Ok(OptimizeOutcome {
        model,
        result,
        model_path,
        report_path,
    })
}

/// Writes the C header, source and `manifest.json` into `out_dir`.
pub fn cmd_emit(cfg: &RunConfig, model: &Path, out_dir: &Path) -> Result<EmittedArtifact> {
    let m = load_model(model)?;
    let artifact = emit_super_learner(&m, &cfg.emit)?;
    artifact.write_to(out_dir)?;
    Ok(artifact)
}

/// The rows a model-based command scores: the validation share of the
/// model's own split, or everything with `all`.
pub fn scoring_rows(model: &SuperLearnerModel, cfg: &RunConfig, data: &Path, all: bool) -> Result<(RunConfig, Dataset, Vec<FeatureVector>)> {
    let cfg = model_run_config(model, cfg)?;
    let ds = load_dataset(data, Some(model.encoder()))?;
    let rows = if all { ds.vectors.clone() } else { split(&cfg, &ds.vectors)?.1 };
    Ok((cfg, ds, rows))
}

/// Evaluates a saved model; `out` receives the JSON report.
pub fn cmd_eval(cfg: &RunConfig, model: &Path, data: &Path, all: bool, out: Option<&Path>) -> Result<EvalReport> {
    let m = load_model(model)?;
    let (mut mcfg, ds, rows) = scoring_rows(&m, cfg, data, all)?;
    mcfg.eval = cfg.eval.clone();
    let report = evaluate(&m, &rows, mcfg.eval.timing_repetitions)?;
    if let Some(path) = out {
        write_artifact(path, "eval", &mcfg, Some(&ds.sha256), &report)?;
    }
    Ok(report)
}

/// Writes reference predictions in the harness vector format.
pub fn cmd_export_vectors(cfg: &RunConfig, model: &Path, data: &Path, all: bool, out: &Path) -> Result<TestVectorFile> {
    let m = load_model(model)?;
    let (_, _, rows) = scoring_rows(&m, cfg, data, all)?;
    let vectors = TestVectorFile::from_model(&m, &rows)?;
    vectors.write(out)?;
    Ok(vectors)
}

/// Exports vectors into `work_dir`, runs `harness VECTORS REPORT`, and
/// compares its report with the reference predictions. Fails with
/// [`Error::Equivalence`] on any class mismatch or deviation above
/// `roundtrip.tolerance`.
pub fn cmd_roundtrip(
    cfg: &RunConfig,
    model: &Path,
    data: &Path,
    harness: &Path,
    work_dir: &Path,
    all: bool,
) -> Result<EquivalenceReport> {
    if !harness.is_file() {
        return Err(Error::InvalidArgument(format!(
            "harness binary `{}` not found. Emit the model with `superlearn emit`, then compile the \
             harness against it, for example: cc -std=c99 -O2 -ffp-contract=off harness.c \
             superlearner_model.c -o harness -lm",
            harness.display()
        )));
    }
    create_dir(work_dir)?;
    let vectors_path = work_dir.join("vectors.csv");
    let report_path = work_dir.join("harness-report.csv");
    let vectors = cmd_export_vectors(cfg, model, data, all, &vectors_path)?;
    let _ = std::fs::remove_file(&report_path);
    let status = Command::new(harness)
        .arg(&vectors_path)
        .arg(&report_path)
        .status()
        .map_err(|e| Error::io(harness, e))?;
    let text = std::fs::read_to_string(&report_path).map_err(|_| {
        Error::Equivalence(format!(
            "harness exited with {status} without writing {}",
            report_path.display()
        ))
    })?;
    let report = HarnessReport::parse(&text)?;
    let eq = EquivalenceReport::check(&vectors, &report, cfg.roundtrip.tolerance)?;
    write_artifact(&work_dir.join("equivalence.json"), "roundtrip", cfg, None, &eq)?;
    if !eq.passed {
        return Err(Error::Equivalence(format!(
            "{} class mismatches, max |dp| = {:e} (tolerance {:e}) over {} rows",
            eq.class_mismatches, eq.max_abs_dp, eq.tolerance, eq.rows
        )));
    }
    if !status.success() {
        return Err(Error::Equivalence(format!("harness reported success data but exited with {status}")));
    }
    Ok(eq)
}
