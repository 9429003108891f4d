mod common;

use std::path::Path;

use superlearn::cli::{self, EXIT_CONFIG, EXIT_DATA, EXIT_EQUIVALENCE, EXIT_OK};
use superlearn::metrics::EvalReport;
use superlearn::stacker::load_model;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["superlearn"];
    full.extend_from_slice(args);
    cli::run(full)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report(path: &Path) -> EvalReport {
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    serde_json::from_value(v["result"].clone()).unwrap()
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&["gen-data", "--n", "1000", "--seed", "7", "-o", p(&a)]), EXIT_OK);
    assert_eq!(run(&["gen-data", "--n", "1000", "--seed", "7", "-o", p(&b)]), EXIT_OK);
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(text).unwrap().lines().count(), 1001);
}

#[test]
fn train_then_eval_reproduces_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = dir.path().join("out");
    assert_eq!(run(&["gen-data", "--n", "600", "--seed", "4", "-o", p(&data)]), EXIT_OK);
    assert_eq!(run(&["--seed", "4", "train", "--data", p(&data), "--out-dir", p(&out)]), EXIT_OK);
    let trained = report(&out.join("train-report.json"));
    // eval takes the seed and split from the model, not from the command line
    let eval_path = dir.path().join("eval.json");
    let model = out.join("model.json");
    assert_eq!(
        run(&["--seed", "99", "eval", "--model", p(&model), "--data", p(&data), "--out", p(&eval_path)]),
        EXIT_OK
    );
    let evaluated = report(&eval_path);
    assert_eq!(evaluated.confusion, trained.confusion);
    assert_eq!(evaluated.roc_auc, trained.roc_auc);
    assert_eq!(evaluated.size, trained.size);

    let m = load_model(&model).unwrap();
    let prov = m.provenance();
    assert_eq!(prov.created, "unix:0");
    assert_eq!(prov.input_sha256.as_ref().unwrap().len(), 64);
    assert_eq!(prov.run_config.as_ref().unwrap()["seed"], 4);
}

#[test]
fn ingest_encodes_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flows.csv");
    let log = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/conn.log");
    assert_eq!(run(&["ingest", log, "-o", p(&out)]), EXIT_OK);
    let data = superlearn::flowdata::read_dataset_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(superlearn::flowdata::class_counts(&data), [3, 7]);
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert_eq!(run(&["train", "--data", p(&data), "--set", "stack.k_base=1"]), EXIT_CONFIG);
    assert_eq!(run(&["train", "--data", p(&data), "--set", "nope=1"]), EXIT_CONFIG);
    assert_eq!(run(&["no-such-command"]), EXIT_CONFIG);
    let bad = std::iter::once(superlearn::flowdata::FEATURE_NAMES.join(",") + ",label")
        .chain(std::iter::once("1,2,3".to_string()))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&data, bad).unwrap();
    assert_eq!(run(&["train", "--data", p(&data), "--out-dir", p(dir.path())]), EXIT_DATA);
    let model = dir.path().join("missing-model.json");
    let harness = dir.path().join("missing-harness");
    assert_eq!(
        run(&["roundtrip", "--model", p(&model), "--data", p(&data), "--harness", p(&harness)]),
        EXIT_CONFIG
    );
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\n[data]\nn = 300\nclass_balance = 0.5\n").unwrap();
    let out = dir.path().join("d.csv");
    assert_eq!(run(&["--config", p(&cfg), "gen-data", "--n", "200", "-o", p(&out)]), EXIT_OK);
    let data = superlearn::flowdata::read_dataset_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(data.len(), 200);
    assert_eq!(superlearn::flowdata::class_counts(&data), [100, 100]);
}

#[test]
fn roundtrip_through_compiled_harness() {
    let Some(cc) = common::c_compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("d.csv");
    assert_eq!(run(&["gen-data", "--n", "500", "-o", p(&data)]), EXIT_OK);
    let harness_src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/harness.c")).unwrap();
    let mut harnesses = Vec::new();
    for seed in ["1", "2"] {
        let out = d.join(format!("m{seed}"));
        assert_eq!(run(&["--seed", seed, "train", "--data", p(&data), "--out-dir", p(&out)]), EXIT_OK);
        let em = d.join(format!("em{seed}"));
        assert_eq!(run(&["emit", "--model", p(&out.join("model.json")), "--out-dir", p(&em)]), EXIT_OK);
        let artifact = superlearn::codegen::emit_super_learner(
            &load_model(out.join("model.json")).unwrap(),
            &Default::default(),
        )
        .unwrap();
        harnesses.push(common::compile(&cc, &artifact, &em, &[("harness.c", &harness_src)], "harness"));
    }
    let model = d.join("m1/model.json");
    let work = d.join("rt");
    let args = |h: &Path| {
        vec![
            "roundtrip".to_string(),
            "--model".into(),
            p(&model).into(),
            "--data".into(),
            p(&data).into(),
            "--harness".into(),
            p(h).into(),
            "--work-dir".into(),
            p(&work).into(),
            "--all".into(),
        ]
    };
    let mut full = vec!["superlearn".to_string()];
    full.extend(args(&harnesses[0]));
    assert_eq!(cli::run(full.clone()), EXIT_OK);
    let eq: serde_json::Value = serde_json::from_slice(&std::fs::read(work.join("equivalence.json")).unwrap()).unwrap();
    assert_eq!(eq["result"]["rows"], 500);
    assert_eq!(eq["result"]["max_abs_dp"], 0.0);

    // negative control: a harness built from a different model must fail
    let mut wrong = vec!["superlearn".to_string()];
    wrong.extend(args(&harnesses[1]));
    assert_eq!(cli::run(wrong), EXIT_EQUIVALENCE);

    // empty vector file: zero rows, clean exit
    let empty = d.join("empty.csv");
    superlearn::cli::TestVectorFile::default().write(&empty).unwrap();
    let report = d.join("empty-report.csv");
    let status = std::process::Command::new(&harnesses[0]).arg(&empty).arg(&report).status().unwrap();
    assert!(status.success());
    let parsed = superlearn::cli::HarnessReport::parse(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed.summary.rows, 0);
}
