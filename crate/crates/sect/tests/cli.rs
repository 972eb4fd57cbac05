use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sect_core::corpus::{generate_synthetic_corpus, split_corpus, SplitSpec, SynthSpec};
use sect_core::eval::EvalReport;
use sect_core::train::TrainConfig;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn sect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sect")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synthetic_corpus(dir: &Path, n: usize) -> PathBuf {
    let docs = generate_synthetic_corpus(&SynthSpec::new(n, 2, 1)).unwrap();
    let path = dir.join("synth.jsonl");
    sect::io::save_corpus(&path, &docs).unwrap();
    path
}

fn quick_config(dir: &Path) -> PathBuf {
    let cfg = TrainConfig {
        epochs: 3,
        fine_tune_epochs: 2,
        dim: 8,
        dropout: 0.1,
        seeds: vec![0, 1],
        optimizer: sect_core::optim::AdamWConfig {
            lr: 5e-3,
            ..Default::default()
        },
        ..TrainConfig::default()
    };
    let path = dir.join("config.json");
    sect::io::write_json(&path, &cfg).unwrap();
    path
}

#[test]
fn stats_matches_hand_tally() {
    let o = sect(&["stats", p(&fixture("mini.jsonl"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["documents 2", "E2D 3", "E2T 1", "E2E 1", "total 5", "chains 3", "SECT 1.7"] {
        assert!(text.lines().any(|l| l == line), "missing `{line}` in\n{text}");
    }
}

#[test]
fn validate_reports_line_of_corrupted_record() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("mini.jsonl")).unwrap();
    let corrupted = text.replacen("\"includes\"", "\"sideways\"", 1);
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, corrupted).unwrap();
    let o = sect(&["validate", p(&path)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[validation]: "), "{err}");
    assert!(err.contains("bad.jsonl:1:"), "{err}");

    let ok = sect(&["validate", p(&fixture("mini.jsonl"))]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn usage_and_runtime_errors_have_exit_codes() {
    let o = sect(&["stats"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[usage]: "));
    let o = sect(&["train", "x.jsonl", "--model", "bert", "-o", "out"]);
    assert_eq!(o.status.code(), Some(1));
    let o = sect(&["stats", "/nonexistent/corpus.jsonl"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[runtime]: "));
}

#[test]
fn chains_lists_canonical_order() {
    let o = sect(&["chains", p(&fixture("mini.jsonl"))]);
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert_eq!(first, "apw-001\te1\tDCT:E2D:before\tt1:E2T:is_included\te2:E2E:before");
    let inverted = stdout(&sect(&["chains", "--invert", p(&fixture("mini.jsonl"))]));
    assert!(inverted.contains("apw-001\te2\tDCT:E2D:includes\te1:E2E:after*"), "{inverted}");
}

#[test]
fn synth_writes_a_valid_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n_docs": 7, "events_per_doc": 4, "timex_per_doc": 1, "context_depth": 2, "seed": 3}"#).unwrap();
    let out = dir.path().join("c.jsonl");
    let o = sect(&["synth", p(&spec), "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 7);
    assert!(sect(&["validate", p(&out)]).status.success());
}

#[test]
fn eval_of_saved_checkpoint_reproduces_dev_score() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic_corpus(dir.path(), 30);
    let docs = sect::io::load_corpus(&corpus, &Default::default()).unwrap();
    let split = &split_corpus(&docs, &SplitSpec::cross_validation(3, 0.2, 0), None).unwrap()[0];
    let manifest = dir.path().join("split.json");
    sect::io::write_json(&manifest, &split.to_manifest(&docs)).unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("run");
    for model in ["sec", "local"] {
        let o = sect(&[
            "train", p(&corpus), "--model", model, "--strategy", "freeze-after-k", "--k", "2", "--seeds", "1",
            "--config", p(&cfg), "--split", p(&manifest), "-o", p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let records: sect::curves::RunRecords = sect::io::read_json(&out.join("seed-0/fold-0/records.json")).unwrap();
        let best = records.records.iter().find(|r| r.epoch == records.best_epoch).unwrap();
        let o = sect(&[
            "eval", p(&out.join("seed-0/fold-0/checkpoint.json")), p(&corpus), "--split", p(&manifest), "--part", "dev",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report: EvalReport = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report.overall, best.dev_micro_f1_overall);
        assert_eq!(report.per_category, best.dev_micro_f1);
        assert!(out.join("manifest.json").exists());
        assert!(out.join("curves.csv").exists());
    }
}

#[test]
fn ablate_on_200_documents_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic_corpus(dir.path(), 200);
    let cfg = quick_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = sect(&["ablate", p(&corpus), "--config", p(&cfg), "--folds", "2", "--seeds", "2", "-o", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a");
    let b = run("b");
    for kind in ["local", "multi", "sec"] {
        assert!(a.join(kind).join("report.json").exists());
    }
    let table = fs::read_to_string(a.join("ablation.txt")).unwrap();
    assert!(table.contains("global + multi-category Models"));
    for f in ["ablation.json", "ablation.txt", "sec/curves.csv", "local/report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let curves = dir.path().join("curves.csv");
    let o = sect(&["curves", p(&a.join("sec")), "-o", p(&curves)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("strategy,epoch,dev_micro_f1_overall,dev_micro_f1_E2D,dev_micro_f1_E2T,dev_micro_f1_E2E,encoder_frozen\n"));
    assert_eq!(text.lines().count(), 1 + 3);
}
