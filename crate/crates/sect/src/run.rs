//! Experiment runs written to disk: checkpoints, records, reports, curves and
//! the run manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sect_core::corpus::{Document, Split};
use sect_core::eval::{run_average, EvalReport};
use sect_core::train::{run_experiment, FoldReduction, TrainConfig};
use sect_core::LabelSet;

use crate::checkpoint::{save_checkpoint, Checkpoint};
use crate::curves::{curves_csv, RunRecords, RECORDS_FILE};
use crate::error::Result;
use crate::io::{write_json, write_text};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const CURVES_FILE: &str = "curves.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Where the train/dev/test assignment came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitSource {
    Manifest { path: String, sha256: String },
    CrossValidation { folds: usize, dev_fraction: f64, seed: u64 },
}

/// Everything needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub root_seed: u64,
    pub seeds: Vec<u64>,
    pub config: TrainConfig,
    pub corpus: String,
    pub corpus_sha256: String,
    pub labels: LabelSet,
    pub split: SplitSource,
    pub split_id: String,
    pub fold_reduction: FoldReduction,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}

/// Relative path of one run's files.
pub fn run_dir(seed: u64, fold: usize) -> String {
    format!("seed-{seed}/fold-{fold}")
}

pub struct ModelRun {
    pub report: EvalReport,
    pub outputs: Vec<String>,
}

/// Trains every (seed, fold), writes per-run checkpoints and records, the
/// seed-averaged test report and the dev curves under `dir`.
pub fn run_and_save(
    dir: &Path,
    docs: &[Document],
    splits: &[Split],
    labels: &LabelSet,
    cfg: &TrainConfig,
    split_id: &str,
    reduction: FoldReduction,
) -> Result<ModelRun> {
    let runs = run_experiment(docs, splits, labels, cfg, split_id, reduction)?;
    let mut outputs = Vec::new();
    let mut all_records = Vec::new();
    for run in &runs {
        for (fold, outcome) in run.folds.iter().enumerate() {
            let rel = run_dir(run.seed, fold);
            let ck = Checkpoint::from_model(&outcome.model, run.seed, Some(cfg), Some(outcome.best_epoch));
            save_checkpoint(&dir.join(&rel).join(CHECKPOINT_FILE), &ck)?;
            let records = RunRecords {
                model_kind: cfg.model_kind,
                seed: run.seed,
                fold,
                k: outcome.k,
                best_epoch: outcome.best_epoch,
                records: outcome.records.clone(),
            };
            write_json(&dir.join(&rel).join(RECORDS_FILE), &records)?;
            outputs.push(format!("{rel}/{CHECKPOINT_FILE}"));
            outputs.push(format!("{rel}/{RECORDS_FILE}"));
            all_records.push(records);
        }
    }
    let reports: Vec<EvalReport> = runs.into_iter().map(|r| r.report).collect();
    let report = run_average(&reports)?;
    write_json(&dir.join(REPORT_FILE), &report)?;
    write_text(&dir.join(CURVES_FILE), &curves_csv(&all_records))?;
    outputs.push(REPORT_FILE.to_string());
    outputs.push(CURVES_FILE.to_string());
    Ok(ModelRun { report, outputs })
}
