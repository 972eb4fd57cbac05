//! Per-epoch dev curves, averaged over runs and written as CSV.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sect_core::model::ModelKind;
use sect_core::train::TrainRecord;
use sect_core::Category;

use crate::error::{Result, SectError};
use crate::io::read_json;

pub const RECORDS_FILE: &str = "records.json";

/// Training records of one (seed, fold) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecords {
    pub model_kind: ModelKind,
    pub seed: u64,
    pub fold: usize,
    pub k: Option<usize>,
    pub best_epoch: usize,
    pub records: Vec<TrainRecord>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// One row per (strategy, epoch), each value the mean over runs. The MAT
/// column appears only when some run scored MAT.
pub fn curves_csv(runs: &[RunRecords]) -> String {
    let has_mat = runs
        .iter()
        .flat_map(|r| &r.records)
        .any(|r| r.dev_micro_f1.contains_key(&Category::MAT));
    let cats: Vec<Category> = Category::ALL
        .into_iter()
        .filter(|&c| c != Category::MAT || has_mat)
        .collect();

    let mut rows: BTreeMap<(String, usize), Vec<&TrainRecord>> = BTreeMap::new();
    for record in runs.iter().flat_map(|r| &r.records) {
        rows.entry((record.strategy.clone(), record.epoch)).or_default().push(record);
    }

    let mut out = String::from("strategy,epoch,dev_micro_f1_overall");
    for c in &cats {
        let _ = write!(out, ",dev_micro_f1_{c}");
    }
    out.push_str(",encoder_frozen\n");
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for ((strategy, epoch), recs) in rows {
        let overall: Vec<f64> = recs.iter().map(|r| r.dev_micro_f1_overall).collect();
        let _ = write!(out, "{strategy},{epoch},{}", cell(mean(&overall)));
        for c in &cats {
            let values: Vec<f64> = recs.iter().filter_map(|r| r.dev_micro_f1.get(c).copied()).collect();
            let _ = write!(out, ",{}", cell(mean(&values)));
        }
        let frozen = recs.iter().filter(|r| r.encoder_frozen).count();
        let flag = match frozen {
            0 => "false",
            n if n == recs.len() => "true",
            _ => "mixed",
        };
        let _ = writeln!(out, ",{flag}");
    }
    out
}

/// Every records file under `dir`, in path order.
pub fn find_run_records(dir: &Path) -> Result<Vec<RunRecords>> {
    let mut paths = Vec::new();
    walk(dir, &mut paths)?;
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| SectError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| SectError::io(dir, e))?.path();
        if path.is_dir() {
            walk(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == RECORDS_FILE) {
            out.push(path);
        }
    }
    Ok(())
}
