//! Scoring: micro-F1, per-category reports, majority vote, run averaging and
//! the Local / Multi / SEC comparison table.
//!
//! Every scored link gets exactly one label from the full inventory, so
//! micro-averaged precision, recall and F1 all equal accuracy unless some
//! labels are excluded from the positive classes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::chains::build_sect_chains;
use crate::corpus::Document;
use crate::model::{Model, ModelKind, Prediction, Unit};
use crate::{Category, Error, LabelSet, Result};

/// Micro-averaged precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Micro P/R/F1 where labels in `excluded` never count as positives.
pub fn micro_prf<T: PartialEq>(predictions: &[T], golds: &[T], excluded: &[T]) -> Result<MicroScore> {
    if predictions.len() != golds.len() {
        return Err(Error::Report(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Err(Error::Report("no items to score".into()));
    }
    let positive = |x: &T| !excluded.contains(x);
    let mut tp = 0usize;
    let mut predicted = 0usize;
    let mut actual = 0usize;
    for (p, g) in predictions.iter().zip(golds) {
        predicted += usize::from(positive(p));
        actual += usize::from(positive(g));
        tp += usize::from(p == g && positive(g));
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, actual);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MicroScore { precision, recall, f1 })
}

/// Micro-F1 over all labels, which is `correct / total`.
pub fn micro_f1<T: PartialEq>(predictions: &[T], golds: &[T]) -> Result<f64> {
    micro_prf(predictions, golds, &[]).map(|s| s.f1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_kind: String,
    /// Identifier of the data the report was computed on.
    pub split: String,
    pub seeds: Vec<u64>,
    pub per_category: BTreeMap<Category, f64>,
    pub support: BTreeMap<Category, usize>,
    /// Micro-F1 pooled over every category.
    pub overall: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stddev: BTreeMap<Category, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_seed: BTreeMap<Category, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overall_stddev: Option<f64>,
}

impl EvalReport {
    /// Scores pooled predictions. Categories without items are omitted.
    pub fn from_predictions(preds: &[Prediction], model_kind: &str, split: &str, seeds: &[u64]) -> Self {
        let mut per_category = BTreeMap::new();
        let mut support = BTreeMap::new();
        for c in Category::ALL {
            let (p, g): (Vec<usize>, Vec<usize>) = preds
                .iter()
                .filter(|x| x.category == c)
                .map(|x| (x.predicted, x.gold))
                .unzip();
            if let Ok(f1) = micro_f1(&p, &g) {
                per_category.insert(c, f1);
                support.insert(c, g.len());
            }
        }
        let (p, g): (Vec<usize>, Vec<usize>) = preds.iter().map(|x| (x.predicted, x.gold)).unzip();
        EvalReport {
            model_kind: model_kind.to_string(),
            split: split.to_string(),
            seeds: seeds.to_vec(),
            per_category,
            support,
            overall: micro_f1(&p, &g).unwrap_or(0.0),
            stddev: BTreeMap::new(),
            per_seed: BTreeMap::new(),
            overall_stddev: None,
        }
    }

    pub fn f1(&self, category: Category) -> Option<f64> {
        self.per_category.get(&category).copied()
    }
}

/// How test-time units are built; must match training.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub invert_links: bool,
    pub include_derived: bool,
}

/// Predictions for every annotated link of `docs`. SEC models consume
/// chains in canonical order; pair models score links one by one.
pub fn collect_predictions(model: &Model, docs: &[&Document], opts: EvalOptions) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for doc in docs {
        match model.kind() {
            ModelKind::Sec => {
                for chain in build_sect_chains(doc, &model.labels, opts.invert_links)? {
                    out.extend(model.predict(doc, Unit::Chain(&chain), opts.include_derived)?);
                }
            }
            _ => {
                for link in &doc.tlinks {
                    out.extend(model.predict(doc, Unit::Pair(link), opts.include_derived)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn evaluate(model: &Model, docs: &[&Document], opts: EvalOptions, split: &str, seeds: &[u64]) -> Result<EvalReport> {
    let preds = collect_predictions(model, docs, opts)?;
    Ok(EvalReport::from_predictions(&preds, model.kind().as_str(), split, seeds))
}

/// Per category, the most frequent training label (ties go to the earlier
/// label in `labels`) predicted for every test item of that category.
/// Test items of categories absent from `train` are skipped.
pub fn majority_predictions(train: &[&Document], test: &[&Document], labels: &LabelSet) -> Result<Vec<Prediction>> {
    let mut counts: BTreeMap<Category, Vec<usize>> = BTreeMap::new();
    for doc in train {
        for link in &doc.tlinks {
            let i = labels.index_of(&link.relation)?;
            counts.entry(link.category).or_insert_with(|| alloc::vec![0; labels.len()])[i] += 1;
        }
    }
    let majority: BTreeMap<Category, usize> = counts
        .iter()
        .map(|(&c, v)| {
            let mut best = 0;
            for (i, &n) in v.iter().enumerate() {
                if n > v[best] {
                    best = i;
                }
            }
            (c, best)
        })
        .collect();
    let mut preds = Vec::new();
    for doc in test {
        for link in &doc.tlinks {
            if let Some(&m) = majority.get(&link.category) {
                preds.push(Prediction {
                    category: link.category,
                    gold: labels.index_of(&link.relation)?,
                    predicted: m,
                });
            }
        }
    }
    Ok(preds)
}

/// Scores [`majority_predictions`]; each category's score is the test
/// frequency of its training majority label.
pub fn majority_vote(train: &[&Document], test: &[&Document], labels: &LabelSet, split: &str) -> Result<EvalReport> {
    let preds = majority_predictions(train, test, labels)?;
    Ok(EvalReport::from_predictions(&preds, "majority", split, &[]))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, crate::math::sqrt(var))
}

/// Arithmetic mean over runs, with population standard deviation and the
/// per-run values.
pub fn run_average(reports: &[EvalReport]) -> Result<EvalReport> {
    let first = reports.first().ok_or_else(|| Error::Report("no reports to average".into()))?;
    for r in reports {
        if r.per_category.keys().ne(first.per_category.keys()) {
            return Err(Error::Report("reports cover different categories".into()));
        }
    }
    let mut out = first.clone();
    out.seeds = reports.iter().flat_map(|r| r.seeds.iter().copied()).collect();
    out.stddev.clear();
    out.per_seed.clear();
    for &c in first.per_category.keys() {
        let values: Vec<f64> = reports.iter().map(|r| r.per_category[&c]).collect();
        let (mean, std) = mean_std(&values);
        out.per_category.insert(c, mean);
        out.stddev.insert(c, std);
        out.per_seed.insert(c, values);
    }
    let overall: Vec<f64> = reports.iter().map(|r| r.overall).collect();
    let (mean, std) = mean_std(&overall);
    out.overall = mean;
    out.overall_stddev = Some(std);
    Ok(out)
}

/// Local / Multi / SEC comparison over one split and seed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub split: String,
    pub seeds: Vec<u64>,
    pub categories: Vec<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majority: Option<EvalReport>,
    pub local: EvalReport,
    pub multi: EvalReport,
    pub sec: EvalReport,
    /// Percentage-point gain over Local, per category.
    pub multi_delta: BTreeMap<Category, f64>,
    pub sec_delta: BTreeMap<Category, f64>,
}

pub fn ablation_report(
    local: &EvalReport,
    multi: &EvalReport,
    sec: &EvalReport,
    majority: Option<&EvalReport>,
) -> Result<AblationReport> {
    for r in [multi, sec] {
        if r.split != local.split {
            return Err(Error::Report(format!("split `{}` differs from `{}`", r.split, local.split)));
        }
        if r.seeds != local.seeds {
            return Err(Error::Report("reports use different seeds".into()));
        }
    }
    let categories: Vec<Category> = Category::ALL
        .into_iter()
        .filter(|c| [local, multi, sec].iter().any(|r| r.per_category.contains_key(c)))
        .collect();
    let delta = |r: &EvalReport| -> BTreeMap<Category, f64> {
        categories
            .iter()
            .filter_map(|&c| Some((c, 100.0 * (r.f1(c)? - local.f1(c)?))))
            .collect()
    };
    Ok(AblationReport {
        split: local.split.clone(),
        seeds: local.seeds.clone(),
        categories: categories.clone(),
        majority: majority.cloned(),
        multi_delta: delta(multi),
        sec_delta: delta(sec),
        local: local.clone(),
        multi: multi.clone(),
        sec: sec.clone(),
    })
}

impl AblationReport {
    /// Fixed-width table grouped as local / local + multi-category /
    /// global + multi-category, scores in percent.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<32}", "Models");
        for c in &self.categories {
            let _ = write!(s, "{:>8}", c.as_str());
        }
        let _ = write!(s, "{:>9}", "overall");
        s.push('\n');
        let width = 32 + 8 * self.categories.len() + 9;
        s.push_str(&"-".repeat(width));
        s.push('\n');
        let row = |s: &mut String, name: &str, r: &EvalReport| {
            let _ = write!(s, "{name:<32}");
            for c in &self.categories {
                match r.f1(*c) {
                    Some(v) => {
                        let _ = write!(s, "{:>8.1}", 100.0 * v);
                    }
                    None => {
                        let _ = write!(s, "{:>8}", "-");
                    }
                }
            }
            let _ = writeln!(s, "{:>9.1}", 100.0 * r.overall);
        };
        let delta_row = |s: &mut String, d: &BTreeMap<Category, f64>| {
            let _ = write!(s, "{:<32}", "    delta vs Local");
            for c in &self.categories {
                match d.get(c) {
                    Some(v) => {
                        let v = if libm::fabs(*v) < 0.05 { 0.0 } else { *v };
                        let _ = write!(s, "{:>+8.1}", v);
                    }
                    None => {
                        let _ = write!(s, "{:>8}", "-");
                    }
                }
            }
            s.push('\n');
        };
        if let Some(m) = &self.majority {
            row(&mut s, "Majority Vote", m);
        }
        s.push_str("local Models\n");
        row(&mut s, "  Local", &self.local);
        s.push_str("local + multi-category Models\n");
        row(&mut s, "  Multi", &self.multi);
        delta_row(&mut s, &self.multi_delta);
        s.push_str("global + multi-category Models\n");
        row(&mut s, "  SEC", &self.sec);
        delta_row(&mut s, &self.sec_delta);
        s
    }
}
