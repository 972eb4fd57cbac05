//! Training loops for SEC and the pair-local baselines, freeze schedules,
//! single-category batching and k selection.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::{build_sect_chains, SectChain};
use crate::corpus::{Document, Split};
use crate::encoder::{EncoderConfig, Pooling, Vocab};
use crate::eval::{collect_predictions, evaluate, run_average, EvalOptions, EvalReport};
use crate::model::{LossReduction, Model, ModelConfig, ModelKind, Unit, UpperHiddenInit};
use crate::optim::{AdamW, AdamWConfig};
use crate::{Category, Error, LabelSet, Result};

/// Candidate values of k when it is selected on dev.
pub const AUTO_K: [usize; 3] = [3, 4, 5];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    NoFreeze,
    Freeze,
    FreezeAfterK,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::NoFreeze => "no-freeze",
            Strategy::Freeze => "freeze",
            Strategy::FreezeAfterK => "freeze-after-k",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-freeze" => Ok(Strategy::NoFreeze),
            "freeze" => Ok(Strategy::Freeze),
            "freeze-after-k" => Ok(Strategy::FreezeAfterK),
            _ => Err(Error::Config(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Number of fine-tuning epochs before the encoder freezes. Serialized as
/// an integer or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KRepr", into = "KRepr")]
pub enum KChoice {
    Fixed(usize),
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRepr {
    Number(usize),
    Text(String),
}

impl TryFrom<KRepr> for KChoice {
    type Error = Error;

    fn try_from(r: KRepr) -> Result<Self> {
        match r {
            KRepr::Number(n) => Ok(KChoice::Fixed(n)),
            KRepr::Text(s) => s.parse(),
        }
    }
}

impl From<KChoice> for KRepr {
    fn from(k: KChoice) -> Self {
        match k {
            KChoice::Fixed(n) => KRepr::Number(n),
            KChoice::Auto => KRepr::Text("auto".into()),
        }
    }
}

impl FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(KChoice::Auto);
        }
        s.parse()
            .map(KChoice::Fixed)
            .map_err(|_| Error::Config(format!("k must be an integer or `auto`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub strategy: Strategy,
    pub k: KChoice,
    /// Epochs for SEC.
    pub epochs: usize,
    /// Epochs for the Local and Multi baselines.
    pub fine_tune_epochs: usize,
    pub chains_per_batch: usize,
    pub pairs_per_batch: usize,
    pub optimizer: AdamWConfig,
    pub seeds: Vec<u64>,
    pub dim: usize,
    pub dropout: f64,
    pub loss: LossReduction,
    pub gru_layers: usize,
    pub upper_hidden_init: UpperHiddenInit,
    pub pooling: Pooling,
    /// Categories with heads; all categories present in the corpus when empty.
    pub categories: Vec<Category>,
    pub invert_links: bool,
    /// Score mirrored links in the loss and in evaluation.
    pub include_derived: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model_kind: ModelKind::Sec,
            strategy: Strategy::NoFreeze,
            k: KChoice::Fixed(3),
            epochs: 20,
            fine_tune_epochs: 5,
            chains_per_batch: 4,
            pairs_per_batch: 16,
            optimizer: AdamWConfig::default(),
            seeds: (0..5).collect(),
            dim: 32,
            dropout: 0.1,
            loss: LossReduction::Sum,
            gru_layers: 2,
            upper_hidden_init: UpperHiddenInit::Anchor,
            pooling: Pooling::Sum,
            categories: Vec::new(),
            invert_links: false,
            include_derived: false,
        }
    }
}

impl TrainConfig {
    /// Epoch budget for the configured model kind.
    pub fn effective_epochs(&self) -> usize {
        match self.model_kind {
            ModelKind::Sec => self.epochs,
            _ => self.fine_tune_epochs,
        }
    }

    pub fn batch_size(&self) -> usize {
        match self.model_kind {
            ModelKind::Sec => self.chains_per_batch,
            _ => self.pairs_per_batch,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            invert_links: self.invert_links && self.model_kind == ModelKind::Sec,
            include_derived: self.include_derived,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let epochs = self.effective_epochs();
        if epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size() == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if self.strategy == Strategy::FreezeAfterK {
            let ks: Vec<usize> = match self.k {
                KChoice::Fixed(k) => alloc::vec![k],
                KChoice::Auto => AUTO_K.to_vec(),
            };
            if let Some(&k) = ks.iter().find(|&&k| k > epochs) {
                return Err(Error::Config(format!("k = {k} exceeds {epochs} epochs")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// Model configuration for `categories` under these settings.
    pub fn model_config(&self, categories: &[Category]) -> ModelConfig {
        let cats = if self.categories.is_empty() { categories } else { &self.categories };
        ModelConfig {
            kind: self.model_kind,
            encoder: EncoderConfig {
                pooling: self.pooling,
                ..EncoderConfig::toy(self.dim)
            },
            categories: cats.to_vec(),
            gru_layers: self.gru_layers,
            upper_hidden_init: self.upper_hidden_init,
            loss: self.loss,
            dropout: self.dropout,
        }
    }
}

/// Dev scores after one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub epoch: usize,
    pub strategy: String,
    pub dev_micro_f1: BTreeMap<Category, f64>,
    pub dev_micro_f1_overall: f64,
    pub encoder_frozen: bool,
    pub train_loss: f64,
    /// [`Model::encoder_fingerprint`] at the end of the epoch.
    pub encoder_hash: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best overall dev micro-F1, or the
    /// final parameters when there is no dev data.
    pub model: Model,
    pub records: Vec<TrainRecord>,
    pub best_epoch: usize,
    /// k actually used under freeze-after-k.
    pub k: Option<usize>,
}

impl TrainOutcome {
    pub fn best_dev(&self) -> f64 {
        self.records
            .iter()
            .find(|r| r.epoch == self.best_epoch)
            .map_or(0.0, |r| r.dev_micro_f1_overall)
    }
}

/// Index batches in which every batch holds one category. Items are
/// shuffled within each category and batch order is shuffled across
/// categories.
pub fn multi_category_batches<T, F, R>(items: &[T], category_of: F, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>>
where
    F: Fn(&T) -> Category,
    R: rand::Rng + ?Sized,
{
    let batch_size = batch_size.max(1);
    let mut groups: BTreeMap<Category, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        groups.entry(category_of(item)).or_default().push(i);
    }
    let mut batches = Vec::new();
    for (_, mut idx) in groups {
        idx.shuffle(rng);
        batches.extend(idx.chunks(batch_size).map(<[usize]>::to_vec));
    }
    batches.shuffle(rng);
    batches
}

/// Picks the k with the highest dev score; ties go to the smaller k.
pub fn select_k(dev_scores: &BTreeMap<usize, f64>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in AUTO_K {
        let score = *dev_scores
            .get(&k)
            .ok_or_else(|| Error::Config(format!("no dev curve for k = {k}")))?;
        if best.map_or(true, |(_, b)| score > b) {
            best = Some((k, score));
        }
    }
    Ok(best.expect("AUTO_K is non-empty").0)
}

enum Item {
    Chain(usize, SectChain),
    Pair(usize, usize),
}

fn training_items(docs: &[&Document], labels: &LabelSet, cfg: &TrainConfig) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        match cfg.model_kind {
            ModelKind::Sec => {
                for chain in build_sect_chains(doc, labels, cfg.invert_links)? {
                    items.push(Item::Chain(d, chain));
                }
            }
            _ => items.extend((0..doc.tlinks.len()).map(|l| Item::Pair(d, l))),
        }
    }
    Ok(items)
}

/// Trains `model` on `split.train`, scoring `split.dev` after every epoch.
///
/// The freeze schedule uses a fixed k; see [`fit`] for k selection.
pub fn train(mut model: Model, docs: &[Document], split: &Split, cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    cfg.validate()?;
    let k = match (cfg.strategy, cfg.k) {
        (Strategy::FreezeAfterK, KChoice::Fixed(k)) => Some(k),
        (Strategy::FreezeAfterK, KChoice::Auto) => {
            return Err(Error::Config("train needs a fixed k; use fit for k = auto".into()))
        }
        _ => None,
    };
    let train_docs = Split::select(docs, &split.train);
    let dev_docs = Split::select(docs, &split.dev);
    let items = training_items(&train_docs, &model.labels, cfg)?;
    if items.is_empty() {
        return Err(Error::Split("training split has no links".into()));
    }

    model.config.dropout = cfg.dropout;
    let mut order_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(seed);
    dropout_rng.set_stream(1);
    let mut optimizer = AdamW::new(cfg.optimizer.clone(), &model);
    let opts = cfg.eval_options();
    let mut records = Vec::new();
    let mut best: Option<(f64, usize, Model)> = None;

    for epoch in 1..=cfg.effective_epochs() {
        let frozen = match cfg.strategy {
            Strategy::NoFreeze => false,
            Strategy::Freeze => true,
            Strategy::FreezeAfterK => epoch > k.expect("k is set"),
        };
        model.set_frozen(frozen);

        let batches: Vec<Vec<usize>> = match cfg.model_kind {
            ModelKind::Sec => {
                let mut idx: Vec<usize> = (0..items.len()).collect();
                idx.shuffle(&mut order_rng);
                idx.chunks(cfg.chains_per_batch).map(<[usize]>::to_vec).collect()
            }
            _ => multi_category_batches(
                &items,
                |item| match item {
                    Item::Pair(d, l) => train_docs[*d].tlinks[*l].category,
                    Item::Chain(..) => unreachable!("pair models train on pairs"),
                },
                cfg.pairs_per_batch,
                &mut order_rng,
            ),
        };

        let mut epoch_loss = 0.0;
        for (b, batch) in batches.iter().enumerate() {
            let units: Vec<(&Document, Unit<'_>)> = batch
                .iter()
                .map(|&i| match &items[i] {
                    Item::Chain(d, chain) => (train_docs[*d], Unit::Chain(chain)),
                    Item::Pair(d, l) => (train_docs[*d], Unit::Pair(&train_docs[*d].tlinks[*l])),
                })
                .collect();
            let mut grads = model.zeros_like();
            let loss = model.loss_and_grad(&units, cfg.include_derived, Some(&mut dropout_rng), &mut grads)?;
            if !loss.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b + 1,
                    detail: format!("{:?}", loss.per_category),
                });
            }
            epoch_loss += loss.total;
            optimizer.step(&mut model, &grads);
        }

        let report = evaluate(&model, &dev_docs, opts, "dev", &[seed])?;
        records.push(TrainRecord {
            epoch,
            strategy: cfg.strategy.as_str().to_string(),
            dev_micro_f1: report.per_category.clone(),
            dev_micro_f1_overall: report.overall,
            encoder_frozen: frozen,
            train_loss: epoch_loss,
            encoder_hash: model.encoder_fingerprint(),
        });
        if !dev_docs.is_empty() && best.as_ref().map_or(true, |(score, _, _)| report.overall > *score) {
            best = Some((report.overall, epoch, model.clone()));
        }
    }

    let last = records.len();
    let (best_epoch, model) = match best {
        Some((_, epoch, m)) => (epoch, m),
        None => (last, model),
    };
    Ok(TrainOutcome {
        model,
        records,
        best_epoch,
        k,
    })
}

/// Category set observed in `docs`, in canonical order.
pub fn corpus_categories<'a, I: IntoIterator<Item = &'a Document>>(docs: I) -> Vec<Category> {
    let mut seen = [false; 4];
    for doc in docs {
        for link in &doc.tlinks {
            seen[Category::ALL.iter().position(|&c| c == link.category).expect("known category")] = true;
        }
    }
    Category::ALL.into_iter().zip(seen).filter(|&(_, s)| s).map(|(c, _)| c).collect()
}

/// Builds a fresh model for `seed` and trains it. With `k = auto`, trains
/// once per candidate k and keeps the run chosen by [`select_k`].
pub fn fit(docs: &[Document], split: &Split, labels: &LabelSet, cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_docs = Split::select(docs, &split.train);
    let vocab = Vocab::from_documents(train_docs.iter().copied());
    let model_config = cfg.model_config(&corpus_categories(docs.iter()));
    let build = || Model::new(model_config.clone(), labels.clone(), vocab.clone(), seed);
    if cfg.strategy == Strategy::FreezeAfterK && cfg.k == KChoice::Auto {
        let mut runs = BTreeMap::new();
        for k in AUTO_K {
            let run_cfg = TrainConfig {
                k: KChoice::Fixed(k),
                ..cfg.clone()
            };
            runs.insert(k, train(build()?, docs, split, &run_cfg, seed)?);
        }
        let scores = runs.iter().map(|(&k, o)| (k, o.best_dev())).collect();
        let k = select_k(&scores)?;
        return Ok(runs.remove(&k).expect("selected k was trained"));
    }
    train(build()?, docs, split, cfg, seed)
}

/// How per-fold test scores combine into one report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldReduction {
    /// Micro-F1 over test predictions pooled across folds.
    #[default]
    Pooled,
    /// Mean of per-fold micro-F1.
    Average,
}

/// Every fold of one seed, plus the combined test report.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub folds: Vec<TrainOutcome>,
    pub report: EvalReport,
}

/// Fits one model per (seed, fold) and scores each seed on the test folds.
pub fn run_experiment(
    docs: &[Document],
    splits: &[Split],
    labels: &LabelSet,
    cfg: &TrainConfig,
    split_id: &str,
    reduction: FoldReduction,
) -> Result<Vec<SeedRun>> {
    if splits.is_empty() {
        return Err(Error::Split("no splits to run".into()));
    }
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let mut folds = Vec::with_capacity(splits.len());
        let mut pooled = Vec::new();
        let mut fold_reports = Vec::new();
        for split in splits {
            let outcome = fit(docs, split, labels, cfg, seed)?;
            let test = Split::select(docs, &split.test);
            let preds = collect_predictions(&outcome.model, &test, cfg.eval_options())?;
            fold_reports.push(EvalReport::from_predictions(&preds, cfg.model_kind.as_str(), split_id, &[seed]));
            pooled.extend(preds);
            folds.push(outcome);
        }
        let report = match reduction {
            FoldReduction::Pooled => EvalReport::from_predictions(&pooled, cfg.model_kind.as_str(), split_id, &[seed]),
            FoldReduction::Average => {
                let mut r = run_average(&fold_reports)?;
                r.seeds = alloc::vec![seed];
                r.support = EvalReport::from_predictions(&pooled, "", "", &[]).support;
                r.stddev.clear();
                r.per_seed.clear();
                r.overall_stddev = None;
                r
            }
        };
        runs.push(SeedRun { seed, folds, report });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SynthSpec};
    use alloc::vec;

    fn small_setup() -> (Vec<Document>, Split) {
        let docs = generate_synthetic_corpus(&SynthSpec::new(12, 2, 7)).unwrap();
        let split = Split {
            train: (0..8).collect(),
            dev: (8..10).collect(),
            test: (10..12).collect(),
        };
        (docs, split)
    }

    fn quick(kind: ModelKind, strategy: Strategy) -> TrainConfig {
        TrainConfig {
            model_kind: kind,
            strategy,
            epochs: 5,
            fine_tune_epochs: 5,
            dim: 6,
            dropout: 0.0,
            optimizer: AdamWConfig {
                lr: 1e-2,
                ..AdamWConfig::default()
            },
            seeds: vec![0],
            ..TrainConfig::default()
        }
    }

    #[test]
    fn defaults_match_reference_settings() {
        let c = TrainConfig::default();
        assert_eq!((c.epochs, c.chains_per_batch, c.pairs_per_batch, c.fine_tune_epochs), (20, 4, 16, 5));
        assert_eq!(c.optimizer.lr, 5e-5);
        assert_eq!(c.seeds.len(), 5);
    }

    #[test]
    fn k_larger_than_epochs_is_rejected() {
        let mut c = quick(ModelKind::Sec, Strategy::FreezeAfterK);
        c.k = KChoice::Fixed(6);
        assert!(c.validate().is_err());
        c.epochs = 2;
        c.k = KChoice::Auto;
        assert!(c.validate().is_err());
    }

    #[test]
    fn k_choice_parses() {
        assert_eq!("auto".parse::<KChoice>().unwrap(), KChoice::Auto);
        assert_eq!("4".parse::<KChoice>().unwrap(), KChoice::Fixed(4));
        assert!("four".parse::<KChoice>().is_err());
    }

    #[test]
    fn select_k_examples() {
        let m = |v: [f64; 3]| AUTO_K.into_iter().zip(v).collect::<BTreeMap<_, _>>();
        assert_eq!(select_k(&m([0.50, 0.55, 0.53])).unwrap(), 4);
        assert_eq!(select_k(&m([0.55, 0.55, 0.50])).unwrap(), 3);
        assert_eq!(select_k(&m([0.5, 0.5, 0.5])).unwrap(), 3);
        let mut missing = m([0.5, 0.6, 0.7]);
        missing.remove(&5);
        assert!(select_k(&missing).is_err());
    }

    #[test]
    fn batches_are_category_pure_and_cover_every_item() {
        let mut items = vec![Category::E2D; 10];
        items.extend([Category::E2T; 10]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batches = multi_category_batches(&items, |c| *c, 16, &mut rng);
        assert!(batches.len() >= 2);
        for b in &batches {
            assert!(b.iter().all(|&i| items[i] == items[b[0]]));
        }
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());

        let only = vec![Category::E2E; 7];
        let batches = multi_category_batches(&only, |c| *c, 3, &mut rng);
        assert!(batches.iter().flatten().all(|&i| only[i] == Category::E2E));
    }

    #[test]
    fn freeze_after_k_schedule() {
        let (docs, split) = small_setup();
        let mut cfg = quick(ModelKind::Sec, Strategy::FreezeAfterK);
        cfg.k = KChoice::Fixed(3);
        let out = fit(&docs, &split, &LabelSet::default(), &cfg, 0).unwrap();
        let flags: Vec<bool> = out.records.iter().map(|r| r.encoder_frozen).collect();
        assert_eq!(flags, [false, false, false, true, true]);
        assert_eq!(out.k, Some(3));
    }

    #[test]
    fn freeze_keeps_encoder_bitwise() {
        let (docs, split) = small_setup();
        let cfg = quick(ModelKind::Sec, Strategy::Freeze);
        let labels = LabelSet::default();
        let vocab = Vocab::from_documents(Split::select(&docs, &split.train));
        let model = Model::new(cfg.model_config(&corpus_categories(&docs)), labels, vocab, 0).unwrap();
        let before = model.encoder_fingerprint();
        let out = train(model, &docs, &split, &cfg, 0).unwrap();
        assert_eq!(out.model.encoder_fingerprint(), before);
        assert!(out.records.iter().all(|r| r.encoder_hash == before));
    }

    #[test]
    fn same_seed_same_records() {
        let (docs, split) = small_setup();
        for kind in [ModelKind::Sec, ModelKind::Multi] {
            let mut cfg = quick(kind, Strategy::NoFreeze);
            cfg.dropout = 0.1;
            let a = fit(&docs, &split, &LabelSet::default(), &cfg, 4).unwrap();
            let b = fit(&docs, &split, &LabelSet::default(), &cfg, 4).unwrap();
            assert_eq!(a.records, b.records);
            assert_eq!(a.model.fingerprint(), b.model.fingerprint());
        }
    }

    #[test]
    fn empty_training_split_is_an_error() {
        let (docs, _) = small_setup();
        let split = Split {
            train: vec![],
            dev: vec![0],
            test: vec![1],
        };
        let cfg = quick(ModelKind::Sec, Strategy::NoFreeze);
        assert!(fit(&docs, &split, &LabelSet::default(), &cfg, 0).is_err());
    }

    #[test]
    fn best_checkpoint_matches_its_record() {
        let (docs, split) = small_setup();
        let cfg = quick(ModelKind::Sec, Strategy::NoFreeze);
        let out = fit(&docs, &split, &LabelSet::default(), &cfg, 1).unwrap();
        let dev = Split::select(&docs, &split.dev);
        let report = evaluate(&out.model, &dev, cfg.eval_options(), "dev", &[1]).unwrap();
        assert_eq!(report.overall, out.best_dev());
        assert!(out.records.iter().all(|r| r.dev_micro_f1_overall <= out.best_dev()));
    }

    #[test]
    fn nan_loss_aborts_with_location() {
        let (docs, split) = small_setup();
        let cfg = quick(ModelKind::Sec, Strategy::NoFreeze);
        let vocab = Vocab::from_documents(Split::select(&docs, &split.train));
        let mut model = Model::new(cfg.model_config(&corpus_categories(&docs)), LabelSet::default(), vocab, 0).unwrap();
        model.heads.values_mut().next().unwrap().bias.fill(f64::NAN);
        match train(model, &docs, &split, &cfg, 0) {
            Err(Error::NonFiniteLoss { epoch, batch, .. }) => assert_eq!((epoch, batch), (1, 1)),
            other => panic!("expected a non-finite loss error, got {other:?}"),
        }
    }

    #[test]
    fn pooled_experiment_covers_every_test_fold() {
        let docs = generate_synthetic_corpus(&SynthSpec::new(10, 2, 3)).unwrap();
        let splits = crate::corpus::split_corpus(&docs, &crate::corpus::SplitSpec::cross_validation(2, 0.2, 0), None).unwrap();
        let mut cfg = quick(ModelKind::Multi, Strategy::NoFreeze);
        cfg.fine_tune_epochs = 1;
        cfg.seeds = vec![0, 1];
        let runs = run_experiment(&docs, &splits, &LabelSet::default(), &cfg, "cv", FoldReduction::Pooled).unwrap();
        assert_eq!(runs.len(), 2);
        let links: usize = docs.iter().map(|d| d.tlinks.len()).sum();
        for run in &runs {
            assert_eq!(run.folds.len(), 2);
            assert_eq!(run.report.support.values().sum::<usize>(), links);
        }
        let avg = run_experiment(&docs, &splits, &LabelSet::default(), &cfg, "cv", FoldReduction::Average).unwrap();
        assert_eq!(avg[0].report.support, runs[0].report.support);
    }
}
