//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sect_core::chains::build_sect_chains;
use sect_core::corpus::{
    corpus_stats, generate_synthetic_corpus, split_corpus, Document, Split, SplitSpec, SynthSpec,
};
use sect_core::eval::{ablation_report, evaluate, majority_predictions, EvalReport};
use sect_core::model::{ModelKind, Prediction};
use sect_core::train::{FoldReduction, KChoice, Strategy, TrainConfig};
use sect_core::LabelSet;

use crate::checkpoint::load_checkpoint;
use crate::error::{ErrorKind, Result, SectError};
use crate::io::{load_corpus, load_label_set, load_split_manifest, read_json, save_corpus, sha256_file, write_json, write_text};
use crate::run::{run_and_save, RunManifest, SplitSource};
use crate::curves::{curves_csv, find_run_records};

#[derive(Debug, Parser)]
#[command(name = "sect", version, about = "Source-event-centric temporal relation classification")]
pub struct Cli {
    /// Label-set JSON file; the six dense labels by default.
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a JSON Lines corpus.
    Validate { corpus: PathBuf },
    /// Link counts per category and mean chain length.
    Stats { corpus: PathBuf },
    /// Print SECT chains in canonical order.
    Chains {
        corpus: PathBuf,
        /// Mirror event-event links into the target's chain.
        #[arg(long)]
        invert: bool,
    },
    /// Generate a synthetic corpus from a spec file.
    Synth {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train one model kind over seeds and folds.
    Train {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Fine-tuning epochs before freezing, or `auto`.
        #[arg(long)]
        k: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a checkpoint on one part of a split.
    Eval {
        checkpoint: PathBuf,
        corpus: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        part: PartArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train Local, Multi and SEC and write the comparison table.
    Ablate {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long)]
        k: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Average the dev curves of every run under a directory.
    Curves {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON file with training settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of seeds, counted up from the root seed.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Root seed for splits and runs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Split manifest; cross-validation when absent.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.15)]
    pub dev_fraction: f64,
    /// Average per-fold scores instead of pooling predictions.
    #[arg(long)]
    pub fold_average: bool,
    #[arg(long)]
    pub dim: Option<usize>,
    /// SEC epochs; the baselines use `fine_tune_epochs` from the config.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Sec,
    Local,
    Multi,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Sec => ModelKind::Sec,
            ModelArg::Local => ModelKind::Local,
            ModelArg::Multi => ModelKind::Multi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    NoFreeze,
    Freeze,
    FreezeAfterK,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::NoFreeze => Strategy::NoFreeze,
            StrategyArg::Freeze => Strategy::Freeze,
            StrategyArg::FreezeAfterK => Strategy::FreezeAfterK,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartArg {
    Train,
    Dev,
    Test,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{e}");
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "{}: {first}", ErrorKind::Usage.prefix());
            return ErrorKind::Usage.exit_code();
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let kind = e.kind();
            let _ = writeln!(err, "{}: {e}", kind.prefix());
            kind.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let labels = load_label_set(cli.labels.as_deref())?;
    let w = |out: &mut dyn Write, text: &str| out.write_all(text.as_bytes()).map_err(|e| SectError::io("<stdout>", e));
    match cli.command {
        Command::Validate { corpus } => {
            let docs = load_corpus(&corpus, &labels)?;
            let links: usize = docs.iter().map(|d| d.tlinks.len()).sum();
            w(out, &format!("ok {} documents, {links} links\n", docs.len()))
        }
        Command::Stats { corpus } => {
            let docs = load_corpus(&corpus, &labels)?;
            w(out, &format!("{}\n", corpus_stats(&docs)))
        }
        Command::Chains { corpus, invert } => {
            let docs = load_corpus(&corpus, &labels)?;
            let mut text = String::new();
            for doc in &docs {
                for chain in build_sect_chains(doc, &labels, invert)? {
                    text.push_str(&format!("{}\t{}", chain.doc_id, chain.source));
                    for step in &chain.steps {
                        let mark = if step.derived { "*" } else { "" };
                        text.push_str(&format!("\t{}:{}:{}{mark}", step.link.target, step.link.category, step.link.relation));
                    }
                    text.push('\n');
                }
            }
            w(out, &text)
        }
        Command::Synth { spec, output } => {
            let spec: SynthSpec = read_json(&spec)?;
            let docs = generate_synthetic_corpus(&spec)?;
            save_corpus(&output, &docs)?;
            w(out, &format!("wrote {} documents to {}\n", docs.len(), output.display()))
        }
        Command::Train {
            corpus,
            model,
            strategy,
            k,
            output,
            run,
        } => {
            let mut cfg = base_config(&run, strategy, k.as_deref())?;
            if let Some(m) = model {
                cfg.model_kind = m.into();
            }
            let setup = Setup::new(&corpus, &labels, &run, cfg)?;
            let result = run_and_save(
                &output,
                &setup.docs,
                &setup.splits,
                &labels,
                &setup.cfg,
                &setup.split_id,
                setup.reduction,
            )?;
            let mut outputs = setup.write_splits(&output)?;
            outputs.extend(result.outputs);
            setup.manifest("train", &labels, outputs).write(&output)?;
            w(out, &report_line(&result.report))
        }
        Command::Eval {
            checkpoint,
            corpus,
            split,
            part,
            output,
        } => {
            let (model, manifest) = load_checkpoint(&checkpoint)?;
            let docs = load_corpus(&corpus, &model.labels)?;
            let split = Split::from_manifest(&docs, &load_split_manifest(&split)?)?;
            let idx = match part {
                PartArg::Train => &split.train,
                PartArg::Dev => &split.dev,
                PartArg::Test => &split.test,
            };
            let opts = manifest.train_config.as_ref().map(TrainConfig::eval_options).unwrap_or_default();
            let part_name = format!("{part:?}").to_lowercase();
            let report = evaluate(&model, &Split::select(&docs, idx), opts, &part_name, &[manifest.seed])?;
            if let Some(path) = output {
                write_json(&path, &report)?;
            }
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            w(out, &format!("{text}\n"))
        }
        Command::Ablate {
            corpus,
            strategy,
            k,
            output,
            run,
        } => {
            let cfg = base_config(&run, strategy, k.as_deref())?;
            let setup = Setup::new(&corpus, &labels, &run, cfg)?;
            let mut outputs = setup.write_splits(&output)?;
            let mut reports = Vec::new();
            for kind in [ModelKind::Local, ModelKind::Multi, ModelKind::Sec] {
                let cfg = TrainConfig {
                    model_kind: kind,
                    ..setup.cfg.clone()
                };
                let dir = output.join(kind.as_str());
                let result = run_and_save(&dir, &setup.docs, &setup.splits, &labels, &cfg, &setup.split_id, setup.reduction)?;
                let sub = Setup { cfg, ..setup.clone() };
                sub.manifest("train", &labels, result.outputs.clone()).write(&dir)?;
                outputs.extend(result.outputs.iter().map(|o| format!("{}/{o}", kind.as_str())));
                reports.push(result.report);
            }
            let majority = setup.majority(&labels)?;
            let table = ablation_report(&reports[0], &reports[1], &reports[2], Some(&majority))?;
            write_json(&output.join("ablation.json"), &table)?;
            let text = table.render();
            write_text(&output.join("ablation.txt"), &text)?;
            outputs.push("ablation.json".into());
            outputs.push("ablation.txt".into());
            setup.manifest("ablate", &labels, outputs).write(&output)?;
            w(out, &text)
        }
        Command::Curves { dir, output } => {
            let runs = find_run_records(&dir)?;
            if runs.is_empty() {
                return Err(SectError::Usage(format!("no training records under {}", dir.display())));
            }
            write_text(&output, &curves_csv(&runs))?;
            w(out, &format!("wrote {} runs to {}\n", runs.len(), output.display()))
        }
    }
}

fn report_line(r: &EvalReport) -> String {
    let mut s = format!("{} test micro-F1 {:.4}", r.model_kind, r.overall);
    for (c, v) in &r.per_category {
        s.push_str(&format!(" {c} {v:.4}"));
    }
    s.push('\n');
    s
}

/// Defaults, then the config file, then flags.
fn base_config(run: &RunArgs, strategy: Option<StrategyArg>, k: Option<&str>) -> Result<TrainConfig> {
    let mut cfg: TrainConfig = match &run.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = strategy {
        cfg.strategy = s.into();
    }
    if let Some(k) = k {
        cfg.k = k.parse::<KChoice>().map_err(|e| SectError::Usage(e.to_string()))?;
    }
    let root = run.seed.unwrap_or_else(|| cfg.seeds.first().copied().unwrap_or(0));
    if let Some(n) = run.seeds {
        cfg.seeds = (0..n as u64).map(|i| root + i).collect();
    } else if run.seed.is_some() {
        cfg.seeds = (0..cfg.seeds.len() as u64).map(|i| root + i).collect();
    }
    if let Some(d) = run.dim {
        cfg.dim = d;
    }
    if let Some(e) = run.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = run.lr {
        cfg.optimizer.lr = lr;
    }
    cfg.validate().map_err(|e| SectError::Usage(e.to_string()))?;
    Ok(cfg)
}

#[derive(Clone)]
struct Setup {
    docs: Vec<Document>,
    splits: Vec<Split>,
    split_id: String,
    split_source: SplitSource,
    root_seed: u64,
    corpus: String,
    corpus_sha256: String,
    reduction: FoldReduction,
    cfg: TrainConfig,
}

impl Setup {
    fn new(corpus: &Path, labels: &LabelSet, run: &RunArgs, cfg: TrainConfig) -> Result<Self> {
        let docs = load_corpus(corpus, labels)?;
        let root_seed = cfg.seeds[0];
        let (splits, split_id, split_source) = match &run.split {
            Some(path) => {
                let manifest = load_split_manifest(path)?;
                let sha = sha256_file(path)?;
                let split = Split::from_manifest(&docs, &manifest)?;
                (
                    vec![split],
                    format!("manifest-{}", &sha[..12]),
                    SplitSource::Manifest {
                        path: path.display().to_string(),
                        sha256: sha,
                    },
                )
            }
            None => {
                let spec = SplitSpec::cross_validation(run.folds, run.dev_fraction, root_seed);
                (
                    split_corpus(&docs, &spec, None)?,
                    format!("cv{}-seed{root_seed}", run.folds),
                    SplitSource::CrossValidation {
                        folds: run.folds,
                        dev_fraction: run.dev_fraction,
                        seed: root_seed,
                    },
                )
            }
        };
        Ok(Setup {
            docs,
            splits,
            split_id,
            split_source,
            root_seed,
            corpus: corpus.display().to_string(),
            corpus_sha256: sha256_file(corpus)?,
            reduction: if run.fold_average { FoldReduction::Average } else { FoldReduction::Pooled },
            cfg,
        })
    }

    fn write_splits(&self, dir: &Path) -> Result<Vec<String>> {
        let mut outputs = Vec::new();
        for (f, split) in self.splits.iter().enumerate() {
            let rel = format!("splits/fold-{f}.json");
            write_json(&dir.join(&rel), &split.to_manifest(&self.docs))?;
            outputs.push(rel);
        }
        Ok(outputs)
    }

    fn majority(&self, labels: &LabelSet) -> Result<EvalReport> {
        let mut preds: Vec<Prediction> = Vec::new();
        for split in &self.splits {
            let train = Split::select(&self.docs, &split.train);
            let test = Split::select(&self.docs, &split.test);
            preds.extend(majority_predictions(&train, &test, labels)?);
        }
        Ok(EvalReport::from_predictions(&preds, "majority", &self.split_id, &[]))
    }

    fn manifest(&self, command: &str, labels: &LabelSet, outputs: Vec<String>) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            root_seed: self.root_seed,
            seeds: self.cfg.seeds.clone(),
            config: self.cfg.clone(),
            corpus: self.corpus.clone(),
            corpus_sha256: self.corpus_sha256.clone(),
            labels: labels.clone(),
            split: self.split_source.clone(),
            split_id: self.split_id.clone(),
            fold_reduction: self.reduction,
            outputs,
        }
    }
}
