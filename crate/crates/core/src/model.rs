//! The SEC chain model, the pair-local baselines and their losses.
//!
//! For a chain with source embedding `a` and target embeddings `x_1..x_n`:
//!
//! ```text
//! R^0 = a,  h_0 = a (every layer, or zeros above the first layer)
//! T^i = [R^{i-1}; x_i]
//! h_i = GRU(x_i, h_{i-1})
//! R^i = max(a, top(h_i))          element-wise
//! ```
//!
//! The raw hidden `h_i` is carried forward; the anchored `R^i` only feeds the
//! next TLINK embedding. Gold labels are never inputs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::SectChain;
use crate::corpus::{Document, TLink};
use crate::encoder::{DocEncoding, Encoder, EncoderConfig, Vocab};
use crate::gru::{GruStack, StackCache};
use crate::math::{log_sum_exp, softmax_in_place, Fingerprint};
use crate::tensor::{add_into, Tensor};
use crate::{Category, Error, LabelSet, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Chain model with the anchored GRU and joint category heads.
    Sec,
    /// Pair-local classifier, one independent encoder and head per category.
    Local,
    /// Pair-local classifier with one shared encoder and per-category heads.
    Multi,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Sec => "sec",
            ModelKind::Local => "local",
            ModelKind::Multi => "multi",
        }
    }
}

/// Initial hidden state of GRU layers above the first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperHiddenInit {
    #[default]
    Anchor,
    Zeros,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReduction {
    /// Sum of item cross-entropies per category, summed over categories.
    #[default]
    Sum,
    /// Per-category mean, summed over categories.
    CategoryMean,
}

fn default_layers() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub encoder: EncoderConfig,
    pub categories: Vec<Category>,
    #[serde(default = "default_layers")]
    pub gru_layers: usize,
    #[serde(default)]
    pub upper_hidden_init: UpperHiddenInit,
    #[serde(default)]
    pub loss: LossReduction,
    /// Dropout on TLINK embeddings before the heads, training only.
    #[serde(default)]
    pub dropout: f64,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, dim: usize, categories: &[Category]) -> Self {
        ModelConfig {
            kind,
            encoder: EncoderConfig::toy(dim),
            categories: categories.to_vec(),
            gru_layers: default_layers(),
            upper_hidden_init: UpperHiddenInit::Anchor,
            loss: LossReduction::Sum,
            dropout: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.encoder.dim
    }
}

/// A TLINK representation of dimension `2d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TlinkEmbedding {
    pub values: Vec<f64>,
    pub category: Category,
    /// 1-based position in the chain; 1 for pair-local embeddings.
    pub step_index: usize,
}

/// One linear layer followed by softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierHead {
    pub category: Category,
    pub weight: Tensor,
    pub bias: Tensor,
}

impl ClassifierHead {
    pub fn new<R: Rng + ?Sized>(category: Category, input: usize, labels: usize, rng: &mut R) -> Self {
        let s = 1.0 / libm::sqrt(input as f64);
        ClassifierHead {
            category,
            weight: Tensor::uniform(labels, input, s, rng),
            bias: Tensor::uniform(1, labels, s, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        ClassifierHead {
            category: self.category,
            weight: self.weight.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }

    pub fn logits(&self, t: &[f64]) -> Vec<f64> {
        let mut out = self.bias.row(0).to_vec();
        self.weight.matvec_acc(t, &mut out);
        out
    }

    /// Probability distribution over labels; the embedding category must
    /// match the head.
    pub fn score(&self, t: &TlinkEmbedding) -> Result<Vec<f64>> {
        if t.category != self.category {
            return Err(Error::MissingHead(t.category));
        }
        if t.values.len() != self.weight.cols {
            return Err(Error::Dimension {
                expected: self.weight.cols,
                got: t.values.len(),
            });
        }
        let mut p = self.logits(&t.values);
        softmax_in_place(&mut p);
        Ok(p)
    }
}

/// Dispatches `t` to the head of its category.
pub fn classify(t: &TlinkEmbedding, heads: &BTreeMap<Category, ClassifierHead>) -> Result<Vec<f64>> {
    heads.get(&t.category).ok_or(Error::MissingHead(t.category))?.score(t)
}

/// Pair-local TLINK embedding `[source; target]`.
pub fn local_forward(source: &[f64], target: &[f64], category: Category) -> Result<TlinkEmbedding> {
    if source.len() != target.len() {
        return Err(Error::Dimension {
            expected: source.len(),
            got: target.len(),
        });
    }
    let mut values = source.to_vec();
    values.extend_from_slice(target);
    Ok(TlinkEmbedding {
        values,
        category,
        step_index: 1,
    })
}

/// Forward values of one chain, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct SecTrace {
    pub anchor: Vec<f64>,
    /// `R^0..=R^n`.
    pub states: Vec<Vec<f64>>,
    /// `T^1..=T^n`.
    pub embeddings: Vec<Vec<f64>>,
    caches: Vec<StackCache>,
    init: UpperHiddenInit,
}

/// Runs the anchored recurrence over `targets`.
pub fn sec_trace(gru: &GruStack, anchor: &[f64], targets: &[&[f64]], init: UpperHiddenInit) -> SecTrace {
    let d = anchor.len();
    let mut hiddens: Vec<Vec<f64>> = (0..gru.layers.len())
        .map(|l| match (l, init) {
            (0, _) | (_, UpperHiddenInit::Anchor) => anchor.to_vec(),
            (_, UpperHiddenInit::Zeros) => vec![0.0; d],
        })
        .collect();
    let mut states = Vec::with_capacity(targets.len() + 1);
    let mut embeddings = Vec::with_capacity(targets.len());
    let mut caches = Vec::with_capacity(targets.len());
    states.push(anchor.to_vec());
    for &x in targets {
        let mut t = states.last().expect("R^0 present").clone();
        t.extend_from_slice(x);
        embeddings.push(t);
        let cache = gru.step(x, &hiddens);
        hiddens = cache.hiddens();
        let r: Vec<f64> = anchor.iter().zip(cache.top()).map(|(&a, &h)| a.max(h)).collect();
        states.push(r);
        caches.push(cache);
    }
    SecTrace {
        anchor: anchor.to_vec(),
        states,
        embeddings,
        caches,
        init,
    }
}

impl SecTrace {
    /// Backpropagates `d_embeddings[i] = ∂L/∂T^{i+1}` and returns
    /// `(∂L/∂anchor, ∂L/∂x_i)`. Ties in the max route to the anchor.
    pub fn backward(&self, gru: &GruStack, d_embeddings: &[Vec<f64>], grads: &mut GruStack) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = self.anchor.len();
        let n = self.embeddings.len();
        let layers = gru.layers.len();
        let mut d_anchor = vec![0.0; d];
        let mut d_targets: Vec<Vec<f64>> = d_embeddings.iter().map(|g| g[d..].to_vec()).collect();
        let mut d_h: Vec<Vec<f64>> = vec![vec![0.0; d]; layers];
        for i in (1..n).rev() {
            // R^i feeds T^{i+1}
            let g_r = &d_embeddings[i][..d];
            let cache = &self.caches[i - 1];
            let top = cache.top();
            for k in 0..d {
                if top[k] > self.anchor[k] {
                    d_h[layers - 1][k] += g_r[k];
                } else {
                    d_anchor[k] += g_r[k];
                }
            }
            let (dx, d_prev) = gru.backward_step(cache, d_h, grads);
            add_into(&dx, &mut d_targets[i - 1]);
            d_h = d_prev;
        }
        if n > 0 {
            add_into(&d_embeddings[0][..d], &mut d_anchor);
        }
        for (l, g) in d_h.iter().enumerate() {
            if l == 0 || self.init == UpperHiddenInit::Anchor {
                add_into(g, &mut d_anchor);
            }
        }
        (d_anchor, d_targets)
    }
}

/// Total loss plus its per-category components.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub per_category: BTreeMap<Category, f64>,
    pub items: BTreeMap<Category, usize>,
}

impl LossBreakdown {
    fn empty(categories: impl Iterator<Item = Category>) -> Self {
        let per_category: BTreeMap<Category, f64> = categories.map(|c| (c, 0.0)).collect();
        let items = per_category.keys().map(|&c| (c, 0)).collect();
        LossBreakdown {
            total: 0.0,
            per_category,
            items,
        }
    }

    pub fn component(&self, category: Category) -> f64 {
        self.per_category.get(&category).copied().unwrap_or(0.0)
    }

    fn add(&mut self, category: Category, loss: f64) {
        *self.per_category.entry(category).or_default() += loss;
        *self.items.entry(category).or_default() += 1;
    }

    fn finish(&mut self, reduction: LossReduction) {
        if reduction == LossReduction::CategoryMean {
            for (c, v) in self.per_category.iter_mut() {
                let n = self.items[c];
                if n > 0 {
                    *v /= n as f64;
                }
            }
        }
        self.total = self.per_category.values().sum();
    }
}

fn cross_entropy(logits: &[f64], gold: usize) -> f64 {
    log_sum_exp(logits) - logits[gold]
}

/// Summed cross-entropy over `batch`, split by category:
/// `L = Σ_c Σ_{items of c} CE`. Categories with a head but no items report 0.
pub fn combined_loss(
    batch: &[(TlinkEmbedding, &str)],
    heads: &BTreeMap<Category, ClassifierHead>,
    labels: &LabelSet,
    reduction: LossReduction,
) -> Result<LossBreakdown> {
    let mut out = LossBreakdown::empty(heads.keys().copied());
    for (t, gold) in batch {
        let head = heads.get(&t.category).ok_or(Error::MissingHead(t.category))?;
        let gold = labels.index_of(gold)?;
        if gold >= head.weight.rows {
            return Err(Error::UnknownLabel(labels.label(gold).to_string()));
        }
        out.add(t.category, cross_entropy(&head.logits(&t.values), gold));
    }
    out.finish(reduction);
    Ok(out)
}

/// A training or evaluation unit drawn from one document.
#[derive(Debug, Clone, Copy)]
pub enum Unit<'a> {
    Chain(&'a SectChain),
    Pair(&'a TLink),
}

impl Unit<'_> {
    pub fn category(&self) -> Option<Category> {
        match self {
            Unit::Chain(_) => None,
            Unit::Pair(l) => Some(l.category),
        }
    }
}

/// Gold and predicted label of one scored link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub category: Category,
    pub gold: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub labels: LabelSet,
    /// One shared encoder, or one per category for [`ModelKind::Local`].
    pub encoders: Vec<Encoder>,
    pub gru: Option<GruStack>,
    pub heads: BTreeMap<Category, ClassifierHead>,
}

impl Model {
    pub fn new(config: ModelConfig, labels: LabelSet, vocab: Vocab, seed: u64) -> Result<Self> {
        if config.categories.is_empty() {
            return Err(Error::Config("model needs at least one category".into()));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", config.dropout)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.dim();
        let n_encoders = match config.kind {
            ModelKind::Local => config.categories.len(),
            _ => 1,
        };
        let encoders = (0..n_encoders)
            .map(|_| Encoder::new(config.encoder.clone(), vocab.clone(), &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let gru = match config.kind {
            ModelKind::Sec => {
                if config.gru_layers == 0 {
                    return Err(Error::Config("gru_layers must be positive".into()));
                }
                Some(GruStack::new(d, config.gru_layers, &mut rng))
            }
            _ => None,
        };
        let heads = config
            .categories
            .iter()
            .map(|&c| (c, ClassifierHead::new(c, 2 * d, labels.len(), &mut rng)))
            .collect();
        Ok(Model {
            config,
            labels,
            encoders,
            gru,
            heads,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Same shapes, zero values; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Model {
            config: self.config.clone(),
            labels: self.labels.clone(),
            encoders: self.encoders.iter().map(Encoder::zeros_like).collect(),
            gru: self.gru.as_ref().map(GruStack::zeros_like),
            heads: self.heads.iter().map(|(&c, h)| (c, h.zeros_like())).collect(),
        }
    }

    pub fn encoder_index(&self, category: Category) -> Result<usize> {
        match self.config.kind {
            ModelKind::Local => self
                .config
                .categories
                .iter()
                .position(|&c| c == category)
                .ok_or(Error::MissingHead(category)),
            _ => Ok(0),
        }
    }

    pub fn set_frozen(&mut self, frozen: bool) {
        self.encoders.iter_mut().for_each(|e| e.set_frozen(frozen));
    }

    pub fn encoder_frozen(&self) -> bool {
        self.encoders.iter().all(Encoder::is_frozen)
    }

    fn encoder_prefix(&self, i: usize) -> String {
        match self.config.kind {
            ModelKind::Local => format!("encoder.{}", self.config.categories[i]),
            _ => "encoder".to_string(),
        }
    }

    /// Every trainable tensor with its checkpoint name, in a fixed order.
    /// The flag marks encoder-side tensors.
    pub fn tensors(&self) -> Vec<(String, &Tensor, bool)> {
        let mut out = Vec::new();
        for (i, e) in self.encoders.iter().enumerate() {
            let prefix = self.encoder_prefix(i);
            for (name, t) in e.tensors() {
                out.push((format!("{prefix}.{name}"), t, true));
            }
        }
        if let Some(gru) = &self.gru {
            for (l, layer) in gru.layers.iter().enumerate() {
                for (name, t) in layer.tensors() {
                    out.push((format!("gru.{l}.{name}"), t, false));
                }
            }
        }
        for (c, h) in &self.heads {
            out.push((format!("head.{c}.weight"), &h.weight, false));
            out.push((format!("head.{c}.bias"), &h.bias, false));
        }
        out
    }

    /// Mutable counterpart of [`Model::tensors`]; the flag is true for
    /// encoder tensors that are currently frozen.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor, bool)> {
        let prefixes: Vec<String> = (0..self.encoders.len()).map(|i| self.encoder_prefix(i)).collect();
        let mut out = Vec::new();
        for (e, prefix) in self.encoders.iter_mut().zip(prefixes) {
            let frozen = e.is_frozen();
            for (name, t) in e.tensors_mut() {
                out.push((format!("{prefix}.{name}"), t, frozen));
            }
        }
        if let Some(gru) = &mut self.gru {
            for (l, layer) in gru.layers.iter_mut().enumerate() {
                for (name, t) in layer.tensors_mut() {
                    out.push((format!("gru.{l}.{name}"), t, false));
                }
            }
        }
        for (c, h) in self.heads.iter_mut() {
            out.push((format!("head.{c}.weight"), &mut h.weight, false));
            out.push((format!("head.{c}.bias"), &mut h.bias, false));
        }
        out
    }

    /// Hash of the raw bits of every encoder tensor.
    pub fn encoder_fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::default();
        for (_, t, is_encoder) in self.tensors() {
            if is_encoder {
                fp.update(&t.data);
            }
        }
        fp.finish()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::default();
        for (_, t, _) in self.tensors() {
            fp.update(&t.data);
        }
        fp.finish()
    }

    /// TLINK embeddings of `chain` given precomputed mention vectors (the
    /// DCT under its reserved id).
    pub fn sec_forward(&self, chain: &SectChain, mentions: &BTreeMap<String, Vec<f64>>) -> Result<Vec<TlinkEmbedding>> {
        let trace = self.sec_trace_for(chain, mentions)?;
        Ok(trace
            .embeddings
            .into_iter()
            .zip(&chain.steps)
            .enumerate()
            .map(|(i, (values, step))| TlinkEmbedding {
                values,
                category: step.link.category,
                step_index: i + 1,
            })
            .collect())
    }

    fn sec_trace_for(&self, chain: &SectChain, mentions: &BTreeMap<String, Vec<f64>>) -> Result<SecTrace> {
        let gru = self
            .gru
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} model has no chain recurrence", self.kind().as_str())))?;
        let d = self.dim();
        let lookup = |id: &str| -> Result<&[f64]> {
            let v = mentions.get(id).ok_or_else(|| Error::MissingTarget(id.to_string()))?;
            if v.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: v.len(),
                });
            }
            Ok(v.as_slice())
        };
        let anchor = lookup(&chain.source)?;
        let targets = chain.targets().map(lookup).collect::<Result<Vec<_>>>()?;
        Ok(sec_trace(gru, anchor, &targets, self.config.upper_hidden_init))
    }

    /// Chain embeddings for a document, encoding it first.
    pub fn forward_chain(&self, doc: &Document, chain: &SectChain) -> Result<Vec<TlinkEmbedding>> {
        let enc = self.encoders[0].encode_document(doc)?;
        self.sec_forward(chain, &enc.mentions)
    }

    /// Pair-local embedding of `link`, encoded by its category's encoder.
    pub fn forward_pair(&self, doc: &Document, link: &TLink) -> Result<TlinkEmbedding> {
        let enc = self.encoders[self.encoder_index(link.category)?].encode_document(doc)?;
        pair_embedding(&enc, link)
    }

    /// Predicted label index for every loss-bearing step of `unit`.
    pub fn predict(&self, doc: &Document, unit: Unit<'_>, include_derived: bool) -> Result<Vec<Prediction>> {
        let mut out = Vec::new();
        let mut emit = |t: &TlinkEmbedding, gold: &str| -> Result<()> {
            let probs = classify(t, &self.heads)?;
            let predicted = argmax(&probs);
            out.push(Prediction {
                category: t.category,
                gold: self.labels.index_of(gold)?,
                predicted,
            });
            Ok(())
        };
        match unit {
            Unit::Chain(chain) => {
                for (t, step) in self.forward_chain(doc, chain)?.iter().zip(&chain.steps) {
                    if step.derived && !include_derived {
                        continue;
                    }
                    emit(t, &step.link.relation)?;
                }
            }
            Unit::Pair(link) => emit(&self.forward_pair(doc, link)?, &link.relation)?,
        }
        Ok(out)
    }

    /// Loss of a batch and its gradient, accumulated into `grads`.
    ///
    /// Dropout is applied only when `rng` is given and the configured rate is
    /// positive. Frozen encoders receive no gradient.
    pub fn loss_and_grad(
        &self,
        batch: &[(&Document, Unit<'_>)],
        include_derived: bool,
        mut rng: Option<&mut ChaCha8Rng>,
        grads: &mut Model,
    ) -> Result<LossBreakdown> {
        let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
        for (_, unit) in batch {
            match unit {
                Unit::Chain(c) => c
                    .steps
                    .iter()
                    .filter(|s| include_derived || !s.derived)
                    .for_each(|s| *counts.entry(s.link.category).or_default() += 1),
                Unit::Pair(l) => *counts.entry(l.category).or_default() += 1,
            }
        }
        let weight = |c: Category| match self.config.loss {
            LossReduction::Sum => 1.0,
            LossReduction::CategoryMean => 1.0 / counts[&c] as f64,
        };

        let mut out = LossBreakdown::empty(self.heads.keys().copied());
        for &(doc, unit) in batch {
            let enc_index = match unit {
                Unit::Chain(_) => 0,
                Unit::Pair(l) => self.encoder_index(l.category)?,
            };
            let encoder = &self.encoders[enc_index];
            let enc = encoder.encode_document(doc)?;
            let mut mention_grads: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            match unit {
                Unit::Chain(chain) => {
                    let trace = self.sec_trace_for(chain, &enc.mentions)?;
                    let mut d_emb = Vec::with_capacity(chain.len());
                    for (t, step) in trace.embeddings.iter().zip(&chain.steps) {
                        let c = step.link.category;
                        if step.derived && !include_derived {
                            d_emb.push(vec![0.0; t.len()]);
                            continue;
                        }
                        let (loss, g) = self.head_loss_grad(t, c, &step.link.relation, weight(c), rng.as_deref_mut(), grads)?;
                        out.add(c, loss);
                        d_emb.push(g);
                    }
                    let gru = self.gru.as_ref().expect("sec model has a gru");
                    let grad_gru = grads.gru.as_mut().expect("sec gradients have a gru");
                    let (d_anchor, d_targets) = trace.backward(gru, &d_emb, grad_gru);
                    accumulate(&mut mention_grads, &chain.source, &d_anchor);
                    for (target, g) in chain.targets().zip(&d_targets) {
                        accumulate(&mut mention_grads, target, g);
                    }
                }
                Unit::Pair(link) => {
                    let t = pair_embedding(&enc, link)?;
                    let c = link.category;
                    let (loss, g) = self.head_loss_grad(&t.values, c, &link.relation, weight(c), rng.as_deref_mut(), grads)?;
                    out.add(c, loss);
                    let d = self.dim();
                    accumulate(&mut mention_grads, &link.source, &g[..d]);
                    accumulate(&mut mention_grads, &link.target, &g[d..]);
                }
            }
            if !encoder.is_frozen() {
                encoder.backward_document(doc, &enc, &mention_grads, &mut grads.encoders[enc_index]);
            }
        }
        out.finish(self.config.loss);
        Ok(out)
    }

    /// Cross-entropy of one embedding and `∂(weight·CE)/∂t`.
    fn head_loss_grad(
        &self,
        t: &[f64],
        category: Category,
        gold: &str,
        weight: f64,
        rng: Option<&mut ChaCha8Rng>,
        grads: &mut Model,
    ) -> Result<(f64, Vec<f64>)> {
        let head = self.heads.get(&category).ok_or(Error::MissingHead(category))?;
        let gold = self.labels.index_of(gold)?;
        let p = self.config.dropout;
        let mask: Option<Vec<f64>> = match rng {
            Some(rng) if p > 0.0 => Some(
                (0..t.len())
                    .map(|_| if rng.gen_bool(p) { 0.0 } else { 1.0 / (1.0 - p) })
                    .collect(),
            ),
            _ => None,
        };
        let input: Vec<f64> = match &mask {
            Some(m) => t.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => t.to_vec(),
        };
        let mut probs = head.logits(&input);
        let loss = cross_entropy(&probs, gold);
        softmax_in_place(&mut probs);
        probs[gold] -= 1.0;
        probs.iter_mut().for_each(|g| *g *= weight);
        let gh = grads.heads.get_mut(&category).expect("gradient head exists");
        gh.weight.add_outer(&probs, &input);
        add_into(&probs, gh.bias.row_mut(0));
        let mut dt = vec![0.0; t.len()];
        head.weight.matvec_t_rows_acc(0, &probs, &mut dt);
        if let Some(m) = mask {
            dt.iter_mut().zip(m).for_each(|(g, k)| *g *= k);
        }
        Ok((loss, dt))
    }
}

fn pair_embedding(enc: &DocEncoding, link: &TLink) -> Result<TlinkEmbedding> {
    let get = |id: &str| enc.mentions.get(id).ok_or_else(|| Error::MissingTarget(id.to_string()));
    local_forward(get(&link.source)?, get(&link.target)?, link.category)
}

fn accumulate(map: &mut BTreeMap<String, Vec<f64>>, id: &str, g: &[f64]) {
    match map.get_mut(id) {
        Some(acc) => add_into(g, acc),
        None => {
            map.insert(id.to_string(), g.to_vec());
        }
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
