//! Token and mention embeddings.
//!
//! The toy encoder computes, for token `i` of a sentence,
//!
//! ```text
//! out_i = E[tok_i] + P[min(i, P_max - 1)] + M · (E[tok_{i-1}] + E[tok_{i+1}])
//! ```
//!
//! with missing neighbours contributing zero. `E` is the token table, `P` a
//! position table and `M` a mixing matrix, so identical tokens at different
//! positions or in different contexts get different vectors. A mention is the
//! element-wise sum of its token vectors. The DCT has no surface and uses a
//! single trainable vector owned by the encoder; it freezes with the encoder.
//!
//! A [`ContextualAdapter`] can replace the token computation with an external
//! contextual encoder. Its parameters are owned outside this crate and never
//! updated here; alignment of subwords to tokens is the adapter's job.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, DCT_ID};
use crate::tensor::{add_into, Tensor};
use crate::{Error, Result};

pub const UNK: &str = "<unk>";

/// An external token encoder producing one vector per input token.
pub trait ContextualAdapter: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, tokens: &[String]) -> core::result::Result<Vec<Vec<f64>>, String>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    #[default]
    Toy,
    ContextualAdapter,
}

fn default_positions() -> usize {
    64
}
fn default_init() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default)]
    pub kind: EncoderKind,
    pub dim: usize,
    #[serde(default = "default_positions")]
    pub max_positions: usize,
    #[serde(default)]
    pub pooling: Pooling,
    #[serde(default = "default_init")]
    pub init_scale: f64,
}

impl EncoderConfig {
    pub fn toy(dim: usize) -> Self {
        EncoderConfig {
            kind: EncoderKind::Toy,
            dim,
            max_positions: default_positions(),
            pooling: Pooling::Sum,
            init_scale: default_init(),
        }
    }
}

/// Closed token vocabulary; index 0 is reserved for unknown tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocab {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocab {
            tokens: vec![UNK.to_string()],
            index: BTreeMap::new(),
        };
        vocab.index.insert(UNK.to_string(), 0);
        for t in tokens {
            let t = t.as_ref();
            if !vocab.index.contains_key(t) {
                vocab.index.insert(t.to_string(), vocab.tokens.len());
                vocab.tokens.push(t.to_string());
            }
        }
        vocab
    }

    /// Vocabulary of every token in `docs`, in first-seen order.
    pub fn from_documents<'a, I: IntoIterator<Item = &'a Document>>(docs: I) -> Self {
        Vocab::from_tokens(
            docs.into_iter()
                .flat_map(|d| d.sentences.iter().flatten())
                .map(String::as_str),
        )
    }

    /// Rebuilds the lookup after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Element-wise sum of `token_vectors[start..end]`.
pub fn mention_embedding(token_vectors: &[Vec<f64>], start: usize, end: usize) -> Result<Vec<f64>> {
    if start >= end || end > token_vectors.len() {
        return Err(Error::Span {
            start,
            end,
            len: token_vectors.len(),
        });
    }
    let mut out = token_vectors[start].clone();
    for v in &token_vectors[start + 1..end] {
        add_into(v, &mut out);
    }
    Ok(out)
}

/// Token vectors and mention embeddings of one document.
#[derive(Debug, Clone)]
pub struct DocEncoding {
    pub token_ids: Vec<Vec<usize>>,
    pub tokens: Vec<Vec<Vec<f64>>>,
    /// Mention id → embedding, including the DCT under [`DCT_ID`].
    pub mentions: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub vocab: Vocab,
    pub tokens: Tensor,
    pub positions: Tensor,
    pub mix: Tensor,
    pub dct: Tensor,
    adapter: Option<Arc<dyn ContextualAdapter>>,
    frozen: bool,
}

impl fmt::Debug for Encoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Encoder")
            .field("config", &self.config)
            .field("vocab", &self.vocab.len())
            .field("adapter", &self.adapter.is_some())
            .field("frozen", &self.frozen)
            .finish()
    }
}

impl Encoder {
    pub fn new<R: Rng + ?Sized>(config: EncoderConfig, vocab: Vocab, rng: &mut R) -> Result<Self> {
        let d = config.dim;
        if d == 0 {
            return Err(Error::Config("encoder dim must be positive".into()));
        }
        if config.max_positions == 0 {
            return Err(Error::Config("max_positions must be positive".into()));
        }
        if config.kind == EncoderKind::ContextualAdapter {
            return Err(Error::Config(
                "contextual encoders are attached with Encoder::with_adapter".into(),
            ));
        }
        let s = config.init_scale;
        let tokens = Tensor::uniform(vocab.len(), d, s, rng);
        let positions = Tensor::uniform(config.max_positions, d, s, rng);
        let mix = Tensor::uniform(d, d, s / libm::sqrt(d as f64), rng);
        let dct = Tensor::uniform(1, d, s, rng);
        Ok(Encoder {
            config,
            vocab,
            tokens,
            positions,
            mix,
            dct,
            adapter: None,
            frozen: false,
        })
    }

    /// An encoder whose token vectors come from `adapter`. Only the DCT
    /// vector is trainable here.
    pub fn with_adapter<R: Rng + ?Sized>(adapter: Arc<dyn ContextualAdapter>, init_scale: f64, rng: &mut R) -> Self {
        let d = adapter.dim();
        Encoder {
            config: EncoderConfig {
                kind: EncoderKind::ContextualAdapter,
                dim: d,
                max_positions: 0,
                pooling: Pooling::Sum,
                init_scale,
            },
            vocab: Vocab::from_tokens(core::iter::empty::<&str>()),
            tokens: Tensor::zeros(0, d),
            positions: Tensor::zeros(0, d),
            mix: Tensor::zeros(0, d),
            dct: Tensor::uniform(1, d, init_scale, rng),
            adapter: Some(adapter),
            frozen: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Same shapes, all zeros, unfrozen; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Encoder {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            tokens: self.tokens.zeros_like(),
            positions: self.positions.zeros_like(),
            mix: self.mix.zeros_like(),
            dct: self.dct.zeros_like(),
            adapter: self.adapter.clone(),
            frozen: false,
        }
    }

    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn dct_embedding(&self) -> &[f64] {
        self.dct.row(0)
    }

    pub fn tensors(&self) -> [(&'static str, &Tensor); 4] {
        [
            ("tokens", &self.tokens),
            ("positions", &self.positions),
            ("mix", &self.mix),
            ("dct", &self.dct),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 4] {
        [
            ("tokens", &mut self.tokens),
            ("positions", &mut self.positions),
            ("mix", &mut self.mix),
            ("dct", &mut self.dct),
        ]
    }

    pub fn token_ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.vocab.get(t)).collect()
    }

    fn position(&self, i: usize) -> usize {
        i.min(self.config.max_positions - 1)
    }

    fn neighbours(&self, ids: &[usize], i: usize) -> Vec<f64> {
        let mut nb = vec![0.0; self.dim()];
        if i > 0 {
            add_into(self.tokens.row(ids[i - 1]), &mut nb);
        }
        if i + 1 < ids.len() {
            add_into(self.tokens.row(ids[i + 1]), &mut nb);
        }
        nb
    }

    fn encode_ids(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        (0..ids.len())
            .map(|i| {
                let mut out = self.tokens.row(ids[i]).to_vec();
                add_into(self.positions.row(self.position(i)), &mut out);
                self.mix.matvec_acc(&self.neighbours(ids, i), &mut out);
                out
            })
            .collect()
    }

    /// One vector of dimension `dim` per token.
    pub fn encode_sentence(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
        if tokens.is_empty() {
            return Err(Error::Encoder("empty sentence".into()));
        }
        match &self.adapter {
            Some(adapter) => {
                let out = adapter.encode(tokens).map_err(Error::Encoder)?;
                if out.len() != tokens.len() {
                    return Err(Error::Encoder(alloc::format!(
                        "adapter returned {} vectors for {} tokens",
                        out.len(),
                        tokens.len()
                    )));
                }
                if let Some(v) = out.iter().find(|v| v.len() != self.dim()) {
                    return Err(Error::Dimension {
                        expected: self.dim(),
                        got: v.len(),
                    });
                }
                Ok(out)
            }
            None => Ok(self.encode_ids(&self.token_ids(tokens))),
        }
    }

    /// Pools a mention according to the configured pooling.
    pub fn pool(&self, token_vectors: &[Vec<f64>], start: usize, end: usize) -> Result<Vec<f64>> {
        let mut v = mention_embedding(token_vectors, start, end)?;
        if self.config.pooling == Pooling::Mean {
            let n = (end - start) as f64;
            v.iter_mut().for_each(|x| *x /= n);
        }
        Ok(v)
    }

    /// Encodes every sentence and mention of `doc`.
    pub fn encode_document(&self, doc: &Document) -> Result<DocEncoding> {
        let mut token_ids = Vec::with_capacity(doc.sentences.len());
        let mut tokens = Vec::with_capacity(doc.sentences.len());
        for sentence in &doc.sentences {
            if sentence.is_empty() {
                token_ids.push(Vec::new());
                tokens.push(Vec::new());
                continue;
            }
            token_ids.push(self.token_ids(sentence));
            tokens.push(self.encode_sentence(sentence)?);
        }
        let mut mentions = BTreeMap::new();
        for m in &doc.mentions {
            let v = self.pool(&tokens[m.sent_index], m.token_start, m.token_end)?;
            mentions.insert(m.id.clone(), v);
        }
        mentions.insert(DCT_ID.to_string(), self.dct_embedding().to_vec());
        Ok(DocEncoding {
            token_ids,
            tokens,
            mentions,
        })
    }

    /// Accumulates into `grads` the gradient of a loss whose derivative with
    /// respect to each mention embedding is `mention_grads`.
    pub fn backward_document(
        &self,
        doc: &Document,
        enc: &DocEncoding,
        mention_grads: &BTreeMap<String, Vec<f64>>,
        grads: &mut Encoder,
    ) {
        if let Some(g) = mention_grads.get(DCT_ID) {
            add_into(g, grads.dct.row_mut(0));
        }
        if self.adapter.is_some() {
            return;
        }
        let d = self.dim();
        let mut token_grads: Vec<Option<Vec<Vec<f64>>>> = vec![None; doc.sentences.len()];
        for m in &doc.mentions {
            let Some(g) = mention_grads.get(&m.id) else { continue };
            let scale = match self.config.pooling {
                Pooling::Sum => 1.0,
                Pooling::Mean => 1.0 / (m.token_end - m.token_start) as f64,
            };
            let sent = token_grads[m.sent_index].get_or_insert_with(|| vec![vec![0.0; d]; enc.token_ids[m.sent_index].len()]);
            for t in m.token_start..m.token_end {
                crate::tensor::axpy(scale, g, &mut sent[t]);
            }
        }
        for (s, tg) in token_grads.iter().enumerate() {
            if let Some(tg) = tg {
                self.backward_ids(&enc.token_ids[s], tg, grads);
            }
        }
    }

    fn backward_ids(&self, ids: &[usize], token_grads: &[Vec<f64>], grads: &mut Encoder) {
        for (i, g) in token_grads.iter().enumerate() {
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            add_into(g, grads.tokens.row_mut(ids[i]));
            add_into(g, grads.positions.row_mut(self.position(i)));
            grads.mix.add_outer(g, &self.neighbours(ids, i));
            let mut nb = vec![0.0; self.dim()];
            self.mix.matvec_t_rows_acc(0, g, &mut nb);
            if i > 0 {
                add_into(&nb, grads.tokens.row_mut(ids[i - 1]));
            }
            if i + 1 < ids.len() {
                add_into(&nb, grads.tokens.row_mut(ids[i + 1]));
            }
        }
    }
}
