//! Synthetic dense corpora with planted chain-dependent labels.
//!
//! Every mention carries an identity that is visible in its token surface
//! (`ev3`, `tm tx1`), surrounded by filler tokens. Surfaces never encode the
//! chain a mention takes part in, so a classifier that only looks at one
//! (source, target) pair sees nothing of the earlier chain steps.
//!
//! Under [`PlantedRule::ChainContext`] with depth `D`, the gold label of chain
//! step `i` is a function of the identities at steps `max(1, i-D+1)..=i`:
//! - `D = 1`: `beta[id_i]`, the current target alone;
//! - `D >= 2`: `sum_{o=1}^{D-1} alpha_o[id_{i-o}] mod L`, earlier steps only,
//!   with terms before step 1 dropped (so the DCT step always gets label 0).
//!
//! Ignoring the current target for `D >= 2` makes the label independent of
//! everything a pair-local model observes, so such a model is capped at the
//! per-category majority rate. The `alpha_1` table gives the DCT its own value
//! and spreads the remaining identities evenly over the other labels, which
//! keeps that majority rate low.
//!
//! [`PlantedRule::SourceIdentity`] labels every link by `gamma[source id]`,
//! the same table for all categories. Categories then share the features they
//! need, which is what multi-category training exploits.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Document, Mention, MentionKind, TLink, DCT_ID};
use crate::chains::OrderKey;
use crate::{Category, Error, LabelSet, Result};

const FILLER_VOCAB: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedRule {
    #[default]
    ChainContext,
    SourceIdentity,
}

fn default_event_types() -> usize {
    12
}
fn default_timex_types() -> usize {
    6
}
fn default_targets() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_docs: usize,
    pub events_per_doc: usize,
    pub timex_per_doc: usize,
    pub context_depth: usize,
    #[serde(default)]
    pub label_set: LabelSet,
    pub seed: u64,
    #[serde(default)]
    pub rule: PlantedRule,
    /// Number of distinct event identities.
    #[serde(default = "default_event_types")]
    pub event_types: usize,
    #[serde(default = "default_timex_types")]
    pub timex_types: usize,
    /// Non-DCT links per source event, capped by the available mentions.
    #[serde(default = "default_targets")]
    pub targets_per_event: usize,
    /// When set, targets are drawn from events only and each time expression
    /// is linked independently with this probability.
    #[serde(default)]
    pub timex_link_prob: Option<f64>,
}

impl SynthSpec {
    pub fn new(n_docs: usize, context_depth: usize, seed: u64) -> Self {
        SynthSpec {
            n_docs,
            events_per_doc: 8,
            timex_per_doc: 2,
            context_depth,
            label_set: LabelSet::default(),
            seed,
            rule: PlantedRule::ChainContext,
            event_types: default_event_types(),
            timex_types: default_timex_types(),
            targets_per_event: default_targets(),
            timex_link_prob: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("synthetic spec: {m}")));
        if self.context_depth == 0 {
            return fail("context_depth must be >= 1");
        }
        if self.events_per_doc == 0 || self.event_types == 0 {
            return fail("need at least one event per document and one event type");
        }
        if self.timex_per_doc > 0 && self.timex_types == 0 {
            return fail("timex_per_doc > 0 needs timex_types > 0");
        }
        if let Some(p) = self.timex_link_prob {
            if !(0.0..=1.0).contains(&p) {
                return fail("timex_link_prob outside [0, 1]");
            }
        }
        Ok(())
    }

    fn identities(&self) -> usize {
        self.event_types + self.timex_types + 1
    }

    pub fn dct_identity(&self) -> usize {
        self.event_types + self.timex_types
    }

    /// Identity of a mention, read back from its token surface.
    pub fn identity_of(&self, doc: &Document, id: &str) -> Option<usize> {
        if id == DCT_ID {
            return Some(self.dct_identity());
        }
        let m = doc.mention(id)?;
        let last = doc.sentences[m.sent_index][m.token_end - 1].as_str();
        match m.kind {
            MentionKind::Event => last.strip_prefix("ev")?.parse().ok(),
            MentionKind::Timex => last
                .strip_prefix("tx")?
                .parse::<usize>()
                .ok()
                .map(|t| self.event_types + t),
            MentionKind::Dct => Some(self.dct_identity()),
        }
    }
}

/// The lookup tables behind the planted rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedTables {
    pub rule: PlantedRule,
    pub depth: usize,
    pub labels: usize,
    /// `ChainContext`, depth 1: `[beta]`; depth D >= 2: `[alpha_1 .. alpha_{D-1}]`.
    /// `SourceIdentity`: `[gamma]`.
    pub tables: Vec<Vec<usize>>,
}

impl PlantedTables {
    /// Label of a chain step. `window` holds the identities of steps
    /// `max(1, i-D+1)..=i`, current step last.
    pub fn label_for(&self, source: usize, window: &[usize]) -> usize {
        match self.rule {
            PlantedRule::SourceIdentity => self.tables[0][source],
            PlantedRule::ChainContext if self.depth == 1 => self.tables[0][*window.last().expect("non-empty window")],
            PlantedRule::ChainContext => {
                let n = window.len();
                let mut sum = 0;
                for offset in 1..self.depth.min(n) {
                    sum += self.tables[offset - 1][window[n - 1 - offset]];
                }
                sum % self.labels
            }
        }
    }
}

fn balanced(ids: &[usize], values: &[usize], table: &mut [usize], rng: &mut ChaCha8Rng) {
    let mut ids = ids.to_vec();
    ids.shuffle(rng);
    for (k, id) in ids.into_iter().enumerate() {
        table[id] = values[k % values.len()];
    }
}

/// Tables for `spec`, drawn from their own random stream.
pub fn planted_tables(spec: &SynthSpec) -> PlantedTables {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.identities();
    let labels = spec.label_set.len();
    let all_values: Vec<usize> = (0..labels).collect();
    let non_dct: Vec<usize> = (0..spec.dct_identity()).collect();
    let events: Vec<usize> = (0..spec.event_types).collect();
    let mut tables = Vec::new();
    match spec.rule {
        PlantedRule::SourceIdentity => {
            let mut gamma = vec![0; n];
            balanced(&events, &all_values, &mut gamma, &mut rng);
            tables.push(gamma);
        }
        PlantedRule::ChainContext if spec.context_depth == 1 => {
            let mut beta = vec![0; n];
            let every: Vec<usize> = (0..n).collect();
            balanced(&every, &all_values, &mut beta, &mut rng);
            tables.push(beta);
        }
        PlantedRule::ChainContext => {
            for offset in 1..spec.context_depth {
                let mut alpha = vec![0; n];
                if offset == 1 && labels > 1 {
                    let dct_value = rng.gen_range(0..labels);
                    alpha[spec.dct_identity()] = dct_value;
                    let rest: Vec<usize> = all_values.iter().copied().filter(|&v| v != dct_value).collect();
                    balanced(&non_dct, &rest, &mut alpha, &mut rng);
                } else {
                    let every: Vec<usize> = (0..n).collect();
                    balanced(&every, &all_values, &mut alpha, &mut rng);
                }
                tables.push(alpha);
            }
        }
    }
    PlantedTables {
        rule: spec.rule,
        depth: spec.context_depth,
        labels,
        tables,
    }
}

struct Placed {
    id: String,
    kind: MentionKind,
    identity: usize,
}

fn generate_document(spec: &SynthSpec, tables: &PlantedTables, index: usize, rng: &mut ChaCha8Rng) -> Document {
    let mut placed: Vec<Placed> = Vec::new();
    for j in 0..spec.events_per_doc {
        placed.push(Placed {
            id: format!("e{j}"),
            kind: MentionKind::Event,
            identity: rng.gen_range(0..spec.event_types),
        });
    }
    for j in 0..spec.timex_per_doc {
        placed.push(Placed {
            id: format!("t{j}"),
            kind: MentionKind::Timex,
            identity: spec.event_types + rng.gen_range(0..spec.timex_types),
        });
    }
    let mut order: Vec<usize> = (0..placed.len()).collect();
    order.shuffle(rng);

    let filler = |rng: &mut ChaCha8Rng| format!("w{}", rng.gen_range(0..FILLER_VOCAB));
    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut mentions: Vec<Option<Mention>> = vec![None; placed.len()];
    let mut at = 0;
    while at < order.len() {
        let take = rng.gen_range(1..=3).min(order.len() - at);
        let mut tokens: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            tokens.push(filler(rng));
        }
        for &p in &order[at..at + take] {
            let start = tokens.len();
            let m = &placed[p];
            match m.kind {
                MentionKind::Event => tokens.push(format!("ev{}", m.identity)),
                _ => {
                    tokens.push("tm".to_string());
                    tokens.push(format!("tx{}", m.identity - spec.event_types));
                }
            }
            mentions[p] = Some(Mention {
                id: m.id.clone(),
                kind: m.kind,
                sent_index: sentences.len(),
                token_start: start,
                token_end: tokens.len(),
            });
            for _ in 0..rng.gen_range(1..=2) {
                tokens.push(filler(rng));
            }
        }
        sentences.push(tokens);
        at += take;
    }

    let mut doc = Document {
        doc_id: format!("synth-{index:05}"),
        dct_value: format!("2000-{:02}-{:02}", index / 28 % 12 + 1, index % 28 + 1),
        sentences,
        mentions: mentions.into_iter().map(|m| m.expect("every mention placed")).collect(),
        tlinks: Vec::new(),
    };

    let mut links = Vec::new();
    for s in 0..spec.events_per_doc {
        let events: Vec<usize> = (0..spec.events_per_doc).filter(|&e| e != s).collect();
        let timexes: Vec<usize> = (spec.events_per_doc..placed.len()).collect();
        let mut targets: Vec<usize> = match spec.timex_link_prob {
            Some(p) => {
                let mut t: Vec<usize> = events
                    .choose_multiple(rng, spec.targets_per_event.min(events.len()))
                    .copied()
                    .collect();
                t.extend(timexes.into_iter().filter(|_| rng.gen_bool(p)));
                t
            }
            None => {
                let pool: Vec<usize> = events.into_iter().chain(timexes).collect();
                pool.choose_multiple(rng, spec.targets_per_event.min(pool.len()))
                    .copied()
                    .collect()
            }
        };
        targets.sort_by_cached_key(|&t| OrderKey::of(&doc, &placed[t].id).expect("placed mention"));

        let source_identity = placed[s].identity;
        let mut window: Vec<usize> = vec![spec.dct_identity()];
        let mut chain_links = vec![(DCT_ID.to_string(), Category::E2D, tables.label_for(source_identity, &window))];
        for &t in &targets {
            window.push(placed[t].identity);
            let from = window.len().saturating_sub(spec.context_depth);
            let label = tables.label_for(source_identity, &window[from..]);
            let category = match placed[t].kind {
                MentionKind::Event => Category::E2E,
                _ => Category::E2T,
            };
            chain_links.push((placed[t].id.clone(), category, label));
        }
        for (target, category, label) in chain_links {
            links.push(TLink {
                source: placed[s].id.clone(),
                target,
                category,
                relation: spec.label_set.label(label).to_string(),
            });
        }
    }
    links.shuffle(rng);
    doc.tlinks = links;
    doc
}

/// Generates `spec.n_docs` documents. Identical specs give identical corpora.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let tables = planted_tables(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    Ok((0..spec.n_docs)
        .map(|i| generate_document(spec, &tables, i, &mut rng))
        .collect())
}
