//! Dense TLINK corpora: document model, validation, statistics, splits and
//! synthetic generation.
//!
//! The DCT is not stored as a mention. Links point at it through the reserved
//! id [`DCT_ID`], and [`Document::kind_of`] resolves that id to
//! [`MentionKind::Dct`].

mod split;
mod stats;
pub mod synth;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Category, Error, LabelSet, Result};

pub use split::{split_corpus, Split, SplitManifest, SplitMode, SplitSpec};
pub use stats::{corpus_stats, StatsReport};
pub use synth::{generate_synthetic_corpus, PlantedRule, PlantedTables, SynthSpec};

/// Reserved mention id of the document creation time.
pub const DCT_ID: &str = "DCT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Event,
    Timex,
    Dct,
}

/// A positioned event or time expression. `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub id: String,
    pub kind: MentionKind,
    #[serde(rename = "sent")]
    pub sent_index: usize,
    #[serde(rename = "start")]
    pub token_start: usize,
    #[serde(rename = "end")]
    pub token_end: usize,
}

/// A directed temporal link from an event to another mention or the DCT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TLink {
    pub source: String,
    pub target: String,
    pub category: Category,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub dct_value: String,
    pub sentences: Vec<Vec<String>>,
    pub mentions: Vec<Mention>,
    pub tlinks: Vec<TLink>,
}

impl Document {
    pub fn mention(&self, id: &str) -> Option<&Mention> {
        self.mentions.iter().find(|m| m.id == id)
    }

    /// Kind of `id`, resolving the DCT sentinel.
    pub fn kind_of(&self, id: &str) -> Option<MentionKind> {
        if id == DCT_ID {
            Some(MentionKind::Dct)
        } else {
            self.mention(id).map(|m| m.kind)
        }
    }

    fn invalid(&self, field: &str, message: String) -> Error {
        Error::Validation {
            doc_id: self.doc_id.clone(),
            field: field.to_string(),
            message,
        }
    }

    /// Checks every structural invariant of the document against `labels`.
    pub fn validate(&self, labels: &LabelSet) -> Result<()> {
        if self.doc_id.is_empty() {
            return Err(self.invalid("doc_id", "empty document id".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.mentions {
            if m.id == DCT_ID {
                return Err(self.invalid("mentions", format!("mention id `{DCT_ID}` is reserved")));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(self.invalid("mentions", format!("duplicate mention id `{}`", m.id)));
            }
            if m.kind == MentionKind::Dct {
                return Err(self.invalid("mentions", format!("mention `{}` has kind dct", m.id)));
            }
            let sentence = self.sentences.get(m.sent_index).ok_or_else(|| {
                self.invalid(
                    "mentions",
                    format!("mention `{}` refers to missing sentence {}", m.id, m.sent_index),
                )
            })?;
            if m.token_end <= m.token_start || m.token_end > sentence.len() {
                return Err(self.invalid(
                    "mentions",
                    format!(
                        "mention `{}` span {}..{} outside sentence of {} tokens",
                        m.id,
                        m.token_start,
                        m.token_end,
                        sentence.len()
                    ),
                ));
            }
        }
        let mut pairs = BTreeSet::new();
        for (i, link) in self.tlinks.iter().enumerate() {
            if !pairs.insert((link.source.as_str(), link.target.as_str())) {
                return Err(self.invalid(
                    "tlinks",
                    format!("link {i}: duplicate link {} -> {}", link.source, link.target),
                ));
            }
            let source = self.kind_of(&link.source).ok_or_else(|| {
                self.invalid("tlinks", format!("link {i}: unknown source `{}`", link.source))
            })?;
            if source != MentionKind::Event {
                return Err(self.invalid(
                    "tlinks",
                    format!("link {i}: source `{}` is not an event", link.source),
                ));
            }
            let target = self.kind_of(&link.target).ok_or_else(|| {
                self.invalid("tlinks", format!("link {i}: unknown target `{}`", link.target))
            })?;
            let consistent = matches!(
                (link.category, target),
                (Category::E2D, MentionKind::Dct)
                    | (Category::E2T, MentionKind::Timex)
                    | (Category::E2E, MentionKind::Event)
                    | (Category::MAT, MentionKind::Event)
            );
            if !consistent {
                return Err(self.invalid(
                    "tlinks",
                    format!(
                        "link {i}: category {} inconsistent with target `{}` of kind {:?}",
                        link.category, link.target, target
                    ),
                ));
            }
            if link.source == link.target {
                return Err(self.invalid("tlinks", format!("link {i}: self link on `{}`", link.source)));
            }
            if !labels.contains(&link.relation) {
                return Err(self.invalid(
                    "tlinks",
                    format!("link {i}: relation `{}` not in label set {}", link.relation, labels.name()),
                ));
            }
        }
        Ok(())
    }
}
