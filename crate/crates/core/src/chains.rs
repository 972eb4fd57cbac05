//! SECT chain construction.
//!
//! All links sharing a source event form one chain. The DCT link comes first;
//! the rest follow the document order of their targets, keyed by
//! (sentence, first token, mention id).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, MentionKind, TLink, DCT_ID};
use crate::{Category, Error, LabelSet, Result};

/// Position of a mention in its document. The DCT sorts before everything.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OrderKey {
    Dct,
    Positioned {
        sent_index: usize,
        token_start: usize,
        mention_id: String,
    },
}

impl OrderKey {
    pub fn of(doc: &Document, id: &str) -> Result<OrderKey> {
        if id == DCT_ID {
            return Ok(OrderKey::Dct);
        }
        let m = doc.mention(id).ok_or_else(|| Error::UnknownMention {
            doc_id: doc.doc_id.clone(),
            mention: id.to_string(),
        })?;
        Ok(OrderKey::Positioned {
            sent_index: m.sent_index,
            token_start: m.token_start,
            mention_id: m.id.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub link: TLink,
    /// Mirrored from a link annotated in the opposite direction.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectChain {
    pub doc_id: String,
    pub source: String,
    pub steps: Vec<ChainStep>,
}

impl SectChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(|s| s.link.target.as_str())
    }
}

/// Inverse relation under `labels`.
pub fn invert_relation<'a>(label: &str, labels: &'a LabelSet) -> Result<&'a str> {
    labels.invert(label)
}

fn step_cmp(a: &(OrderKey, ChainStep), b: &(OrderKey, ChainStep)) -> Ordering {
    a.0.cmp(&b.0)
        .then_with(|| a.1.link.category.cmp(&b.1.link.category))
        .then_with(|| a.1.derived.cmp(&b.1.derived))
        .then_with(|| a.1.link.relation.cmp(&b.1.link.relation))
}

/// Groups the links of `doc` into SECT chains, one per source event, ordered
/// by the position of the source.
///
/// With `invert_links`, every event-to-event link (E2E or MAT) is also
/// mirrored into its target's chain with the inverse relation and marked
/// `derived`, unless the reverse direction is annotated already. E2T links
/// are never mirrored because time expressions do not head chains.
pub fn build_sect_chains(doc: &Document, labels: &LabelSet, invert_links: bool) -> Result<Vec<SectChain>> {
    let mut by_source: BTreeMap<OrderKey, (String, Vec<(OrderKey, ChainStep)>)> = BTreeMap::new();
    let annotated: BTreeSet<(&str, &str)> = doc
        .tlinks
        .iter()
        .map(|l| (l.source.as_str(), l.target.as_str()))
        .collect();

    let mut push = |link: TLink, derived: bool| -> Result<()> {
        match doc.kind_of(&link.source) {
            Some(MentionKind::Event) => {}
            Some(_) => {
                return Err(Error::SourceNotEvent {
                    doc_id: doc.doc_id.clone(),
                    mention: link.source.clone(),
                })
            }
            None => {
                return Err(Error::UnknownMention {
                    doc_id: doc.doc_id.clone(),
                    mention: link.source.clone(),
                })
            }
        }
        let source_key = OrderKey::of(doc, &link.source)?;
        let target_key = OrderKey::of(doc, &link.target)?;
        by_source
            .entry(source_key)
            .or_insert_with(|| (link.source.clone(), Vec::new()))
            .1
            .push((target_key, ChainStep { link, derived }));
        Ok(())
    };

    for link in &doc.tlinks {
        push(link.clone(), false)?;
    }
    if invert_links {
        for link in &doc.tlinks {
            let mirrorable = matches!(link.category, Category::E2E | Category::MAT);
            if !mirrorable || annotated.contains(&(link.target.as_str(), link.source.as_str())) {
                continue;
            }
            let relation = invert_relation(&link.relation, labels)?.to_string();
            push(
                TLink {
                    source: link.target.clone(),
                    target: link.source.clone(),
                    category: link.category,
                    relation,
                },
                true,
            )?;
        }
    }

    Ok(by_source
        .into_values()
        .map(|(source, mut steps)| {
            steps.sort_by(step_cmp);
            SectChain {
                doc_id: doc.doc_id.clone(),
                source,
                steps: steps.into_iter().map(|(_, s)| s).collect(),
            }
        })
        .collect())
}
