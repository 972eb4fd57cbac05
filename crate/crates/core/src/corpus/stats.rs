use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::Document;
use crate::Category;

/// TLINK counts per category and SECT chain density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub documents: usize,
    pub links: BTreeMap<Category, usize>,
    pub total_links: usize,
    pub chains: usize,
    /// Chain-member links divided by chain count (0 for an empty corpus).
    pub mean_chain_length: f64,
}

impl StatsReport {
    pub fn count(&self, category: Category) -> usize {
        self.links.get(&category).copied().unwrap_or(0)
    }

    /// Mean chain length rounded to one decimal for display.
    pub fn mean_chain_display(&self) -> String {
        alloc::format!("{:.1}", self.mean_chain_length)
    }
}

/// Tallies links per category. Every link belongs to the chain of its source
/// event, so the chain count is the number of distinct (document, source)
/// pairs.
pub fn corpus_stats(docs: &[Document]) -> StatsReport {
    let mut links: BTreeMap<Category, usize> = BTreeMap::new();
    let mut chains = 0;
    let mut total = 0;
    for doc in docs {
        let mut sources = BTreeSet::new();
        for link in &doc.tlinks {
            *links.entry(link.category).or_default() += 1;
            sources.insert(link.source.as_str());
            total += 1;
        }
        chains += sources.len();
    }
    let mean_chain_length = if chains == 0 {
        0.0
    } else {
        total as f64 / chains as f64
    };
    StatsReport {
        documents: docs.len(),
        links,
        total_links: total,
        chains,
        mean_chain_length,
    }
}

fn thousands(n: usize) -> String {
    let digits = alloc::format!("{n}");
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents {}", thousands(self.documents))?;
        for c in Category::ALL {
            if let Some(&n) = self.links.get(&c) {
                writeln!(f, "{c} {}", thousands(n))?;
            }
        }
        writeln!(f, "total {}", thousands(self.total_links))?;
        writeln!(f, "chains {}", thousands(self.chains))?;
        write!(f, "SECT {}", self.mean_chain_display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use alloc::vec;

    #[test]
    fn empty_corpus_is_all_zero() {
        let r = corpus_stats(&[]);
        assert_eq!(r.documents, 0);
        assert_eq!(r.total_links, 0);
        assert_eq!(r.mean_chain_length, 0.0);
        assert!(r.links.is_empty());
    }

    #[test]
    fn hand_tally() {
        // manhunt: one chain of 4 links; second doc: e1 -> DCT, e2 -> DCT, e2 -> e1 (2 chains).
        let mut second = manhunt();
        second.doc_id = "d2".into();
        second.mentions.truncate(2);
        second.tlinks = vec![
            link("e1", "DCT", Category::E2D, "after"),
            link("e2", "DCT", Category::E2D, "before"),
            link("e2", "e1", Category::E2E, "vague"),
        ];
        let r = corpus_stats(&[manhunt(), second]);
        assert_eq!(r.documents, 2);
        assert_eq!(r.count(Category::E2D), 3);
        assert_eq!(r.count(Category::E2T), 1);
        assert_eq!(r.count(Category::E2E), 3);
        assert_eq!(r.count(Category::MAT), 0);
        assert_eq!(r.chains, 3);
        assert!((r.mean_chain_length - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.mean_chain_display(), "2.3");
    }

    #[test]
    fn thousands_separator() {
        assert_eq!(thousands(6088), "6,088");
        assert_eq!(thousands(776), "776");
        assert_eq!(thousands(1_234_567), "1,234,567");
    }
}
