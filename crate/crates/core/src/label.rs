//! TLINK categories and relation label sets.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// TLINK category, determined by the kind of the link target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Event to document creation time.
    E2D,
    /// Event to time expression.
    E2T,
    /// Event to event.
    E2E,
    /// Matrix verb event to matrix verb event (BCCWJ-Timebank schema).
    MAT,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::E2D, Category::E2T, Category::E2E, Category::MAT];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::E2D => "E2D",
            Category::E2T => "E2T",
            Category::E2E => "E2E",
            Category::MAT => "MAT",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown category `{s}`")))
    }
}

/// An ordered relation inventory with an inverse map.
///
/// The inverse map must be an involution; it is used when links are mirrored
/// into the chain of their target event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabelSet", into = "RawLabelSet")]
pub struct LabelSet {
    name: String,
    labels: Vec<String>,
    inverse: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawLabelSet {
    name: String,
    labels: Vec<String>,
    inverse: BTreeMap<String, String>,
}

impl TryFrom<RawLabelSet> for LabelSet {
    type Error = Error;

    fn try_from(raw: RawLabelSet) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = raw
            .inverse
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        let labels: Vec<&str> = raw.labels.iter().map(String::as_str).collect();
        LabelSet::new(&raw.name, &labels, &pairs)
    }
}

impl From<LabelSet> for RawLabelSet {
    fn from(set: LabelSet) -> Self {
        let inverse = set
            .labels
            .iter()
            .zip(&set.inverse)
            .map(|(label, &inv)| (label.clone(), set.labels[inv].clone()))
            .collect();
        RawLabelSet {
            name: set.name,
            labels: set.labels,
            inverse,
        }
    }
}

impl LabelSet {
    /// Builds a label set. Labels missing from `inverse_pairs` are their own
    /// inverse; each listed pair is applied in both directions.
    pub fn new(name: &str, labels: &[&str], inverse_pairs: &[(&str, &str)]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::LabelSet("empty label inventory".into()));
        }
        let labels: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::LabelSet(alloc::format!("duplicate label `{l}`")));
            }
        }
        let index = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::LabelSet(alloc::format!("inverse refers to unknown label `{l}`")))
        };
        let mut inverse: Vec<Option<usize>> = alloc::vec![None; labels.len()];
        for &(a, b) in inverse_pairs {
            let (ia, ib) = (index(a)?, index(b)?);
            for (from, to) in [(ia, ib), (ib, ia)] {
                match inverse[from] {
                    Some(prev) if prev != to => {
                        return Err(Error::LabelSet(alloc::format!(
                            "inverse of `{}` is not an involution",
                            labels[from]
                        )))
                    }
                    _ => inverse[from] = Some(to),
                }
            }
        }
        let inverse = inverse
            .iter()
            .enumerate()
            .map(|(i, inv)| inv.unwrap_or(i))
            .collect();
        Ok(LabelSet {
            name: name.to_string(),
            labels,
            inverse,
        })
    }

    /// The six-relation Timebank-Dense inventory.
    pub fn timebank_dense() -> Self {
        LabelSet::new(
            "timebank-dense",
            &["after", "before", "simultaneous", "includes", "is_included", "vague"],
            &[("after", "before"), ("includes", "is_included")],
        )
        .expect("static label set is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn inverse_index(&self, index: usize) -> usize {
        self.inverse[index]
    }

    /// Inverse relation of `label`, e.g. `before` -> `after`.
    pub fn invert(&self, label: &str) -> Result<&str> {
        let i = self.index_of(label)?;
        Ok(&self.labels[self.inverse[i]])
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet::timebank_dense()
    }
}
