use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Document;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// A fixed train/dev/test manifest (Timebank-Dense).
    FixedTd,
    /// Document-level k-fold cross-validation with a random dev subset.
    CrossValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub folds: usize,
    pub dev_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn cross_validation(folds: usize, dev_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            mode: SplitMode::CrossValidation,
            folds,
            dev_fraction,
            seed,
        }
    }

    pub fn fixed() -> Self {
        SplitSpec {
            mode: SplitMode::FixedTd,
            folds: 1,
            dev_fraction: 0.15,
            seed: 0,
        }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::cross_validation(5, 0.15, 0)
    }
}

/// Doc ids per split, as stored in a split manifest file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

/// Document indices of one train/dev/test split, each in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn to_manifest(&self, docs: &[Document]) -> SplitManifest {
        let ids = |idx: &[usize]| idx.iter().map(|&i| docs[i].doc_id.clone()).collect();
        SplitManifest {
            train: ids(&self.train),
            dev: ids(&self.dev),
            test: ids(&self.test),
        }
    }

    pub fn from_manifest(docs: &[Document], manifest: &SplitManifest) -> Result<Self> {
        let by_id: BTreeMap<&str, usize> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.as_str(), i))
            .collect();
        let mut assigned = BTreeSet::new();
        let mut resolve = |ids: &[String]| -> Result<Vec<usize>> {
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                let &i = by_id
                    .get(id.as_str())
                    .ok_or_else(|| Error::Split(format!("manifest references unknown doc_id `{id}`")))?;
                if !assigned.insert(i) {
                    return Err(Error::Split(format!("doc_id `{id}` assigned twice")));
                }
                out.push(i);
            }
            out.sort_unstable();
            Ok(out)
        };
        let split = Split {
            train: resolve(&manifest.train)?,
            dev: resolve(&manifest.dev)?,
            test: resolve(&manifest.test)?,
        };
        if let Some(d) = docs.iter().enumerate().find(|(i, _)| !assigned.contains(i)) {
            return Err(Error::Split(format!(
                "document `{}` is not assigned by the manifest",
                d.1.doc_id
            )));
        }
        Ok(split)
    }

    pub fn select<'a>(docs: &'a [Document], idx: &[usize]) -> Vec<&'a Document> {
        idx.iter().map(|&i| &docs[i]).collect()
    }
}

/// Splits `docs` at document level.
///
/// Cross-validation shuffles document indices with `spec.seed`, cuts them into
/// `spec.folds` contiguous folds (sizes differ by at most one) and, per fold,
/// draws `round(dev_fraction * |train pool|)` dev documents from the pool.
/// Fixed mode needs a manifest.
pub fn split_corpus(docs: &[Document], spec: &SplitSpec, manifest: Option<&SplitManifest>) -> Result<Vec<Split>> {
    if !(spec.dev_fraction > 0.0 && spec.dev_fraction < 1.0) {
        return Err(Error::Split(format!("dev_fraction {} outside (0, 1)", spec.dev_fraction)));
    }
    match spec.mode {
        SplitMode::FixedTd => {
            let manifest = manifest.ok_or_else(|| Error::Split("fixed split needs a manifest".into()))?;
            Ok(alloc::vec![Split::from_manifest(docs, manifest)?])
        }
        SplitMode::CrossValidation => {
            if spec.folds < 2 {
                return Err(Error::Split(format!("need at least 2 folds, got {}", spec.folds)));
            }
            if docs.len() < spec.folds {
                return Err(Error::Split(format!(
                    "{} documents cannot fill {} folds",
                    docs.len(),
                    spec.folds
                )));
            }
            let mut order: Vec<usize> = (0..docs.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            order.shuffle(&mut rng);
            let base = docs.len() / spec.folds;
            let extra = docs.len() % spec.folds;
            let mut folds = Vec::with_capacity(spec.folds);
            let mut at = 0;
            for f in 0..spec.folds {
                let size = base + usize::from(f < extra);
                folds.push(order[at..at + size].to_vec());
                at += size;
            }
            let mut splits = Vec::with_capacity(spec.folds);
            for (f, test) in folds.iter().enumerate() {
                let mut pool: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| g != f)
                    .flat_map(|(_, fold)| fold.iter().copied())
                    .collect();
                let n_dev = libm::round(spec.dev_fraction * pool.len() as f64) as usize;
                let mut fold_rng = ChaCha8Rng::seed_from_u64(spec.seed);
                fold_rng.set_stream(f as u64 + 1);
                pool.shuffle(&mut fold_rng);
                let mut dev = pool[..n_dev].to_vec();
                let mut train = pool[n_dev..].to_vec();
                let mut test = test.clone();
                dev.sort_unstable();
                train.sort_unstable();
                test.sort_unstable();
                splits.push(Split { train, dev, test });
            }
            Ok(splits)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::manhunt;

    fn corpus(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| {
                let mut d = manhunt();
                d.doc_id = format!("doc{i}");
                d
            })
            .collect()
    }

    #[test]
    fn five_fold_partition() {
        let docs = corpus(20);
        let splits = split_corpus(&docs, &SplitSpec::cross_validation(5, 0.15, 7), None).unwrap();
        assert_eq!(splits.len(), 5);
        let mut union = BTreeSet::new();
        for s in &splits {
            assert_eq!(s.test.len(), 4);
            assert_eq!(s.dev.len(), 2); // round(0.15 * 16)
            assert_eq!(s.train.len() + s.dev.len() + s.test.len(), 20);
            let train: BTreeSet<_> = s.train.iter().collect();
            assert!(s.test.iter().all(|i| !train.contains(i)));
            assert!(s.dev.iter().all(|i| !train.contains(i) && !s.test.contains(i)));
            union.extend(s.test.iter().copied());
        }
        assert_eq!(union, (0..20).collect());
    }

    #[test]
    fn deterministic_given_seed() {
        let docs = corpus(20);
        let spec = SplitSpec::cross_validation(5, 0.15, 3);
        assert_eq!(split_corpus(&docs, &spec, None).unwrap(), split_corpus(&docs, &spec, None).unwrap());
        let other = SplitSpec::cross_validation(5, 0.15, 4);
        assert_ne!(split_corpus(&docs, &spec, None).unwrap(), split_corpus(&docs, &other, None).unwrap());
    }

    #[test]
    fn manifest_round_trip_and_errors() {
        let docs = corpus(4);
        let manifest = SplitManifest {
            train: alloc::vec!["doc0".into(), "doc2".into()],
            dev: alloc::vec!["doc1".into()],
            test: alloc::vec!["doc3".into()],
        };
        let splits = split_corpus(&docs, &SplitSpec::fixed(), Some(&manifest)).unwrap();
        assert_eq!(splits[0].train, [0, 2]);
        assert_eq!(splits[0].to_manifest(&docs), manifest);

        let mut bad = manifest.clone();
        bad.test.push("doc9".into());
        assert!(matches!(split_corpus(&docs, &SplitSpec::fixed(), Some(&bad)), Err(Error::Split(_))));
        let mut twice = manifest.clone();
        twice.dev.push("doc0".into());
        assert!(split_corpus(&docs, &SplitSpec::fixed(), Some(&twice)).is_err());
        assert!(split_corpus(&docs, &SplitSpec::fixed(), None).is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        let docs = corpus(10);
        assert!(split_corpus(&docs, &SplitSpec::cross_validation(1, 0.15, 0), None).is_err());
        assert!(split_corpus(&docs, &SplitSpec::cross_validation(5, 1.0, 0), None).is_err());
        assert!(split_corpus(&docs, &SplitSpec::cross_validation(5, 0.0, 0), None).is_err());
    }
}
