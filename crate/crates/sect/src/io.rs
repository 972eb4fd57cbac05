//! JSON Lines corpora, label-set files, split manifests and checksums.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use sect_core::corpus::{Document, SplitManifest};
use sect_core::LabelSet;

use crate::error::{Result, SectError};

/// Reads one document per non-blank line and validates each against
/// `labels`. Errors carry the 1-based line number.
pub fn load_corpus(path: &Path, labels: &LabelSet) -> Result<Vec<Document>> {
    let file = fs::File::open(path).map_err(|e| SectError::io(path, e))?;
    let mut docs = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SectError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let doc: Document = serde_json::from_str(&line).map_err(|source| SectError::Parse {
            path: path.to_path_buf(),
            line: n,
            source,
        })?;
        let invalid = |source| SectError::Invalid {
            path: path.to_path_buf(),
            line: n,
            source,
        };
        doc.validate(labels).map_err(invalid)?;
        if !ids.insert(doc.doc_id.clone()) {
            return Err(invalid(sect_core::Error::Validation {
                doc_id: doc.doc_id.clone(),
                field: "doc_id".into(),
                message: "duplicate document id".into(),
            }));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes compact JSON Lines; `load_corpus` reads it back unchanged.
pub fn save_corpus(path: &Path, docs: &[Document]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| SectError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for doc in docs {
        let line = serde_json::to_string(doc).map_err(|source| SectError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(w, "{line}").map_err(|e| SectError::io(path, e))?;
    }
    w.flush().map_err(|e| SectError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| SectError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| SectError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| SectError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| SectError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| SectError::io(path, e))
}

/// The dense six-label set, or a label-set JSON file.
pub fn load_label_set(path: Option<&Path>) -> Result<LabelSet> {
    match path {
        None => Ok(LabelSet::default()),
        Some(p) => read_json(p),
    }
}

pub fn load_split_manifest(path: &Path) -> Result<SplitManifest> {
    read_json(path)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| SectError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
