//! Single-file JSON checkpoints: a manifest plus named parameter tensors.
//! Floats are written in shortest round-trip form, so loading restores every
//! parameter bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sect_core::encoder::Vocab;
use sect_core::model::{Model, ModelConfig, ModelKind};
use sect_core::tensor::Tensor;
use sect_core::train::TrainConfig;
use sect_core::LabelSet;

use crate::error::{Result, SectError};
use crate::io::{read_json, write_json};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: u32,
    pub tool_version: String,
    pub model_kind: ModelKind,
    pub dim: usize,
    pub labels: LabelSet,
    pub config: ModelConfig,
    pub train_config: Option<TrainConfig>,
    pub seed: u64,
    pub vocab: Vocab,
    pub encoder_frozen: bool,
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub manifest: CheckpointManifest,
    pub tensors: BTreeMap<String, Tensor>,
}

impl Checkpoint {
    pub fn from_model(model: &Model, seed: u64, train_config: Option<&TrainConfig>, best_epoch: Option<usize>) -> Self {
        Checkpoint {
            manifest: CheckpointManifest {
                format: FORMAT_VERSION,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                model_kind: model.kind(),
                dim: model.dim(),
                labels: model.labels.clone(),
                config: model.config.clone(),
                train_config: train_config.cloned(),
                seed,
                vocab: model.encoders[0].vocab.clone(),
                encoder_frozen: model.encoder_frozen(),
                best_epoch,
            },
            tensors: model
                .tensors()
                .into_iter()
                .map(|(name, t, _)| (name, t.clone()))
                .collect(),
        }
    }

    /// Rebuilds the model; every stored tensor must match a model tensor in
    /// name and shape.
    pub fn to_model(&self) -> sect_core::Result<Model> {
        let m = &self.manifest;
        let mut vocab = m.vocab.clone();
        vocab.reindex();
        let mut model = Model::new(m.config.clone(), m.labels.clone(), vocab, m.seed)?;
        let mut seen = 0;
        for (name, tensor, _) in model.tensors_mut() {
            let stored = self
                .tensors
                .get(&name)
                .ok_or_else(|| sect_core::Error::Checkpoint(format!("missing tensor `{name}`")))?;
            if (stored.rows, stored.cols) != (tensor.rows, tensor.cols) || stored.data.len() != tensor.data.len() {
                return Err(sect_core::Error::Checkpoint(format!(
                    "tensor `{name}` is {}x{}, expected {}x{}",
                    stored.rows, stored.cols, tensor.rows, tensor.cols
                )));
            }
            tensor.data.copy_from_slice(&stored.data);
            seen += 1;
        }
        if seen != self.tensors.len() {
            return Err(sect_core::Error::Checkpoint("checkpoint has unknown tensors".into()));
        }
        model.set_frozen(m.encoder_frozen);
        Ok(model)
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    write_json(path, checkpoint)
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, CheckpointManifest)> {
    let ck: Checkpoint = read_json(path)?;
    if ck.manifest.format != FORMAT_VERSION {
        return Err(SectError::Checkpoint {
            path: path.to_path_buf(),
            message: format!("unsupported checkpoint format {}", ck.manifest.format),
        });
    }
    let model = ck.to_model().map_err(|e| SectError::Checkpoint {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((model, ck.manifest))
}
