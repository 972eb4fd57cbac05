//! AdamW with decoupled weight decay.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{powi, sqrt};
use crate::model::Model;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Global gradient-norm clip; off when `None`.
    #[serde(default)]
    pub max_grad_norm: Option<f64>,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 5e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
            max_grad_norm: None,
        }
    }
}

#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

/// Optimizer state, one moment pair per model tensor.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub config: AdamWConfig,
    state: Vec<Moments>,
}

impl AdamW {
    pub fn new(config: AdamWConfig, model: &Model) -> Self {
        let state = model
            .tensors()
            .iter()
            .map(|(_, t, _)| Moments {
                m: alloc::vec![0.0; t.len()],
                v: alloc::vec![0.0; t.len()],
                step: 0,
            })
            .collect();
        AdamW { config, state }
    }

    /// Applies one update. Frozen encoder tensors are skipped entirely: no
    /// decay, no moment update.
    pub fn step(&mut self, model: &mut Model, grads: &Model) {
        let grad_tensors: Vec<&Tensor> = grads.tensors().into_iter().map(|(_, t, _)| t).collect();
        let mut scale = 1.0;
        if let Some(max_norm) = self.config.max_grad_norm {
            let norm = sqrt(
                grad_tensors
                    .iter()
                    .flat_map(|t| t.data.iter())
                    .map(|g| g * g)
                    .sum(),
            );
            if norm > max_norm && norm > 0.0 {
                scale = max_norm / norm;
            }
        }
        let c = &self.config;
        for (((_, param, frozen), grad), st) in model
            .tensors_mut()
            .into_iter()
            .zip(grad_tensors)
            .zip(self.state.iter_mut())
        {
            if frozen {
                continue;
            }
            st.step += 1;
            let bc1 = 1.0 - powi(c.beta1, st.step);
            let bc2 = 1.0 - powi(c.beta2, st.step);
            for i in 0..param.data.len() {
                let g = grad.data[i] * scale;
                st.m[i] = c.beta1 * st.m[i] + (1.0 - c.beta1) * g;
                st.v[i] = c.beta2 * st.v[i] + (1.0 - c.beta2) * g * g;
                let m_hat = st.m[i] / bc1;
                let v_hat = st.v[i] / bc2;
                param.data[i] *= 1.0 - c.lr * c.weight_decay;
                param.data[i] -= c.lr * m_hat / (sqrt(v_hat) + c.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::manhunt;
    use crate::encoder::Vocab;
    use crate::model::{ModelConfig, ModelKind};
    use crate::{Category, LabelSet};

    fn model() -> Model {
        let doc = manhunt();
        let cfg = ModelConfig::new(ModelKind::Multi, 3, &[Category::E2D]);
        Model::new(cfg, LabelSet::default(), Vocab::from_documents([&doc]), 0).unwrap()
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut m = model();
        let before = m.clone();
        let mut g = m.zeros_like();
        g.heads.get_mut(&Category::E2D).unwrap().bias.data[0] = 0.5;
        let cfg = AdamWConfig {
            lr: 0.1,
            weight_decay: 0.0,
            ..AdamWConfig::default()
        };
        let mut opt = AdamW::new(cfg, &m);
        opt.step(&mut m, &g);
        let delta = before.heads[&Category::E2D].bias.data[0] - m.heads[&Category::E2D].bias.data[0];
        assert!((delta - 0.1).abs() < 1e-6);
        assert_eq!(m.heads[&Category::E2D].bias.data[1], before.heads[&Category::E2D].bias.data[1]);
    }

    #[test]
    fn frozen_tensors_untouched_even_with_decay() {
        let mut m = model();
        m.set_frozen(true);
        let fp = m.encoder_fingerprint();
        let mut g = m.zeros_like();
        g.encoders[0].tokens.fill(1.0);
        let mut opt = AdamW::new(AdamWConfig::default(), &m);
        for _ in 0..5 {
            opt.step(&mut m, &g);
        }
        assert_eq!(m.encoder_fingerprint(), fp);
    }

    #[test]
    fn clipping_scales_gradients() {
        let mut a = model();
        let mut b = model();
        let mut g = a.zeros_like();
        g.heads.get_mut(&Category::E2D).unwrap().bias.data[0] = 100.0;
        let mut clipped = AdamW::new(
            AdamWConfig {
                lr: 0.1,
                weight_decay: 0.0,
                max_grad_norm: Some(1.0),
                ..AdamWConfig::default()
            },
            &a,
        );
        let mut plain = AdamW::new(
            AdamWConfig {
                lr: 0.1,
                weight_decay: 0.0,
                ..AdamWConfig::default()
            },
            &b,
        );
        clipped.step(&mut a, &g);
        plain.step(&mut b, &g);
        // Adam is scale-invariant on the first step up to eps.
        let da = a.heads[&Category::E2D].bias.data[0];
        let db = b.heads[&Category::E2D].bias.data[0];
        assert!((da - db).abs() < 1e-6);
    }
}
