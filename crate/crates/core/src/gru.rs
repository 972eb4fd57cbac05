//! Gated recurrent unit layers with hand-written backpropagation.
//!
//! Gate layout follows the common convention, rows of `w_ih`/`w_hh` stacked
//! as reset, update, candidate:
//!
//! ```text
//! r  = σ(W_ir x + b_ir + W_hr h + b_hr)
//! z  = σ(W_iz x + b_iz + W_hz h + b_hz)
//! n  = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{sigmoid, tanh};
use crate::tensor::{add_into, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct GruLayer {
    pub w_ih: Tensor,
    pub w_hh: Tensor,
    pub b_ih: Tensor,
    pub b_hh: Tensor,
}

/// Values saved by a forward step for the backward pass.
#[derive(Debug, Clone)]
pub struct GruCache {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub n: Vec<f64>,
    /// `W_hn h + b_hn`
    pub hn: Vec<f64>,
    pub out: Vec<f64>,
}

impl GruLayer {
    /// Weights uniform in `±1/sqrt(hidden)`.
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let s = 1.0 / libm::sqrt(hidden as f64);
        GruLayer {
            w_ih: Tensor::uniform(3 * hidden, input, s, rng),
            w_hh: Tensor::uniform(3 * hidden, hidden, s, rng),
            b_ih: Tensor::uniform(1, 3 * hidden, s, rng),
            b_hh: Tensor::uniform(1, 3 * hidden, s, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        GruLayer {
            w_ih: self.w_ih.zeros_like(),
            w_hh: self.w_hh.zeros_like(),
            b_ih: self.b_ih.zeros_like(),
            b_hh: self.b_hh.zeros_like(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols
    }

    pub fn tensors(&self) -> [(&'static str, &Tensor); 4] {
        [("w_ih", &self.w_ih), ("w_hh", &self.w_hh), ("b_ih", &self.b_ih), ("b_hh", &self.b_hh)]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 4] {
        [
            ("w_ih", &mut self.w_ih),
            ("w_hh", &mut self.w_hh),
            ("b_ih", &mut self.b_ih),
            ("b_hh", &mut self.b_hh),
        ]
    }

    pub fn forward(&self, x: &[f64], h: &[f64]) -> GruCache {
        let d = self.hidden();
        let (bi, bh) = (self.b_ih.row(0), self.b_hh.row(0));
        let mut r = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut n = vec![0.0; d];
        let mut hn = bh[2 * d..].to_vec();
        self.w_hh.matvec_rows_acc(2 * d, h, &mut hn);

        let mut pre = [&mut r, &mut z];
        for (g, gate) in pre.iter_mut().enumerate() {
            for k in 0..d {
                gate[k] = bi[g * d + k] + bh[g * d + k];
            }
            self.w_ih.matvec_rows_acc(g * d, x, gate);
            self.w_hh.matvec_rows_acc(g * d, h, gate);
        }
        n.copy_from_slice(&bi[2 * d..]);
        self.w_ih.matvec_rows_acc(2 * d, x, &mut n);

        let mut out = vec![0.0; d];
        for k in 0..d {
            r[k] = sigmoid(r[k]);
            z[k] = sigmoid(z[k]);
            n[k] = tanh(n[k] + r[k] * hn[k]);
            out[k] = (1.0 - z[k]) * n[k] + z[k] * h[k];
        }
        GruCache {
            x: x.to_vec(),
            h: h.to_vec(),
            r,
            z,
            n,
            hn,
            out,
        }
    }

    /// Given `d_out = ∂L/∂h'`, accumulates parameter gradients into `grads`
    /// and returns `(∂L/∂x, ∂L/∂h)`.
    pub fn backward(&self, cache: &GruCache, d_out: &[f64], grads: &mut GruLayer) -> (Vec<f64>, Vec<f64>) {
        let d = self.hidden();
        let mut da = vec![0.0; 3 * d]; // pre-activation grads for r, z, n (input side)
        let mut dhn = vec![0.0; d];
        let mut dh = vec![0.0; d];
        for k in 0..d {
            let (r, z, n) = (cache.r[k], cache.z[k], cache.n[k]);
            let dn = d_out[k] * (1.0 - z);
            let dz = d_out[k] * (cache.h[k] - n);
            dh[k] = d_out[k] * z;
            let dan = dn * (1.0 - n * n);
            let dr = dan * cache.hn[k];
            dhn[k] = dan * r;
            da[k] = dr * r * (1.0 - r);
            da[d + k] = dz * z * (1.0 - z);
            da[2 * d + k] = dan;
        }
        // hidden-side pre-activations: r and z share da, candidate uses dhn
        let mut dah = da.clone();
        dah[2 * d..].copy_from_slice(&dhn);

        grads.w_ih.add_outer(&da, &cache.x);
        add_into(&da, grads.b_ih.row_mut(0));
        grads.w_hh.add_outer(&dah, &cache.h);
        add_into(&dah, grads.b_hh.row_mut(0));

        let mut dx = vec![0.0; self.w_ih.cols];
        self.w_ih.matvec_t_rows_acc(0, &da, &mut dx);
        self.w_hh.matvec_t_rows_acc(0, &dah, &mut dh);
        (dx, dh)
    }
}

/// A left-to-right stack of GRU layers; layer `l + 1` reads the output of
/// layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStack {
    pub layers: Vec<GruLayer>,
}

#[derive(Debug, Clone)]
pub struct StackCache {
    pub layers: Vec<GruCache>,
}

impl StackCache {
    pub fn top(&self) -> &[f64] {
        &self.layers.last().expect("non-empty stack").out
    }

    pub fn hiddens(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|c| c.out.clone()).collect()
    }
}

impl GruStack {
    pub fn new<R: Rng + ?Sized>(dim: usize, layers: usize, rng: &mut R) -> Self {
        GruStack {
            layers: (0..layers).map(|_| GruLayer::new(dim, dim, rng)).collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        GruStack {
            layers: self.layers.iter().map(GruLayer::zeros_like).collect(),
        }
    }

    pub fn step(&self, x: &[f64], hiddens: &[Vec<f64>]) -> StackCache {
        let mut caches: Vec<GruCache> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let input = caches.last().map_or(x, |c| c.out.as_slice());
            caches.push(layer.forward(input, &hiddens[l]));
        }
        StackCache { layers: caches }
    }

    /// `d_hiddens[l]` is `∂L/∂(output of layer l)` at this step. Returns
    /// `∂L/∂x` and the gradients for the previous hiddens.
    pub fn backward_step(
        &self,
        cache: &StackCache,
        mut d_hiddens: Vec<Vec<f64>>,
        grads: &mut GruStack,
    ) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut d_prev = vec![Vec::new(); self.layers.len()];
        let mut dx = Vec::new();
        for l in (0..self.layers.len()).rev() {
            let (d_in, dh) = self.layers[l].backward(&cache.layers[l], &d_hiddens[l], &mut grads.layers[l]);
            d_prev[l] = dh;
            if l > 0 {
                add_into(&d_in, &mut d_hiddens[l - 1]);
            } else {
                dx = d_in;
            }
        }
        (dx, d_prev)
    }
}
