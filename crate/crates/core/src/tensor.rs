//! Dense row-major f64 matrices used for every trainable parameter.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Entries drawn uniformly from `[-scale, scale)`.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(-scale..scale)).collect();
        Tensor { rows, cols, data }
    }

    pub fn zeros_like(&self) -> Self {
        Tensor::zeros(self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// `out += self · x` over rows `row_offset..row_offset + out.len()`.
    pub fn matvec_rows_acc(&self, row_offset: usize, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (k, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(row_offset + k), x);
        }
    }

    /// `out += self · x`.
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.rows);
        self.matvec_rows_acc(0, x, out);
    }

    /// `out += selfᵀ · g` restricted to rows `row_offset..row_offset + g.len()`.
    pub fn matvec_t_rows_acc(&self, row_offset: usize, g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        for (k, &gk) in g.iter().enumerate() {
            if gk != 0.0 {
                axpy(gk, self.row(row_offset + k), out);
            }
        }
    }

    /// Rows `row_offset..` receive `g ⊗ x`.
    pub fn add_outer_rows(&mut self, row_offset: usize, g: &[f64], x: &[f64]) {
        for (k, &gk) in g.iter().enumerate() {
            if gk != 0.0 {
                axpy(gk, x, self.row_mut(row_offset + k));
            }
        }
    }

    pub fn add_outer(&mut self, g: &[f64], x: &[f64]) {
        self.add_outer_rows(0, g, x);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn add_into(x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let m = Tensor {
            rows: 2,
            cols: 3,
            data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        };
        let mut out = [0.0; 2];
        m.matvec_acc(&[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, [-2.0, -2.0]);
        let mut back = [0.0; 3];
        m.matvec_t_rows_acc(0, &[1.0, 1.0], &mut back);
        assert_eq!(back, [5.0, 7.0, 9.0]);
        let mut g = m.zeros_like();
        g.add_outer(&[1.0, 2.0], &[1.0, 0.0, 3.0]);
        assert_eq!(g.data, [1.0, 0.0, 3.0, 2.0, 0.0, 6.0]);
    }
}
