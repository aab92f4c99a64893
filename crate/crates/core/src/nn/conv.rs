use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, ParamSet};
use crate::error::{invalid_input, Result};
use crate::scalar::{cast, Scalar};

/// Symmetrically normalized adjacency with self-loops,
/// `D̃^(-1/2) (A + I) D̃^(-1/2)`, stored as sparse rows.
#[derive(Clone, Debug)]
pub struct NormAdj<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> NormAdj<T> {
    pub fn from_adjacency(adj: &[Vec<usize>]) -> Self {
        let deg: Vec<f64> = adj.iter().map(|nbrs| (nbrs.len() + 1) as f64).collect();
        let weight = |i: usize, j: usize| cast::<T>(1.0 / (deg[i] * deg[j]).sqrt());
        let rows = adj
            .iter()
            .enumerate()
            .map(|(i, nbrs)| {
                let mut row: Vec<(usize, T)> = nbrs.iter().map(|&j| (j, weight(i, j))).collect();
                row.push((i, weight(i, i)));
                row.sort_unstable_by_key(|&(j, _)| j);
                row
            })
            .collect();
        NormAdj { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `Â * h`. `Â` is symmetric, so this is also its own adjoint.
    pub fn propagate(&self, h: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(h.rows(), h.cols());
        for (i, row) in self.rows.iter().enumerate() {
            let o = out.row_mut(i);
            for &(j, w) in row {
                for (x, &y) in o.iter_mut().zip(h.row(j)) {
                    *x += w * y;
                }
            }
        }
        out
    }
}

/// Stack of graph convolutions `H' = ReLU(Â H W)` followed by mean pooling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConvStack<T> {
    weights: Vec<Matrix<T>>,
}

/// Activations kept from the forward pass.
pub struct ConvCache<T> {
    /// `Â H` for each layer input.
    propagated: Vec<Matrix<T>>,
    /// Pre-activation `Â H W` per layer.
    pre: Vec<Matrix<T>>,
}

impl<T: Scalar> ConvStack<T> {
    /// `widths = [input, hidden_1, ..., output]`.
    pub fn new<R: Rng>(widths: &[usize], rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "need at least one layer");
        let weights = widths.windows(2).map(|w| Matrix::glorot(w[0], w[1], rng)).collect();
        ConvStack { weights }
    }

    pub fn zeros_like(&self) -> Self {
        ConvStack { weights: self.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect() }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().map_or(0, Matrix::cols)
    }

    pub fn layers(&self) -> &[Matrix<T>] {
        &self.weights
    }

    /// Node embeddings after the last layer.
    pub fn node_embeddings(&self, adj: &NormAdj<T>, x: &Matrix<T>) -> Result<(Matrix<T>, ConvCache<T>)> {
        if x.cols() != self.input_dim() {
            return Err(invalid_input(format!(
                "node features have {} columns, first layer expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        if x.rows() != adj.len() || x.rows() == 0 {
            return Err(invalid_input("feature rows must match a non-empty adjacency"));
        }
        let mut cache = ConvCache { propagated: Vec::with_capacity(self.weights.len()), pre: Vec::with_capacity(self.weights.len()) };
        let mut h = x.clone();
        for w in &self.weights {
            let ah = adj.propagate(&h);
            let z = ah.matmul(w);
            h = z.clone();
            h.as_mut_slice().iter_mut().for_each(|v| *v = v.max(T::zero()));
            cache.propagated.push(ah);
            cache.pre.push(z);
        }
        Ok((h, cache))
    }

    /// Mean-pooled graph embedding.
    pub fn forward(&self, adj: &NormAdj<T>, x: &Matrix<T>) -> Result<(Vec<T>, ConvCache<T>)> {
        let (h, cache) = self.node_embeddings(adj, x)?;
        Ok((h.mean_rows(), cache))
    }

    /// Accumulates weight gradients into `grads` given `d_pooled = ∂L/∂pooled`.
    pub fn backward(&self, adj: &NormAdj<T>, cache: &ConvCache<T>, d_pooled: &[T], grads: &mut ConvStack<T>) {
        let n = adj.len();
        let inv_n = T::one() / cast::<T>(n as f64);
        let width = self.output_dim();
        let mut d_h = Matrix::zeros(n, width);
        for i in 0..n {
            for (x, &g) in d_h.row_mut(i).iter_mut().zip(d_pooled) {
                *x = g * inv_n;
            }
        }
        for layer in (0..self.weights.len()).rev() {
            let mut d_z = d_h;
            for (g, &z) in d_z.as_mut_slice().iter_mut().zip(cache.pre[layer].as_slice()) {
                if z <= T::zero() {
                    *g = T::zero();
                }
            }
            let d_w = cache.propagated[layer].t_matmul(&d_z);
            for (a, &b) in grads.weights[layer].as_mut_slice().iter_mut().zip(d_w.as_slice()) {
                *a += b;
            }
            if layer == 0 {
                break;
            }
            let d_ah = d_z.matmul_t(&self.weights[layer]);
            d_h = adj.propagate(&d_ah);
        }
    }
}

impl<T: Scalar> ParamSet<T> for ConvStack<T> {
    fn tensors(&self) -> Vec<&[T]> {
        self.weights.iter().map(Matrix::as_slice).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.weights.iter_mut().map(Matrix::as_mut_slice).collect()
    }
}
