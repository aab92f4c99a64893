use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, ParamSet};
use crate::scalar::Scalar;

/// Affine map `y = x W + b` on a single vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Linear<T> {
    weight: Matrix<T>,
    bias: Vec<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn new<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        Linear { weight: Matrix::glorot(input, output, rng), bias: vec![T::zero(); output] }
    }

    pub fn zeros_like(&self) -> Self {
        Linear { weight: Matrix::zeros(self.weight.rows(), self.weight.cols()), bias: vec![T::zero(); self.bias.len()] }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.input_dim());
        let mut y = self.bias.clone();
        for (i, &xi) in x.iter().enumerate() {
            for (o, &w) in y.iter_mut().zip(self.weight.row(i)) {
                *o += xi * w;
            }
        }
        y
    }

    /// Accumulates parameter gradients; returns `∂L/∂x`.
    pub fn backward(&self, x: &[T], d_y: &[T], grads: &mut Linear<T>) -> Vec<T> {
        for (b, &g) in grads.bias.iter_mut().zip(d_y) {
            *b += g;
        }
        let mut d_x = vec![T::zero(); x.len()];
        for (i, &xi) in x.iter().enumerate() {
            let w_row = self.weight.row(i);
            let g_row = grads.weight.row_mut(i);
            let mut acc = T::zero();
            for j in 0..d_y.len() {
                g_row[j] += xi * d_y[j];
                acc += w_row[j] * d_y[j];
            }
            d_x[i] = acc;
        }
        d_x
    }
}

impl<T: Scalar> ParamSet<T> for Linear<T> {
    fn tensors(&self) -> Vec<&[T]> {
        vec![self.weight.as_slice(), &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.weight.as_mut_slice(), &mut self.bias]
    }
}
