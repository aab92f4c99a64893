//! Minimal dense/graph neural-network kernels with hand-written backward
//! passes, shared by the GCN baseline and the contrastive encoder.

mod adam;
mod conv;
mod linear;
pub mod loss;
mod matrix;

pub use adam::{Adam, AdamConfig};
pub use conv::{ConvCache, ConvStack, NormAdj};
pub use linear::Linear;
pub use matrix::Matrix;

/// A model's trainable tensors as flat slices in a fixed order. Gradient
/// containers reuse the model type, so the two orders always agree.
pub trait ParamSet<T> {
    fn tensors(&self) -> Vec<&[T]>;
    fn tensors_mut(&mut self) -> Vec<&mut [T]>;
}

/// `acc += scale * g`.
pub(crate) fn accumulate<T: crate::scalar::Scalar, P: ParamSet<T>>(acc: &mut P, g: &P, scale: T) {
    for (a, b) in acc.tensors_mut().into_iter().zip(g.tensors()) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x += scale * y;
        }
    }
}

pub(crate) fn all_finite<T: crate::scalar::Scalar, P: ParamSet<T>>(p: &P) -> bool {
    p.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
}
