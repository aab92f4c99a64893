//! Shared machinery for graph classifiers: a convolution stack with a linear
//! softmax head, trained with Adam on mini-batches of graphs.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, Classifier, Labeled};
use crate::cascade::{CascadeGraph, ObservationWindow};
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::features::node_features;
use crate::metrics::macro_f1;
use crate::nn::loss::{cross_entropy, distillation_kl, softmax};
use crate::nn::{accumulate, all_finite, Adam, AdamConfig, ConvStack, Linear, Matrix, NormAdj, ParamSet};
use crate::scalar::{cast, from_usize, to_f64, Scalar};
use crate::seed::derived_rng;

/// A graph ready for the network: normalized adjacency plus raw node features.
#[derive(Clone, Debug)]
pub struct GraphInput<T> {
    pub adj: NormAdj<T>,
    pub x: Matrix<T>,
}

impl<T: Scalar> GraphInput<T> {
    pub fn new(adj: NormAdj<T>, x: Matrix<T>) -> Result<Self> {
        if adj.len() != x.rows() || x.rows() == 0 {
            return Err(invalid_input("feature rows must match a non-empty adjacency"));
        }
        Ok(GraphInput { adj, x })
    }

    pub fn from_graph(g: &CascadeGraph<T>, window: &ObservationWindow) -> Result<Self> {
        let x = node_features(g, window)?.0;
        GraphInput::new(NormAdj::from_adjacency(&g.adjacency()), x)
    }

    pub fn node_count(&self) -> usize {
        self.x.rows()
    }
}

/// Per-column standardization fitted on training nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Standardizer<T> {
    mean: Vec<T>,
    scale: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn identity(dim: usize) -> Self {
        Standardizer { mean: vec![T::zero(); dim], scale: vec![T::one(); dim] }
    }

    pub fn fit<'a>(inputs: impl IntoIterator<Item = &'a GraphInput<T>>) -> Result<Self> {
        let mut dim = None;
        let mut count = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sq: Vec<f64> = Vec::new();
        for g in inputs {
            let d = *dim.get_or_insert(g.x.cols());
            if d != g.x.cols() {
                return Err(invalid_input("node feature widths differ between graphs"));
            }
            if sum.is_empty() {
                sum = vec![0.0; d];
                sq = vec![0.0; d];
            }
            for r in 0..g.x.rows() {
                for (c, &v) in g.x.row(r).iter().enumerate() {
                    let v = to_f64(v);
                    sum[c] += v;
                    sq[c] += v * v;
                }
            }
            count += g.x.rows();
        }
        let Some(d) = dim else {
            return Err(invalid_input("cannot fit a standardizer on no graphs"));
        };
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let scale = (0..d)
            .map(|c| {
                let var = (sq[c] / n - mean[c] * mean[c]).max(0.0);
                if var > 1e-12 { cast(var.sqrt()) } else { T::one() }
            })
            .collect();
        Ok(Standardizer { mean: mean.into_iter().map(cast).collect(), scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.dim() {
            return Err(invalid_input(format!("node features have {} columns, model expects {}", x.cols(), self.dim())));
        }
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.scale[c];
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GraphNetParams<T> {
    pub conv: ConvStack<T>,
    pub head: Linear<T>,
}

impl<T: Scalar> GraphNetParams<T> {
    pub fn zeros_like(&self) -> Self {
        GraphNetParams { conv: self.conv.zeros_like(), head: self.head.zeros_like() }
    }
}

impl<T: Scalar> ParamSet<T> for GraphNetParams<T> {
    fn tensors(&self) -> Vec<&[T]> {
        let mut t = self.conv.tensors();
        t.extend(self.head.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut t = self.conv.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }
}

/// Convolution stack, mean pool, linear head, softmax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GraphNet<T> {
    pub scaler: Standardizer<T>,
    pub params: GraphNetParams<T>,
}

/// Per-example objective.
#[derive(Clone, Debug)]
pub enum ItemLoss<T> {
    CrossEntropy(usize),
    /// `alpha · CE` (when labeled) plus `(1 - alpha) · T² · KL(teacher ‖ student)`.
    Distill { label: Option<usize>, teacher_soft: Vec<T>, alpha: T, temperature: T },
}

#[derive(Clone, Debug)]
pub struct TrainItem<'a, T> {
    pub input: &'a GraphInput<T>,
    pub loss: ItemLoss<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Mean training loss per epoch.
    pub loss: Vec<f64>,
    /// Validation macro-F1 per epoch; empty without validation data.
    pub val_macro_f1: Vec<f64>,
    /// Zero-based index of the returned epoch.
    pub best_epoch: usize,
}

impl<T: Scalar> GraphNet<T> {
    pub fn new(scaler: Standardizer<T>, params: GraphNetParams<T>) -> Result<Self> {
        if scaler.dim() != params.conv.input_dim() || params.conv.output_dim() != params.head.input_dim() {
            return Err(invalid_input("inconsistent layer shapes"));
        }
        Ok(GraphNet { scaler, params })
    }

    pub fn class_count(&self) -> usize {
        self.params.head.output_dim()
    }

    /// Mean-pooled graph embedding before the head.
    pub fn embedding(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        let x = self.scaler.apply(&input.x)?;
        Ok(self.params.conv.forward(&input.adj, &x)?.0)
    }

    pub fn logits(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        Ok(self.params.head.forward(&self.embedding(input)?))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.params)
    }

    fn item_loss_and_grad(&self, item: &TrainItem<'_, T>, grads: &mut GraphNetParams<T>) -> Result<T> {
        let x = self.scaler.apply(&item.input.x)?;
        let (pooled, cache) = self.params.conv.forward(&item.input.adj, &x)?;
        let logits = self.params.head.forward(&pooled);
        let (loss, d_logits) = match &item.loss {
            ItemLoss::CrossEntropy(label) => {
                if *label >= logits.len() {
                    return Err(invalid_input(format!("label {label} outside the head's classes")));
                }
                cross_entropy(&logits, *label)
            }
            ItemLoss::Distill { label, teacher_soft, alpha, temperature } => {
                if teacher_soft.len() != logits.len() {
                    return Err(invalid_input("teacher distribution has the wrong width"));
                }
                let (kl, d_kl) = distillation_kl(&logits, teacher_soft, *temperature);
                let soft_w = T::one() - *alpha;
                let mut loss = soft_w * kl;
                let mut grad: Vec<T> = d_kl.iter().map(|&g| soft_w * g).collect();
                if let Some(label) = label {
                    let (ce, d_ce) = cross_entropy(&logits, *label);
                    loss += *alpha * ce;
                    grad.iter_mut().zip(d_ce).for_each(|(g, d)| *g += *alpha * d);
                }
                (loss, grad)
            }
        };
        let d_pooled = self.params.head.backward(&pooled, &d_logits, &mut grads.head);
        self.params.conv.backward(&item.input.adj, &cache, &d_pooled, &mut grads.conv);
        Ok(loss)
    }

    /// Mean loss over `items` and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, items: &[TrainItem<'_, T>]) -> Result<(T, GraphNetParams<T>)> {
        if items.is_empty() {
            return Err(invalid_input("empty batch"));
        }
        let per_item: Vec<Result<(T, GraphNetParams<T>)>> = items
            .par_iter()
            .map(|item| {
                let mut g = self.params.zeros_like();
                let loss = self.item_loss_and_grad(item, &mut g)?;
                Ok((loss, g))
            })
            .collect();
        // Fixed-order reduction keeps results independent of scheduling.
        let scale = T::one() / from_usize::<T>(items.len());
        let mut total = T::zero();
        let mut grads = self.params.zeros_like();
        for r in per_item {
            let (loss, g) = r?;
            total += loss;
            accumulate(&mut grads, &g, scale);
        }
        Ok((total * scale, grads))
    }

    /// Mean loss only.
    pub fn loss(&self, items: &[TrainItem<'_, T>]) -> Result<T> {
        Ok(self.loss_and_grad(items)?.0)
    }

    pub fn macro_f1_on(&self, data: &Labeled<'_, GraphInput<T>>) -> Result<f64> {
        let preds = data
            .x
            .par_iter()
            .map(|g| self.logits(g).map(|l| argmax(&l)))
            .collect::<Result<Vec<usize>>>()?;
        let pairs: Vec<(usize, usize)> = preds.into_iter().zip(data.y.iter().copied()).collect();
        Ok(macro_f1(&pairs, self.class_count())?.macro_f1)
    }
}

impl<T: Scalar> Classifier<GraphInput<T>, T> for GraphNet<T> {
    fn class_count(&self) -> usize {
        GraphNet::class_count(self)
    }

    fn predict_proba(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        Ok(softmax(&self.logits(input)?))
    }
}

/// Adam on shuffled mini-batches; keeps the epoch with the best validation
/// macro-F1, later epochs winning ties.
pub fn fit_graph_net<T: Scalar>(
    mut net: GraphNet<T>,
    items: &[TrainItem<'_, T>],
    val: Option<&Labeled<'_, GraphInput<T>>>,
    opts: &FitOptions,
) -> Result<(GraphNet<T>, TrainingHistory)> {
    if items.is_empty() {
        return Err(invalid_input("no training graphs"));
    }
    if opts.epochs == 0 || opts.batch_size == 0 || !(opts.learning_rate > 0.0) {
        return Err(invalid_config("epochs, batch size and learning rate must be positive"));
    }
    let val = val.filter(|v| !v.is_empty());
    let mut adam = Adam::new(AdamConfig::with_lr(opts.learning_rate), &net.params);
    let mut history = TrainingHistory::default();
    let mut best: Option<(f64, GraphNet<T>)> = None;
    let mut order: Vec<usize> = (0..items.len()).collect();
    for epoch in 0..opts.epochs {
        let mut rng = derived_rng(opts.seed, "epoch", epoch as u64);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(opts.batch_size) {
            let batch: Vec<TrainItem<'_, T>> = chunk.iter().map(|&i| items[i].clone()).collect();
            let (loss, grads) = net.loss_and_grad(&batch)?;
            loss_sum += to_f64(loss) * chunk.len() as f64;
            adam.step(&mut net.params, &grads);
        }
        if !net.is_finite() {
            return Err(Error::DegenerateModel(format!("parameters diverged in epoch {}", epoch + 1)));
        }
        history.loss.push(loss_sum / items.len() as f64);
        if let Some(val) = val {
            let f1 = net.macro_f1_on(val)?;
            history.val_macro_f1.push(f1);
            if best.as_ref().map_or(true, |(b, _)| f1 >= *b) {
                best = Some((f1, net.clone()));
                history.best_epoch = epoch;
            }
        }
    }
    match best {
        Some((_, chosen)) => Ok((chosen, history)),
        None => {
            history.best_epoch = opts.epochs - 1;
            Ok((net, history))
        }
    }
}
