use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::design_matrix;
use super::tree::RegressionTree;
use super::{feature_row, Classifier, Labeled, TrainSpec};
use crate::error::{invalid_input, Result};
use crate::features::FeatureVector;
use crate::nn::loss::softmax;
use crate::scalar::{cast, Scalar};

/// Patience-based stop rule on a loss stream.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_index: Option<usize>,
    stale: usize,
    seen: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping { patience, best: f64::INFINITY, best_index: None, stale: 0, seen: 0 }
    }

    /// Records the next loss; returns `true` once training should halt.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.best_index = Some(self.seen);
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.seen += 1;
        self.stale >= self.patience
    }

    /// Zero-based index of the best loss seen.
    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

/// Softmax boosting ensemble: `rounds[r][k]` is class `k`'s tree in round `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GbtModel<T> {
    class_count: usize,
    learning_rate: T,
    rounds: Vec<Vec<RegressionTree<T>>>,
    /// Rounds performed before stopping; `rounds.len() == best_round`.
    pub rounds_trained: usize,
    pub best_round: usize,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

impl<T: Scalar> GbtModel<T> {
    pub fn raw_scores(&self, x: &[T]) -> Vec<T> {
        let mut f = vec![T::zero(); self.class_count];
        for round in &self.rounds {
            for (s, tree) in f.iter_mut().zip(round) {
                *s += self.learning_rate * tree.predict(x);
            }
        }
        f
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }
}

fn mean_log_loss<T: Scalar>(scores: &[Vec<T>], y: &[usize]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(f, &c)| {
            let p = crate::scalar::to_f64(softmax(f)[c]);
            -p.max(f64::MIN_POSITIVE).ln()
        })
        .sum();
    total / y.len() as f64
}

pub fn train_gbt<T: Scalar>(
    train: &Labeled<'_, FeatureVector<T>>,
    val: &Labeled<'_, FeatureVector<T>>,
    spec: &TrainSpec,
) -> Result<GbtModel<T>> {
    spec.validate()?;
    train.require_multiclass()?;
    if val.is_empty() {
        return Err(invalid_input("validation set is empty"));
    }
    if val.class_count != train.class_count {
        return Err(invalid_input("train and validation class counts differ"));
    }
    let k = train.class_count;
    let lr: T = cast(spec.gbt_learning_rate);
    let x = design_matrix(&train.x);
    let xv = design_matrix(&val.x);
    let n = train.len();
    let mut f_train = vec![vec![T::zero(); k]; n];
    let mut f_val = vec![vec![T::zero(); k]; val.len()];
    let mut model = GbtModel {
        class_count: k,
        learning_rate: lr,
        rounds: Vec::new(),
        rounds_trained: 0,
        best_round: 0,
        train_loss: Vec::new(),
        val_loss: Vec::new(),
    };
    let mut stopper = EarlyStopping::new(spec.early_stopping_patience);
    stopper.observe(mean_log_loss(&f_val, &val.y));
    for _ in 0..spec.gbt_rounds {
        let probs: Vec<Vec<T>> = f_train.iter().map(|f| softmax(f)).collect();
        let round: Vec<RegressionTree<T>> = (0..k)
            .into_par_iter()
            .map(|c| {
                let residual: Vec<T> = probs
                    .iter()
                    .zip(&train.y)
                    .map(|(p, &yc)| if yc == c { T::one() - p[c] } else { -p[c] })
                    .collect();
                RegressionTree::fit(&x, &residual, (0..n).collect(), spec.gbt_max_depth, spec.gbt_min_samples_leaf)
            })
            .collect();
        for (i, f) in f_train.iter_mut().enumerate() {
            for (s, tree) in f.iter_mut().zip(&round) {
                *s += lr * tree.predict(x.row(i));
            }
        }
        for (i, f) in f_val.iter_mut().enumerate() {
            for (s, tree) in f.iter_mut().zip(&round) {
                *s += lr * tree.predict(xv.row(i));
            }
        }
        model.rounds.push(round);
        model.train_loss.push(mean_log_loss(&f_train, &train.y));
        let vl = mean_log_loss(&f_val, &val.y);
        model.val_loss.push(vl);
        if stopper.observe(vl) {
            break;
        }
    }
    model.rounds_trained = model.rounds.len();
    // Index 0 of the stopper is the untrained model.
    model.best_round = stopper.best_index().unwrap_or(0);
    model.rounds.truncate(model.best_round);
    Ok(model)
}

impl<T: Scalar> Classifier<FeatureVector<T>, T> for GbtModel<T> {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_proba(&self, input: &FeatureVector<T>) -> Result<Vec<T>> {
        let row = feature_row(input);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("feature vector contains non-finite values"));
        }
        Ok(softmax(&self.raw_scores(&row)))
    }
}
