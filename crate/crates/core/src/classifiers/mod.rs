//! Baseline classifiers: entropy random forest, softmax gradient boosting
//! and a graph convolutional network.

mod forest;
mod gbt;
mod gcn;
mod graph_net;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::scalar::Scalar;

pub use forest::{train_random_forest, ForestModel};
pub use gbt::{train_gbt, EarlyStopping, GbtModel};
pub use gcn::{init_gcn, train_gcn, GcnModel};
pub use graph_net::{
    fit_graph_net, FitOptions, GraphInput, GraphNet, GraphNetParams, ItemLoss, Standardizer, TrainItem, TrainingHistory,
};
pub use tree::{entropy, ClassTree, RegressionTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    RandomForest,
    Gbt,
    Gcn,
    Contrastive,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::RandomForest, Algo::Gbt, Algo::Gcn, Algo::Contrastive];

    pub fn name(self) -> &'static str {
        match self {
            Algo::RandomForest => "random_forest",
            Algo::Gbt => "gbt",
            Algo::Gcn => "gcn",
            Algo::Contrastive => "contrastive",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_forest" | "rf" => Ok(Algo::RandomForest),
            "gbt" => Ok(Algo::Gbt),
            "gcn" => Ok(Algo::Gcn),
            "contrastive" => Ok(Algo::Contrastive),
            other => Err(invalid_config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Hyperparameters for the three baselines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSpec {
    pub seed: u64,
    pub trees: usize,
    /// Features tried per split; `None` means `⌈√d⌉`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub gbt_rounds: usize,
    pub gbt_learning_rate: f64,
    pub gbt_max_depth: usize,
    pub gbt_min_samples_leaf: usize,
    pub early_stopping_patience: usize,
    pub gcn_hidden: usize,
    pub gcn_layers: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            seed: 0,
            trees: 100,
            max_features: None,
            min_samples_split: 2,
            gbt_rounds: 1000,
            gbt_learning_rate: 0.1,
            gbt_max_depth: 6,
            gbt_min_samples_leaf: 5,
            early_stopping_patience: 10,
            gcn_hidden: 18,
            gcn_layers: 3,
            batch_size: 5,
            epochs: 20,
            learning_rate: 0.01,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trees", self.trees),
            ("min_samples_split", self.min_samples_split),
            ("gbt_rounds", self.gbt_rounds),
            ("gbt_max_depth", self.gbt_max_depth),
            ("gbt_min_samples_leaf", self.gbt_min_samples_leaf),
            ("early_stopping_patience", self.early_stopping_patience),
            ("gcn_hidden", self.gcn_hidden),
            ("gcn_layers", self.gcn_layers),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(invalid_config(format!("{name} must be positive")));
        }
        if !(self.learning_rate > 0.0) || !(self.gbt_learning_rate > 0.0) {
            return Err(invalid_config("learning rates must be positive"));
        }
        Ok(())
    }
}

/// Shared prediction contract: a probability vector over the group's classes.
pub trait Classifier<I: ?Sized, T: Scalar> {
    fn class_count(&self) -> usize;

    fn predict_proba(&self, input: &I) -> Result<Vec<T>>;

    fn predict(&self, input: &I) -> Result<usize> {
        let p = self.predict_proba(input)?;
        Ok(argmax(&p))
    }
}

/// Index of the largest entry; the first wins ties.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Labeled examples borrowed from a larger pool.
#[derive(Clone, Debug)]
pub struct Labeled<'a, X> {
    pub x: Vec<&'a X>,
    pub y: Vec<usize>,
    pub class_count: usize,
}

impl<'a, X> Labeled<'a, X> {
    pub fn new(x: Vec<&'a X>, y: Vec<usize>, class_count: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid_input("inputs and labels differ in length"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= class_count) {
            return Err(invalid_input(format!("label {bad} outside 0..{class_count}")));
        }
        Ok(Labeled { x, y, class_count })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Errors unless at least two distinct classes are present.
    pub fn require_multiclass(&self) -> Result<()> {
        match self.y.first() {
            None => Err(Error::DegenerateModel("no training examples".into())),
            Some(&first) if self.y.iter().all(|&c| c == first) || self.class_count < 2 => {
                Err(Error::DegenerateModel("training data contains a single class".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Convenience for feature-vector models.
pub(crate) fn feature_row<T: Scalar>(x: &crate::features::FeatureVector<T>) -> [T; 4] {
    x.to_array()
}
