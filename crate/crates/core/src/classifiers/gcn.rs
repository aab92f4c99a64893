use serde::{Deserialize, Serialize};

use super::graph_net::{fit_graph_net, FitOptions, GraphInput, GraphNet, GraphNetParams, ItemLoss, Standardizer, TrainItem, TrainingHistory};
use super::{Classifier, Labeled, TrainSpec};
use crate::error::{invalid_input, Result};
use crate::features::NodeFeatureMatrix;
use crate::nn::{ConvStack, Linear};
use crate::scalar::Scalar;
use crate::seed::derived_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GcnModel<T> {
    pub net: GraphNet<T>,
    pub history: TrainingHistory,
}

/// Fresh GCN with `layers` convolutions of width `hidden`.
pub fn init_gcn<T: Scalar>(scaler: Standardizer<T>, spec: &TrainSpec, class_count: usize) -> Result<GraphNet<T>> {
    let mut rng = derived_rng(spec.seed, "gcn-init", 0);
    let mut widths = vec![NodeFeatureMatrix::<T>::DIM];
    widths.extend(std::iter::repeat(spec.gcn_hidden).take(spec.gcn_layers));
    let conv = ConvStack::new(&widths, &mut rng);
    let head = Linear::new(spec.gcn_hidden, class_count, &mut rng);
    GraphNet::new(scaler, GraphNetParams { conv, head })
}

pub fn train_gcn<T: Scalar>(
    train: &Labeled<'_, GraphInput<T>>,
    val: &Labeled<'_, GraphInput<T>>,
    spec: &TrainSpec,
) -> Result<GcnModel<T>> {
    spec.validate()?;
    if train.is_empty() {
        return Err(invalid_input("no training graphs"));
    }
    if let Some(bad) = train.x.iter().find(|g| g.x.cols() != NodeFeatureMatrix::<T>::DIM) {
        return Err(invalid_input(format!(
            "node features have {} columns, first layer expects {}",
            bad.x.cols(),
            NodeFeatureMatrix::<T>::DIM
        )));
    }
    let scaler = Standardizer::fit(train.x.iter().copied())?;
    let net = init_gcn(scaler, spec, train.class_count)?;
    let items: Vec<TrainItem<'_, T>> =
        train.x.iter().zip(&train.y).map(|(&input, &y)| TrainItem { input, loss: ItemLoss::CrossEntropy(y) }).collect();
    let opts = FitOptions {
        epochs: spec.epochs,
        batch_size: spec.batch_size,
        learning_rate: spec.learning_rate,
        seed: crate::seed::derive_seed(spec.seed, "gcn-batches", 0),
    };
    let (net, history) = fit_graph_net(net, &items, Some(val), &opts)?;
    Ok(GcnModel { net, history })
}

impl<T: Scalar> Classifier<GraphInput<T>, T> for GcnModel<T> {
    fn class_count(&self) -> usize {
        self.net.class_count()
    }

    fn predict_proba(&self, input: &GraphInput<T>) -> Result<Vec<T>> {
        self.net.predict_proba(input)
    }
}
