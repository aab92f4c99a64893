use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{ClassTree, ClassTreeParams};
use super::{feature_row, Classifier, Labeled, TrainSpec};
use crate::error::{invalid_input, Result};
use crate::features::FeatureVector;
use crate::nn::Matrix;
use crate::scalar::{from_usize, Scalar};
use crate::seed::derived_rng;

/// Bagged entropy trees; prediction is the mean leaf distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ForestModel<T> {
    class_count: usize,
    trees: Vec<ClassTree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    pub fn trees(&self) -> &[ClassTree<T>] {
        &self.trees
    }

    pub fn predict_row(&self, x: &[T]) -> Vec<T> {
        let mut p = vec![T::zero(); self.class_count];
        for tree in &self.trees {
            for (a, &b) in p.iter_mut().zip(tree.leaf_distribution(x)) {
                *a += b;
            }
        }
        let n = from_usize::<T>(self.trees.len());
        p.iter_mut().for_each(|v| *v /= n);
        p
    }
}

pub(crate) fn design_matrix<T: Scalar>(rows: &[&FeatureVector<T>]) -> Matrix<T> {
    let data = rows.iter().flat_map(|x| feature_row(x)).collect();
    Matrix::from_vec(rows.len(), FeatureVector::<T>::DIM, data)
}

pub fn train_random_forest<T: Scalar>(train: &Labeled<'_, FeatureVector<T>>, spec: &TrainSpec) -> Result<ForestModel<T>> {
    spec.validate()?;
    train.require_multiclass()?;
    let x = design_matrix(&train.x);
    let d = x.cols();
    let params = ClassTreeParams {
        class_count: train.class_count,
        max_features: spec.max_features.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize),
        min_samples_split: spec.min_samples_split,
    };
    let n = train.len();
    let trees = (0..spec.trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(spec.seed, "tree", i as u64);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            ClassTree::fit(&x, &train.y, bootstrap, &params, &mut rng)
        })
        .collect();
    Ok(ForestModel { class_count: train.class_count, trees })
}

impl<T: Scalar> Classifier<FeatureVector<T>, T> for ForestModel<T> {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_proba(&self, input: &FeatureVector<T>) -> Result<Vec<T>> {
        let row = feature_row(input);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("feature vector contains non-finite values"));
        }
        Ok(self.predict_row(&row))
    }
}
