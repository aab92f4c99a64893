//! Per-class and macro-averaged F1 from (predicted, true) pairs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Summary {
    pub per_class_f1: Vec<f64>,
    pub macro_f1: f64,
    /// `confusion_matrix[true][predicted]`.
    pub confusion_matrix: Vec<Vec<u64>>,
}

/// F1 is 0 for a class whose precision and recall are both 0, and such
/// classes still count toward the macro mean.
pub fn macro_f1(predictions: &[(usize, usize)], class_count: usize) -> Result<F1Summary> {
    if predictions.is_empty() {
        return Err(invalid_input("macro_f1 needs at least one prediction"));
    }
    if class_count == 0 {
        return Err(invalid_input("class_count must be positive"));
    }
    let mut confusion = vec![vec![0u64; class_count]; class_count];
    for &(pred, truth) in predictions {
        if pred >= class_count || truth >= class_count {
            return Err(invalid_input(format!("label outside 0..{class_count}")));
        }
        confusion[truth][pred] += 1;
    }
    let per_class_f1: Vec<f64> = (0..class_count)
        .map(|k| {
            let tp = confusion[k][k] as f64;
            let predicted: u64 = confusion.iter().map(|row| row[k]).sum();
            let actual: u64 = confusion[k].iter().sum();
            // 2PR/(P+R) == 2TP/(predicted + actual)
            let denom = (predicted + actual) as f64;
            if tp == 0.0 || denom == 0.0 {
                0.0
            } else {
                2.0 * tp / denom
            }
        })
        .collect();
    let macro_f1 = per_class_f1.iter().sum::<f64>() / class_count as f64;
    Ok(F1Summary { per_class_f1, macro_f1, confusion_matrix: confusion })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let s = macro_f1(&[(0, 0), (1, 1), (2, 2), (1, 1)], 3).unwrap();
        assert_eq!(s.macro_f1, 1.0);
    }

    #[test]
    fn hand_worked_two_class_case() {
        // confusion [[2, 0], [1, 1]]
        let s = macro_f1(&[(0, 0), (0, 0), (0, 1), (1, 1)], 2).unwrap();
        assert_eq!(s.confusion_matrix, vec![vec![2, 0], vec![1, 1]]);
        assert!((s.per_class_f1[0] - 0.8).abs() < 1e-15);
        assert!((s.per_class_f1[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.macro_f1 - 11.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn never_predicted_class_scores_zero() {
        let s = macro_f1(&[(0, 0), (0, 1), (0, 1)], 2).unwrap();
        assert_eq!(s.per_class_f1[1], 0.0);
        assert!((s.macro_f1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert!(macro_f1(&[], 2).is_err());
        assert!(macro_f1(&[(2, 0)], 2).is_err());
    }
}
