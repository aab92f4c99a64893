//! Softmax-family losses and their gradients with respect to logits or
//! embeddings.

use crate::error::{invalid_input, Result};
use crate::scalar::{cast, Scalar};

pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    softmax_with_temperature(logits, T::one())
}

pub fn softmax_with_temperature<T: Scalar>(logits: &[T], temperature: T) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&l| ((l - max) / temperature).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy `-ln p_target` and its gradient `p - onehot`.
pub fn cross_entropy<T: Scalar>(logits: &[T], target: usize) -> (T, Vec<T>) {
    let mut p = softmax(logits);
    let loss = -(p[target].max(T::min_positive_value())).ln();
    p[target] -= T::one();
    (loss, p)
}

/// Distillation term `T² · KL(teacher_T ‖ student_T)` and its gradient with
/// respect to the student's logits, `T · (student_T - teacher_T)`.
pub fn distillation_kl<T: Scalar>(student_logits: &[T], teacher_soft: &[T], temperature: T) -> (T, Vec<T>) {
    let student_soft = softmax_with_temperature(student_logits, temperature);
    let tiny = T::min_positive_value();
    let kl: T = teacher_soft
        .iter()
        .zip(&student_soft)
        .filter(|(&pt, _)| pt > T::zero())
        .map(|(&pt, &ps)| pt * (pt.ln() - ps.max(tiny).ln()))
        .sum();
    let grad = student_soft.iter().zip(teacher_soft).map(|(&ps, &pt)| temperature * (ps - pt)).collect();
    (temperature * temperature * kl, grad)
}

/// Normalized-temperature cross-entropy over `2N` views where views `2i` and
/// `2i + 1` are positives of each other. Returns the mean loss over all views
/// and the gradient with respect to every (unnormalized) embedding.
pub fn nt_xent<T: Scalar>(views: &[Vec<T>], temperature: T) -> Result<(T, Vec<Vec<T>>)> {
    let m = views.len();
    if m < 4 || m % 2 != 0 {
        return Err(invalid_input("nt_xent needs an even number of views, at least 4"));
    }
    let norms: Vec<T> = views.iter().map(|z| z.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    if norms.iter().any(|&n| !(n > T::zero())) {
        return Err(invalid_input("nt_xent embeddings must be non-zero"));
    }
    let unit: Vec<Vec<T>> = views.iter().zip(&norms).map(|(z, &n)| z.iter().map(|&x| x / n).collect()).collect();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let mut sim = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let s = dot(&unit[i], &unit[j]) / temperature;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let partner = |i: usize| i ^ 1;
    let inv_m = T::one() / cast::<T>(m as f64);
    let mut loss = T::zero();
    // coeff[i][k] = ∂L/∂s_ik from row i.
    let mut coeff = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        let max = (0..m).filter(|&k| k != i).map(|k| sim[i][k]).fold(T::neg_infinity(), T::max);
        let denom: T = (0..m).filter(|&k| k != i).map(|k| (sim[i][k] - max).exp()).sum();
        let log_denom = denom.ln() + max;
        loss += log_denom - sim[i][partner(i)];
        for k in (0..m).filter(|&k| k != i) {
            let p = (sim[i][k] - log_denom).exp();
            let target = if k == partner(i) { T::one() } else { T::zero() };
            coeff[i][k] = (p - target) * inv_m;
        }
    }
    loss *= inv_m;

    let dim = views[0].len();
    let grads = (0..m)
        .map(|i| {
            // ∂L/∂u_i = Σ_k (c_ik + c_ki) u_k / τ
            let mut d_u = vec![T::zero(); dim];
            for k in (0..m).filter(|&k| k != i) {
                let c = (coeff[i][k] + coeff[k][i]) / temperature;
                for (d, &u) in d_u.iter_mut().zip(&unit[k]) {
                    *d += c * u;
                }
            }
            // Project through the normalization: (I - u uᵀ) d_u / ‖z‖.
            let along = dot(&d_u, &unit[i]);
            d_u.iter().zip(&unit[i]).map(|(&d, &u)| (d - along * u) / norms[i]).collect()
        })
        .collect();
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_of_constants_is_uniform() {
        let p = softmax(&[3.0, 3.0, 3.0, 3.0]);
        assert!(p.iter().all(|&x| (x - 0.25f64).abs() < 1e-15));
    }

    #[test]
    fn softened_probabilities_sum_to_one() {
        let p = softmax_with_temperature(&[1.0, -2.0, 0.5], 2.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_of_uniform_is_ln_k() {
        let (l, g) = cross_entropy(&[0.0, 0.0, 0.0], 1);
        assert!((l - 3f64.ln()).abs() < 1e-15);
        assert!((g.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let logits = [0.3f64, -1.2, 2.0];
        let teacher = softmax_with_temperature(&logits, 2.0);
        let (kl, grad) = distillation_kl(&logits, &teacher, 2.0);
        assert!(kl.abs() < 1e-15);
        assert!(grad.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn nt_xent_orthogonal_pairs() {
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        let (loss, _) = nt_xent(&[e1.clone(), e1, e2.clone(), e2], 0.5).unwrap();
        let e2c = 2f64.exp();
        assert!((loss - (-(e2c / (e2c + 2.0)).ln())).abs() < 1e-12);
        assert!((loss - 0.2395).abs() < 1e-4);
    }

    #[test]
    fn nt_xent_identical_views() {
        for n in [2usize, 3, 5] {
            let views = vec![vec![0.3, -0.7, 1.1]; 2 * n];
            let (loss, _) = nt_xent(&views, 0.5).unwrap();
            assert!((loss - ((2 * n - 1) as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn nt_xent_scale_invariant() {
        let views = vec![vec![1.0f64, 2.0], vec![0.5, 1.5], vec![-1.0, 0.2], vec![-0.3, 0.9]];
        let mut scaled = views.clone();
        scaled[2].iter_mut().for_each(|x| *x *= 7.5);
        let (a, _) = nt_xent(&views, 0.5).unwrap();
        let (b, _) = nt_xent(&scaled, 0.5).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn nt_xent_rejects_bad_input() {
        assert!(nt_xent(&[vec![1.0], vec![1.0]], 0.5).is_err());
        assert!(nt_xent(&[vec![1.0], vec![1.0], vec![0.0], vec![1.0]], 0.5).is_err());
    }
}
