//! Softmax and class-weighted cross entropy.
//!
//! Label 0 means "unannotated" and is excluded from the loss; class c
//! (1-based label) maps to logit column c - 1.

use super::layers::Matrix;
use crate::error::{Error, Result};

/// Row-wise softmax, stabilized by max subtraction.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(logits.rows, logits.cols);
    for r in 0..logits.rows {
        let row = logits.row(r);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let dst = out.row_mut(r);
        let mut total = 0.0;
        for (d, &x) in dst.iter_mut().zip(row) {
            *d = (x - max).exp();
            total += *d;
        }
        for d in dst.iter_mut() {
            *d /= total;
        }
    }
    out
}

/// Weighted cross entropy over annotated points:
/// `loss = sum_i w(l_i) * (-log softmax(logit_i)[l_i]) / sum_i w(l_i)`.
pub fn weighted_cross_entropy(
    logits: &Matrix,
    labels: &[u16],
    class_weights: &[f64],
) -> Result<f64> {
    weighted_cross_entropy_with_grad(logits, labels, class_weights).map(|(loss, _)| loss)
}

/// Loss plus its gradient with respect to the logits.
pub fn weighted_cross_entropy_with_grad(
    logits: &Matrix,
    labels: &[u16],
    class_weights: &[f64],
) -> Result<(f64, Matrix)> {
    if labels.len() != logits.rows {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} logit rows",
            labels.len(),
            logits.rows
        )));
    }
    if class_weights.len() != logits.cols {
        return Err(Error::ShapeMismatch(format!(
            "{} class weights for {} classes",
            class_weights.len(),
            logits.cols
        )));
    }
    let mut weight_total = 0.0;
    for &l in labels {
        if l != 0 {
            let c = (l - 1) as usize;
            if c >= logits.cols {
                return Err(Error::ShapeMismatch(format!(
                    "label {l} outside {} classes",
                    logits.cols
                )));
            }
            weight_total += class_weights[c];
        }
    }
    if weight_total <= 0.0 {
        return Err(Error::NoSupervisedPoints);
    }

    let probs = softmax_rows(logits);
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(logits.rows, logits.cols);
    for (r, &label) in labels.iter().enumerate() {
        if label == 0 {
            continue;
        }
        let c = (label - 1) as usize;
        let w = class_weights[c];
        let p = probs.row(r);
        // log(p_c) computed in the stabilized domain.
        let row = logits.row(r);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let log_sum: f64 = row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
        let log_p = row[c] - max - log_sum;
        loss -= w * log_p;
        let scale = w / weight_total;
        let g = grad.row_mut(r);
        for (k, &pk) in p.iter().enumerate() {
            g[k] = scale * (pk - if k == c { 1.0 } else { 0.0 });
        }
    }
    Ok((loss / weight_total, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = Matrix::from_rows(vec![
            vec![1.0, 2.0, 3.0],
            vec![-1000.0, 0.0, 1000.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let p = softmax_rows(&logits);
        for r in 0..3 {
            let sum: f64 = p.row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(p.row(r).iter().all(|&x| x >= 0.0));
        }
        assert!((p.row(2)[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_correct_logits_give_tiny_loss() {
        let mut logits = Matrix::zeros(3, 4);
        let labels = [1u16, 3, 4];
        for (r, &l) in labels.iter().enumerate() {
            logits.row_mut(r)[(l - 1) as usize] = 1000.0;
        }
        let loss = weighted_cross_entropy(&logits, &labels, &[1.0; 4]).unwrap();
        assert!(loss < 1e-6, "loss = {loss}");
    }

    #[test]
    fn uniform_logits_give_ln_k() {
        let logits = Matrix::zeros(5, 4);
        let labels = [1u16, 2, 3, 4, 1];
        let loss = weighted_cross_entropy(&logits, &labels, &[1.0; 4]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn unannotated_points_are_excluded() {
        let mut logits = Matrix::zeros(2, 3);
        logits.row_mut(1)[0] = 55.0; // would be a huge loss if label 2 counted
        let labels = [1u16, 0];
        let with = weighted_cross_entropy(&logits, &labels, &[1.0; 3]).unwrap();
        let only_first = weighted_cross_entropy(
            &Matrix::zeros(1, 3),
            &[1u16],
            &[1.0; 3],
        )
        .unwrap();
        assert!((with - only_first).abs() < 1e-12);
    }

    #[test]
    fn all_unannotated_is_an_error() {
        let logits = Matrix::zeros(3, 2);
        assert!(matches!(
            weighted_cross_entropy(&logits, &[0, 0, 0], &[1.0, 1.0]),
            Err(Error::NoSupervisedPoints)
        ));
    }

    #[test]
    fn matches_direct_formula_on_random_logits() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows = 20;
        let cols = 5;
        let logits = Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.random_range(-4.0..4.0)).collect(),
        };
        let labels: Vec<u16> = (0..rows).map(|_| rng.random_range(0..=cols as u16)).collect();
        let weights: Vec<f64> = (0..cols).map(|_| rng.random_range(0.2..3.0)).collect();
        if labels.iter().all(|&l| l == 0) {
            return;
        }
        // Direct, unstabilized formula (safe at these magnitudes).
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, &l) in labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let c = (l - 1) as usize;
            let row = logits.row(r);
            let z: f64 = row.iter().map(|&x| x.exp()).sum();
            num += weights[c] * -(row[c].exp() / z).ln();
            den += weights[c];
        }
        let expect = num / den;
        let got = weighted_cross_entropy(&logits, &labels, &weights).unwrap();
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rows = 6;
        let cols = 4;
        let mut logits = Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect(),
        };
        let labels: Vec<u16> = vec![1, 0, 2, 4, 3, 1];
        let weights = vec![0.5, 1.0, 2.0, 1.5];
        let (_, grad) = weighted_cross_entropy_with_grad(&logits, &labels, &weights).unwrap();
        let h = 1e-6;
        for i in 0..logits.data.len() {
            let orig = logits.data[i];
            logits.data[i] = orig + h;
            let up = weighted_cross_entropy(&logits, &labels, &weights).unwrap();
            logits.data[i] = orig - h;
            let down = weighted_cross_entropy(&logits, &labels, &weights).unwrap();
            logits.data[i] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad.data[i]).abs() < 1e-6, "at {i}: fd {fd} vs {}", grad.data[i]);
        }
    }
}
