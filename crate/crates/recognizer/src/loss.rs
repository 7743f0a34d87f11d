//! Class-weighted frame-wise cross-entropy.

use crate::error::{Error, Result};
use crate::tensor::Mat;

/// Probabilities are clamped here before the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `(1/T) Σ_t −α_{y_t} log p_t(y_t)` over masked-in frames, and its gradient
/// with respect to the logits that produced `probs` through a softmax.
pub fn weighted_cross_entropy(probs: &Mat, labels: &[usize], alpha: &[f64], mask: &[bool]) -> Result<(f64, Mat)> {
    if labels.len() != probs.rows || mask.len() != probs.rows {
        return Err(Error::validation("labels, mask and predictions differ in length"));
    }
    let frames = mask.iter().filter(|&&m| m).count();
    if frames == 0 {
        return Err(Error::validation("empty mask"));
    }
    let inv = 1.0 / frames as f64;
    let mut loss = 0.0;
    let mut grad = Mat::zeros(probs.rows, probs.cols);
    for t in 0..probs.rows {
        if !mask[t] {
            continue;
        }
        let y = labels[t];
        if y >= probs.cols {
            return Err(Error::validation(format!("label {y} outside {} classes", probs.cols)));
        }
        let p = probs.row(t)[y];
        loss -= alpha[y] * p.max(PROB_FLOOR).ln();
        if p > PROB_FLOOR {
            // d(−log softmax_y)/dz = p − onehot(y)
            let g = grad.row_mut(t);
            g.iter_mut().zip(probs.row(t)).for_each(|(g, q)| *g = alpha[y] * inv * q);
            g[y] -= alpha[y] * inv;
        }
    }
    Ok((loss * inv, grad))
}

/// Inverse-frequency weights `N / (K · N_c)` over masked-in frames; classes
/// absent from the data get weight 1.
pub fn inverse_frequency_weights<'a>(classes: usize, trials: impl IntoIterator<Item = (&'a [usize], &'a [bool])>) -> Vec<f64> {
    let mut counts = vec![0usize; classes];
    for (labels, mask) in trials {
        for (&l, &m) in labels.iter().zip(mask) {
            if m {
                counts[l] += 1;
            }
        }
    }
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .map(|&c| if c == 0 { 1.0 } else { total as f64 / (classes * c) as f64 })
        .collect()
}

pub fn softmax_rows(logits: &Mat) -> Mat {
    let mut out = logits.clone();
    for t in 0..out.rows {
        let r = out.row_mut(t);
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in r.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        r.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_ten_classes() {
        let probs = Mat {
            rows: 5,
            cols: 10,
            data: vec![0.1; 50],
        };
        let (l, _) = weighted_cross_entropy(&probs, &[0, 3, 9, 2, 2], &[1.0; 10], &[true; 5]).unwrap();
        assert!((l - 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn perfect_predictions() {
        let mut probs = Mat::zeros(3, 3);
        for t in 0..3 {
            probs.row_mut(t).fill(0.5e-12);
            probs.row_mut(t)[t] = 1.0 - 1e-12;
        }
        let (l, _) = weighted_cross_entropy(&probs, &[0, 1, 2], &[1.0; 3], &[true; 3]).unwrap();
        assert!(l < 1e-11);
    }

    #[test]
    fn alpha_is_linear() {
        let probs = Mat {
            rows: 4,
            cols: 2,
            data: vec![0.7, 0.3, 0.4, 0.6, 0.2, 0.8, 0.9, 0.1],
        };
        let labels = [0, 1, 1, 0];
        let mask = [true; 4];
        let (base, _) = weighted_cross_entropy(&probs, &labels, &[1.0, 1.0], &mask).unwrap();
        let (twice, _) = weighted_cross_entropy(&probs, &labels, &[1.0, 2.0], &mask).unwrap();
        let class1 = -(0.6f64.ln() + 0.8f64.ln()) / 4.0;
        assert!((twice - base - class1).abs() < 1e-15);
    }

    #[test]
    fn masked_labels_do_not_matter() {
        let probs = softmax_rows(&Mat {
            rows: 3,
            cols: 3,
            data: vec![0.1, 0.5, -0.3, 1.0, 0.0, 0.2, -1.0, 2.0, 0.4],
        });
        let mask = [true, false, true];
        let a = weighted_cross_entropy(&probs, &[0, 1, 2], &[1.0; 3], &mask).unwrap();
        let b = weighted_cross_entropy(&probs, &[0, 2, 2], &[1.0; 3], &mask).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!(weighted_cross_entropy(&probs, &[0, 1, 2], &[1.0; 3], &[false; 3]).is_err());
    }

    #[test]
    fn inverse_weights() {
        let labels = [0, 0, 0, 1, 2, 2];
        let w = inverse_frequency_weights(3, [(&labels[..], &[true; 6][..])]);
        assert_eq!(w, vec![6.0 / 9.0, 2.0, 1.0]);
    }
}
