use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Stabilized softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Weighted mean of `-log softmax(z)_y`, normalized by the sum of the
/// sample weights `w_y`, and its gradient with respect to the logits.
pub fn cross_entropy_weighted(logits: &Tensor, labels: &[usize], weights: &[f64]) -> Result<(f64, Tensor)> {
    let [b, k] = logits.shape() else {
        return Err(Error::ShapeMismatch(format!("logits must be [B, K], got {:?}", logits.shape())));
    };
    let (b, k) = (*b, *k);
    if labels.len() != b || weights.len() != k {
        return Err(Error::ShapeMismatch(format!("{} labels and {} weights for logits [{b}, {k}]", labels.len(), weights.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::InvalidArgument(format!("label {bad} outside 0..{k}")));
    }
    let total_w: f64 = labels.iter().map(|&y| weights[y]).sum();
    let mut loss = 0.0;
    let mut grad = vec![0.0; b * k];
    for (i, &y) in labels.iter().enumerate() {
        let z = logits.item(i);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
        let w = weights[y] / total_w;
        loss += w * (lse - z[y]);
        let g = &mut grad[i * k..(i + 1) * k];
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = w * (z[j] - lse).exp();
        }
        g[y] -= w;
    }
    Ok((loss, Tensor::new(vec![b, k], grad)?))
}
