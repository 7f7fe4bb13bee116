use serde::{Deserialize, Serialize};

/// Confusion matrix (rows true, columns predicted) with derived scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Vec<Vec<u64>>,
    pub mcc: f64,
    pub accuracy: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let correct: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
        let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
        let mcc = rk_statistic(&confusion);
        Self { confusion, mcc, accuracy }
    }

    /// Two-class metrics after mapping every label `>= threshold` to 1.
    pub fn merged(&self, threshold: usize) -> Metrics {
        let mut c = vec![vec![0u64; 2]; 2];
        for (i, row) in self.confusion.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                c[usize::from(i >= threshold)][usize::from(j >= threshold)] += n;
            }
        }
        Metrics::from_confusion(c)
    }

    pub fn class_counts(&self) -> Vec<u64> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }
}

pub fn confusion_and_mcc(predictions: &[usize], labels: &[usize], k: usize) -> Metrics {
    let mut c = vec![vec![0u64; k]; k];
    for (&p, &y) in predictions.iter().zip(labels) {
        c[y][p] += 1;
    }
    Metrics::from_confusion(c)
}

/// Gorodkin's R_K; zero when the denominator vanishes.
pub fn rk_statistic(c: &[Vec<u64>]) -> f64 {
    let k = c.len();
    let s: f64 = c.iter().flatten().map(|&v| v as f64).sum();
    let trace: f64 = (0..k).map(|i| c[i][i] as f64).sum();
    let t: Vec<f64> = c.iter().map(|r| r.iter().map(|&v| v as f64).sum()).collect();
    let p: Vec<f64> = (0..k).map(|j| c.iter().map(|r| r[j] as f64).sum()).collect();
    let tp: f64 = t.iter().zip(&p).map(|(a, b)| a * b).sum();
    let den = (s * s - p.iter().map(|v| v * v).sum::<f64>()) * (s * s - t.iter().map(|v| v * v).sum::<f64>());
    if den <= 0.0 {
        return 0.0;
    }
    (trace * s - tp) / den.sqrt()
}

/// `(TP·TN − FP·FN) / √((TP+FP)(TP+FN)(TN+FP)(TN+FN))`, zero on a zero denominator.
pub fn binary_mcc(tp: u64, tn: u64, fp: u64, fn_: u64) -> f64 {
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / den.sqrt()
}
