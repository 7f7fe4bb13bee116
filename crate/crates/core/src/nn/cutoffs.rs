use std::io::Write;

use serde::{Deserialize, Serialize};

use super::model::{Arch, Model};
use super::tensor::Tensor;
use crate::error::{Error, Result};

const BISECTION_STEPS: usize = 60;

/// A point where the predicted class changes as the sum value grows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub log10_conductor: f64,
    pub sum_value: f64,
    pub class_low: usize,
    pub class_high: usize,
}

fn classify(model: &mut Model, s: &[f64], c: f64) -> Result<Vec<usize>> {
    let data: Vec<f64> = s.iter().flat_map(|&v| [v, c]).collect();
    model.predict(&Tensor::new(vec![s.len(), 2], data)?)
}

/// Decision boundaries of a two-input FCNN (sum value, normalized conductor),
/// scanned over `sum_grid` for each conductor and refined by bisection.
pub fn extract_cutoffs(
    model: &mut Model,
    log10_conductors: &[f64],
    sum_grid: &[f64],
    log10_n_max: f64,
) -> Result<Vec<CutoffRow>> {
    if !matches!(model.arch, Arch::Fcnn { num_features: 2, .. }) {
        return Err(Error::ArchMismatch("cutoffs need an FCNN on (sum value, conductor)".into()));
    }
    if !(log10_n_max > 0.0) {
        return Err(Error::InvalidArgument("log10 N_max must be positive".into()));
    }
    let mut grid = sum_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut rows = Vec::new();
    for &lc in log10_conductors {
        let c = lc / log10_n_max;
        let classes = classify(model, &grid, c)?;
        for i in 1..grid.len() {
            if classes[i] == classes[i - 1] {
                continue;
            }
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            let low_class = classes[i - 1];
            let mut high_class = classes[i];
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let k = classify(model, &[mid], c)?[0];
                if k == low_class {
                    lo = mid;
                } else {
                    hi = mid;
                    high_class = k;
                }
            }
            rows.push(CutoffRow { log10_conductor: lc, sum_value: 0.5 * (lo + hi), class_low: low_class, class_high: high_class });
        }
    }
    Ok(rows)
}

pub fn write_cutoffs_csv<W: Write>(rows: &[CutoffRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["log10_conductor", "sum_value", "class_low", "class_high"])?;
    for r in rows {
        w.write_record([r.log10_conductor.to_string(), r.sum_value.to_string(), r.class_low.to_string(), r.class_high.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::Layer;
    use crate::nn::model::build_fcnn;

    /// FCNN whose logits are (0, s − 1, 2s − 5): classes flip at s = 1 and s = 4.
    fn staircase(conductor_slope: f64) -> Model {
        let mut m = build_fcnn(2, 3, 0.0, 0).unwrap();
        let mut snap = m.snapshot();
        // tensors: standardize mean, std, then (weight, bias) per dense layer
        let dense_slots: Vec<usize> = (2..snap.len()).step_by(2).collect();
        for &w in &dense_slots {
            snap[w].iter_mut().for_each(|v| *v = 0.0);
            snap[w + 1].iter_mut().for_each(|v| *v = 0.0);
        }
        // first layer: h0 = s + slope·c, h1 = 0 (passes through ReLU for s ≥ 0)
        snap[2][0] = 1.0;
        snap[2][1] = conductor_slope;
        for &w in &dense_slots[1..dense_slots.len() - 1] {
            snap[w][0] = 1.0;
        }
        let last = *dense_slots.last().unwrap();
        snap[last][128] = 1.0;
        snap[last][2 * 128] = 2.0;
        snap[last + 1] = vec![0.0, -1.0, -5.0];
        m.restore(&snap).unwrap();
        assert_eq!(dense_slots.len(), 5);
        assert!(matches!(m.layers()[0], Layer::Standardize(_)));
        m
    }

    #[test]
    fn horizontal_lines_and_bracketing() {
        let mut m = staircase(0.0);
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
        let rows = extract_cutoffs(&mut m, &[2.0, 4.0, 6.0], &grid, 6.0).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            let below = classify(&mut m, &[r.sum_value - 1e-9], 0.0).unwrap()[0];
            let above = classify(&mut m, &[r.sum_value + 1e-9], 0.0).unwrap()[0];
            assert_eq!((below, above), (r.class_low, r.class_high));
        }
        let at = |lc: f64| rows.iter().filter(|r| r.log10_conductor == lc).map(|r| r.sum_value).collect::<Vec<_>>();
        for lc in [2.0, 4.0, 6.0] {
            let v = at(lc);
            assert!((v[0] - 1.0).abs() < 1e-9 && (v[1] - 4.0).abs() < 1e-9);
        }
        let mut buf = Vec::new();
        write_cutoffs_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("log10_conductor,sum_value,class_low,class_high\n"));
    }

    #[test]
    fn conductor_shifts_boundaries() {
        let mut m = staircase(-1.0);
        let grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.1).collect();
        let rows = extract_cutoffs(&mut m, &[3.0], &grid, 6.0).unwrap();
        // h0 = s − 0.5
        assert!((rows[0].sum_value - 1.5).abs() < 1e-9);
        assert!(extract_cutoffs(&mut build_fcnn(3, 2, 0.0, 0).unwrap(), &[1.0], &grid, 6.0).is_err());
    }
}
