use std::f64::consts::PI;

use super::layers::Param;

pub const ONE_CYCLE_DIV: f64 = 25.0;
pub const ONE_CYCLE_FINAL_DIV: f64 = 1e4;
pub const BETA1_HIGH: f64 = 0.95;
pub const BETA1_LOW: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta2: 0.99, eps: 1e-5, weight_decay: 1e-3 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

/// One Adam update with decoupled weight decay. `beta1` may change between
/// steps (momentum cycling); the bias correction uses the current value.
pub fn adam_step(params: &mut [&mut Param], state: &mut AdamState, lr: f64, beta1: f64, cfg: &AdamConfig) {
    if state.m.is_empty() {
        state.m = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
        state.v = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        let wd = if p.decay { lr * cfg.weight_decay } else { 0.0 };
        for j in 0..p.value.len() {
            let g = p.grad[j];
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
            let mhat = m[j] / bc1;
            let vhat = v[j] / bc2;
            p.value[j] -= wd * p.value[j];
            p.value[j] -= lr * mhat / (vhat.sqrt() + cfg.eps);
        }
    }
}

fn cos_interp(start: f64, end: f64, frac: f64) -> f64 {
    start + (end - start) * (1.0 - (PI * frac).cos()) / 2.0
}

/// Learning rate and β1 at `step` of `total_steps`. Position runs over
/// `step/(total-1)` so the last step lands on the final values.
pub fn one_cycle(step: usize, total_steps: usize, lr_max: f64, pct_start: f64) -> (f64, f64) {
    let pos = if total_steps <= 1 { 0.0 } else { step as f64 / (total_steps - 1) as f64 };
    let lr_start = lr_max / ONE_CYCLE_DIV;
    let lr_end = lr_max / (ONE_CYCLE_DIV * ONE_CYCLE_FINAL_DIV);
    if pos < pct_start {
        let f = pos / pct_start;
        (cos_interp(lr_start, lr_max, f), cos_interp(BETA1_HIGH, BETA1_LOW, f))
    } else {
        let f = if pct_start >= 1.0 { 1.0 } else { (pos - pct_start) / (1.0 - pct_start) };
        (cos_interp(lr_max, lr_end, f), cos_interp(BETA1_LOW, BETA1_HIGH, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64, g: f64, decay: bool) -> Param {
        Param { shape: vec![1], value: vec![v], grad: vec![g], decay }
    }

    #[test]
    fn zero_gradient_no_decay_is_noop() {
        let mut p = scalar(0.7, 0.0, true);
        let mut s = AdamState::default();
        let cfg = AdamConfig { weight_decay: 0.0, ..AdamConfig::default() };
        adam_step(&mut [&mut p], &mut s, 0.1, 0.9, &cfg);
        assert_eq!(p.value[0], 0.7);
    }

    #[test]
    fn first_step_magnitude() {
        let cfg = AdamConfig { weight_decay: 0.0, ..AdamConfig::default() };
        for g in [1e-3, -0.5, 40.0] {
            let mut p = scalar(0.0, g, true);
            adam_step(&mut [&mut p], &mut AdamState::default(), 0.01, 0.9, &cfg);
            let expect = -0.01 * g / (g.abs() + 1e-5);
            assert!((p.value[0] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn two_steps_by_hand() {
        let cfg = AdamConfig { beta2: 0.99, eps: 1e-5, weight_decay: 1e-3 };
        let (b1, lr) = (0.9, 0.05);
        let mut p = scalar(1.0, 0.3, true);
        let mut s = AdamState::default();
        adam_step(&mut [&mut p], &mut s, lr, b1, &cfg);
        p.grad[0] = -0.2;
        adam_step(&mut [&mut p], &mut s, lr, b1, &cfg);
        // hand recursion
        let mut x: f64 = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for (t, g) in [(1, 0.3f64), (2, -0.2)] {
            m = b1 * m + (1.0 - b1) * g;
            v = 0.99 * v + 0.01 * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - 0.99f64.powi(t));
            x -= lr * 1e-3 * x;
            x -= lr * mh / (vh.sqrt() + 1e-5);
        }
        assert!((p.value[0] - x).abs() < 1e-12);
    }

    #[test]
    fn schedule_shape() {
        let total = 101;
        let (lr0, b0) = one_cycle(0, total, 1.0, 0.25);
        assert!((lr0 - 1.0 / 25.0).abs() < 1e-15 && (b0 - 0.95).abs() < 1e-15);
        let (peak, bp) = one_cycle(25, total, 1.0, 0.25);
        assert!((peak - 1.0).abs() < 1e-15 && (bp - 0.85).abs() < 1e-15);
        let lrs: Vec<f64> = (0..total).map(|s| one_cycle(s, total, 1.0, 0.25).0).collect();
        assert!(lrs.iter().all(|&l| l <= 1.0));
        assert!(lrs[total - 1] <= 1e-4);
        // continuity at the boundary
        let eps = 1e-9;
        let left = cos_interp(1.0 / 25.0, 1.0, 1.0 - eps);
        let right = cos_interp(1.0, 1.0 / 2.5e5, eps);
        assert!((left - right).abs() < 1e-8);
    }
}
