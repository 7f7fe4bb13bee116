use std::io::Write;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::Mode;
use super::loss::cross_entropy_weighted;
use super::metrics::{confusion_and_mcc, Metrics};
use super::model::{argmax, Model};
use super::optim::{adam_step, one_cycle, AdamConfig, AdamState};
use super::tensor::Tensor;
use crate::error::{Error, Result};

const EVAL_BATCH: usize = 256;

/// Feature tensor with one label per entry of the leading axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub x: Tensor,
    pub y: Vec<usize>,
}

impl Samples {
    pub fn new(x: Tensor, y: Vec<usize>) -> Result<Self> {
        if x.batch() != y.len() {
            return Err(Error::ShapeMismatch(format!("{} samples but {} labels", x.batch(), y.len())));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Samples {
        Samples { x: self.x.gather(idx), y: idx.iter().map(|&i| self.y[i]).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_max: f64,
    /// Used only when momentum cycling is off.
    pub beta1: f64,
    pub cycle_momentum: bool,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub class_weights: Option<Vec<f64>>,
    pub seed: u64,
    pub pct_start: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            batch_size: 1024,
            lr_max: 1e-3,
            beta1: 0.9,
            cycle_momentum: true,
            beta2: 0.99,
            eps: 1e-5,
            weight_decay: 1e-3,
            class_weights: None,
            seed: 0,
            pct_start: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_mcc: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters the model holds after training.
    pub best_epoch: Option<usize>,
}

impl History {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "train_loss", "val_loss", "val_mcc"])?;
        for r in &self.records {
            w.write_record([r.epoch.to_string(), r.train_loss.to_string(), r.val_loss.to_string(), r.val_mcc.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_labels(s: &Samples, k: usize) -> Result<()> {
    match s.y.iter().find(|&&y| y >= k) {
        Some(y) => Err(Error::InvalidArgument(format!("label {y} outside 0..{k}"))),
        None => Ok(()),
    }
}

fn resolve_weights(cfg: &TrainConfig, k: usize) -> Result<Vec<f64>> {
    match &cfg.class_weights {
        None => Ok(vec![1.0; k]),
        Some(w) if w.len() == k && w.iter().all(|&v| v > 0.0 && v.is_finite()) => Ok(w.clone()),
        Some(w) => Err(Error::InvalidArgument(format!("class weights {w:?} for {k} classes"))),
    }
}

/// Weighted loss and metrics in eval mode.
pub fn evaluate(model: &mut Model, data: &Samples, weights: &[f64]) -> Result<(f64, Metrics)> {
    let k = model.num_classes();
    check_labels(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut preds = Vec::with_capacity(data.len());
    let (mut loss_sum, mut w_sum) = (0.0, 0.0);
    let idx: Vec<usize> = (0..data.len()).collect();
    for chunk in idx.chunks(EVAL_BATCH) {
        let logits = model.forward(&data.x.gather(chunk), Mode::Eval, &mut rng)?;
        let labels: Vec<usize> = chunk.iter().map(|&i| data.y[i]).collect();
        let (l, _) = cross_entropy_weighted(&logits, &labels, weights)?;
        let bw: f64 = labels.iter().map(|&y| weights[y]).sum();
        loss_sum += l * bw;
        w_sum += bw;
        preds.extend((0..logits.batch()).map(|i| argmax(logits.item(i))));
    }
    let loss = if w_sum > 0.0 { loss_sum / w_sum } else { 0.0 };
    Ok((loss, confusion_and_mcc(&preds, &data.y, k)))
}

/// Mini-batch Adam with a one-cycle schedule. The model ends up holding the
/// parameters of the epoch with the best validation MCC.
pub fn train(model: &mut Model, train: &Samples, val: &Samples, cfg: &TrainConfig) -> Result<History> {
    if cfg.epochs == 0 {
        return Ok(History::default());
    }
    if !(cfg.lr_max > 0.0) || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("lr_max and batch_size must be positive".into()));
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be nonempty".into()));
    }
    model.check_input(&train.x)?;
    model.check_input(&val.x)?;
    let k = model.num_classes();
    check_labels(train, k)?;
    check_labels(val, k)?;
    let weights = resolve_weights(cfg, k)?;
    let adam = AdamConfig { beta2: cfg.beta2, eps: cfg.eps, weight_decay: cfg.weight_decay };

    let n = train.len();
    let bs = cfg.batch_size.min(n);
    // the trailing partial batch is dropped, as long as one full batch exists
    let steps_per_epoch = n / bs;
    let total = cfg.epochs * steps_per_epoch;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut drop_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    drop_rng.set_stream(1);
    let mut state = AdamState::default();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = History::default();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut step = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut count) = (0.0, 0usize);
        for (s, batch) in order.chunks_exact(bs).enumerate() {
            let x = train.x.gather(batch);
            let y: Vec<usize> = batch.iter().map(|&i| train.y[i]).collect();
            model.zero_grad();
            let logits = model.forward(&x, Mode::Train, &mut drop_rng)?;
            let (loss, grad) = cross_entropy_weighted(&logits, &y, &weights)?;
            if !loss.is_finite() {
                return Err(Error::NonfiniteLoss { epoch, step: s });
            }
            model.backward(&grad)?;
            let (lr, b1) = one_cycle(step, total, cfg.lr_max, cfg.pct_start);
            let beta1 = if cfg.cycle_momentum { b1 } else { cfg.beta1 };
            adam_step(&mut model.params_mut(), &mut state, lr, beta1, &adam);
            loss_sum += loss * batch.len() as f64;
            count += batch.len();
            step += 1;
        }
        model.clear_cache();
        let (val_loss, m) = evaluate(model, val, &weights)?;
        let rec = EpochRecord { epoch, train_loss: loss_sum / count as f64, val_loss, val_mcc: m.mcc };
        info!("epoch {epoch}: train {:.5} val {:.5} mcc {:.4}", rec.train_loss, rec.val_loss, rec.val_mcc);
        if best.as_ref().map_or(true, |(b, _)| m.mcc > *b) {
            best = Some((m.mcc, model.snapshot()));
            history.best_epoch = Some(epoch);
        }
        history.records.push(rec);
    }
    if let Some((_, snap)) = best {
        model.restore(&snap)?;
    }
    Ok(history)
}
