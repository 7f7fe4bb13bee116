use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{conv_out_len, BatchNorm1d, Conv1d, Dense, Layer, Mode, Param, Standardize};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"ECRANKNN";
pub const MODEL_VERSION: u32 = 1;
pub const CNN_CHANNELS: usize = 64;
pub const FCNN_HIDDEN: usize = 128;
const PREDICT_BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnnConfig {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
    pub ks: usize,
    pub channels: usize,
    pub input_len: usize,
    pub num_classes: usize,
}

impl CnnConfig {
    /// L1 = 0, L3 = 3, KS = 17 and the smallest L2 that reduces the input to length 1.
    pub fn for_input(input_len: usize, num_classes: usize) -> Self {
        Self { l1: 0, l2: default_l2(input_len), l3: 3, ks: 17, channels: CNN_CHANNELS, input_len, num_classes }
    }

    /// Sequence length after the reducing layers.
    pub fn reduced_len(&self) -> usize {
        (0..self.l2).fold(self.input_len, |l, _| conv_out_len(l, self.ks, 2))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvariantViolation(m));
        if self.ks % 2 == 0 {
            return bad(format!("kernel size {} must be odd", self.ks));
        }
        if self.channels != CNN_CHANNELS {
            return bad(format!("channels must be {CNN_CHANNELS}, got {}", self.channels));
        }
        if self.input_len == 0 || self.num_classes < 2 {
            return bad("input length must be positive and there must be at least two classes".into());
        }
        if self.reduced_len() != 1 {
            return bad(format!("L2 = {} leaves length {} from {}", self.l2, self.reduced_len(), self.input_len));
        }
        Ok(())
    }
}

/// `ceil(log2 len)`.
pub fn default_l2(len: usize) -> usize {
    if len <= 1 {
        0
    } else {
        (usize::BITS - (len - 1).leading_zeros()) as usize
    }
}

/// Which family a model belongs to, with the numbers needed to rebuild it.
#[derive(Clone, Debug, PartialEq)]
pub enum Arch {
    Cnn(CnnConfig),
    Fcnn { num_features: usize, num_classes: usize, dropout: f64 },
}

/// Sequential network plus a text descriptor that is stored with it.
#[derive(Clone, Debug)]
pub struct Model {
    pub arch: Arch,
    layers: Vec<Layer>,
    /// Free-form metadata saved in the file header.
    pub meta: BTreeMap<String, String>,
}

fn conv_block(layers: &mut Vec<Layer>, c_in: usize, c_out: usize, ks: usize, stride: usize, rng: &mut ChaCha8Rng) {
    layers.push(Layer::Conv1d(Conv1d::new(c_in, c_out, ks, stride, rng)));
    layers.push(Layer::relu());
    layers.push(Layer::BatchNorm1d(BatchNorm1d::new(c_out)));
}

/// Prep conv 3→64, L1 + L2 (stride 2) + L3 convs, each followed by ReLU and
/// batch norm, then a dense layer 64 → classes.
pub fn build_cnn(cfg: &CnnConfig, seed: u64) -> Result<Model> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    let c = cfg.channels;
    conv_block(&mut layers, 3, c, cfg.ks, 1, &mut rng);
    for _ in 0..cfg.l1 {
        conv_block(&mut layers, c, c, cfg.ks, 1, &mut rng);
    }
    for _ in 0..cfg.l2 {
        conv_block(&mut layers, c, c, cfg.ks, 2, &mut rng);
    }
    for _ in 0..cfg.l3 {
        conv_block(&mut layers, c, c, cfg.ks, 1, &mut rng);
    }
    layers.push(Layer::Flatten { shape: Vec::new() });
    layers.push(Layer::Dense(Dense::new(c, cfg.num_classes, &mut rng)));
    Ok(Model { arch: Arch::Cnn(cfg.clone()), layers, meta: BTreeMap::new() })
}

/// Input standardization, then linear layers 128 wide with dropout and ReLU
/// between consecutive ones: F→128, three 128→128, 128→K.
pub fn build_fcnn(num_features: usize, num_classes: usize, dropout: f64, seed: u64) -> Result<Model> {
    if num_features == 0 || num_classes < 2 {
        return Err(Error::ConfigInvariantViolation("FCNN needs features and at least two classes".into()));
    }
    if !(0.0..1.0).contains(&dropout) {
        return Err(Error::ConfigInvariantViolation(format!("dropout {dropout} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = FCNN_HIDDEN;
    let mut layers = vec![Layer::Standardize(Standardize::identity(num_features))];
    layers.push(Layer::Dense(Dense::new(num_features, h, &mut rng)));
    for _ in 0..3 {
        layers.push(Layer::dropout(dropout));
        layers.push(Layer::relu());
        layers.push(Layer::Dense(Dense::new(h, h, &mut rng)));
    }
    layers.push(Layer::dropout(dropout));
    layers.push(Layer::relu());
    layers.push(Layer::Dense(Dense::new(h, num_classes, &mut rng)));
    Ok(Model { arch: Arch::Fcnn { num_features, num_classes, dropout }, layers, meta: BTreeMap::new() })
}

impl Model {
    pub fn num_classes(&self) -> usize {
        match &self.arch {
            Arch::Cnn(c) => c.num_classes,
            Arch::Fcnn { num_classes, .. } => *num_classes,
        }
    }

    /// Shape of one sample.
    pub fn input_shape(&self) -> Vec<usize> {
        match &self.arch {
            Arch::Cnn(c) => vec![3, c.input_len],
            Arch::Fcnn { num_features, .. } => vec![*num_features],
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape().len() < 2 || x.shape()[1..] != self.input_shape()[..] {
            return Err(Error::ArchMismatch(format!(
                "model expects samples of shape {:?}, got {:?}",
                self.input_shape(),
                x.shape().get(1..).unwrap_or(&[])
            )));
        }
        Ok(())
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Tensor> {
        self.check_input(x)?;
        let mut h = self.layers[0].forward(x, mode, rng)?;
        for layer in &mut self.layers[1..] {
            h = layer.forward(&h, mode, rng)?;
        }
        Ok(h)
    }

    pub fn backward(&mut self, grad: &Tensor) -> Result<Tensor> {
        let mut g = grad.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    pub fn clear_cache(&mut self) {
        self.layers.iter_mut().for_each(Layer::clear_cache);
    }

    pub fn num_params(&self) -> usize {
        let mut m = self.clone();
        m.params_mut().iter().map(|p| p.value.len()).sum()
    }

    /// Set the fixed input normalization of an FCNN.
    pub fn set_standardization(&mut self, st: Standardize) -> Result<()> {
        match self.layers.first_mut() {
            Some(Layer::Standardize(s)) if s.mean.len() == st.mean.len() => {
                *s = st;
                Ok(())
            }
            _ => Err(Error::ArchMismatch("model has no matching input standardization".into())),
        }
    }

    /// Logits in eval mode, computed in fixed-size chunks.
    pub fn predict_logits(&mut self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = x.batch();
        let k = self.num_classes();
        let mut out = Vec::with_capacity(n * k);
        let idx: Vec<usize> = (0..n).collect();
        for chunk in idx.chunks(PREDICT_BATCH) {
            let y = self.forward(&x.gather(chunk), Mode::Eval, &mut rng)?;
            out.extend_from_slice(y.data());
        }
        Tensor::new(vec![n, k], out)
    }

    pub fn predict(&mut self, x: &Tensor) -> Result<Vec<usize>> {
        let logits = self.predict_logits(x)?;
        Ok((0..logits.batch()).map(|i| argmax(logits.item(i))).collect())
    }

    /// Copy of every persisted array.
    pub fn snapshot(&self) -> Vec<Vec<f64>> {
        self.layers.iter().flat_map(|l| l.state()).map(|(_, v)| v.to_vec()).collect()
    }

    pub fn restore(&mut self, snap: &[Vec<f64>]) -> Result<()> {
        let mut slots: Vec<&mut Vec<f64>> = self.layers.iter_mut().flat_map(|l| l.state_mut()).collect();
        if slots.len() != snap.len() {
            return Err(Error::ModelFormat(format!("{} tensors for a model with {}", snap.len(), slots.len())));
        }
        for (slot, v) in slots.iter_mut().zip(snap) {
            if slot.len() != v.len() {
                return Err(Error::ModelFormat(format!("tensor of {} values, expected {}", v.len(), slot.len())));
            }
            slot.copy_from_slice(v);
        }
        Ok(())
    }

    fn descriptor(&self) -> BTreeMap<String, String> {
        let mut d = BTreeMap::new();
        match &self.arch {
            Arch::Cnn(c) => {
                d.insert("arch".into(), "cnn".into());
                for (k, v) in [
                    ("l1", c.l1),
                    ("l2", c.l2),
                    ("l3", c.l3),
                    ("ks", c.ks),
                    ("channels", c.channels),
                    ("input_len", c.input_len),
                    ("num_classes", c.num_classes),
                ] {
                    d.insert(k.into(), v.to_string());
                }
            }
            Arch::Fcnn { num_features, num_classes, dropout } => {
                d.insert("arch".into(), "fcnn".into());
                d.insert("num_features".into(), num_features.to_string());
                d.insert("num_classes".into(), num_classes.to_string());
                d.insert("dropout".into(), format!("{dropout:?}"));
            }
        }
        for (k, v) in &self.meta {
            d.insert(format!("meta.{k}"), v.clone());
        }
        d
    }

    fn from_descriptor(d: &BTreeMap<String, String>) -> Result<Model> {
        let get = |k: &str| d.get(k).ok_or_else(|| Error::ModelFormat(format!("descriptor lacks `{k}`")));
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| Error::ModelFormat(format!("bad `{k}`"))) };
        let mut model = match get("arch")?.as_str() {
            "cnn" => build_cnn(
                &CnnConfig {
                    l1: num("l1")?,
                    l2: num("l2")?,
                    l3: num("l3")?,
                    ks: num("ks")?,
                    channels: num("channels")?,
                    input_len: num("input_len")?,
                    num_classes: num("num_classes")?,
                },
                0,
            )?,
            "fcnn" => {
                let dropout = get("dropout")?.parse().map_err(|_| Error::ModelFormat("bad `dropout`".into()))?;
                build_fcnn(num("num_features")?, num("num_classes")?, dropout, 0)?
            }
            a => return Err(Error::ModelFormat(format!("unknown arch `{a}`"))),
        };
        model.meta = d.iter().filter_map(|(k, v)| k.strip_prefix("meta.").map(|k| (k.to_string(), v.clone()))).collect();
        Ok(model)
    }

    /// Header (magic, version, descriptor text), then every tensor as
    /// `u32 ndim, u64 dims…, f64 values…`, little-endian.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        let desc: String = self.descriptor().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        out.write_all(MODEL_MAGIC)?;
        out.write_all(&MODEL_VERSION.to_le_bytes())?;
        out.write_all(&(desc.len() as u32).to_le_bytes())?;
        out.write_all(desc.as_bytes())?;
        let state: Vec<(Vec<usize>, &[f64])> = self.layers.iter().flat_map(|l| l.state()).collect();
        out.write_all(&(state.len() as u32).to_le_bytes())?;
        for (shape, values) in state {
            out.write_all(&(shape.len() as u32).to_le_bytes())?;
            for d in shape {
                out.write_all(&(d as u64).to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(values.len() * 8);
            values.iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes()));
            out.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Model> {
        let fmt = |m: &str| Error::ModelFormat(m.to_string());
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(fmt("bad magic"));
        }
        let version = read_u32(input)?;
        if version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let mut desc = vec![0u8; read_u32(input)? as usize];
        input.read_exact(&mut desc)?;
        let desc = String::from_utf8(desc).map_err(|_| fmt("descriptor is not UTF-8"))?;
        let map: BTreeMap<String, String> = desc
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| fmt("bad descriptor line")))
            .collect::<Result<_>>()?;
        let mut model = Model::from_descriptor(&map)?;
        let expected: Vec<Vec<usize>> = model.layers.iter().flat_map(|l| l.state()).map(|(s, _)| s).collect();
        let count = read_u32(input)? as usize;
        if count != expected.len() {
            return Err(Error::ModelFormat(format!("{count} tensors, architecture has {}", expected.len())));
        }
        let mut snap = Vec::with_capacity(count);
        for shape in expected {
            let ndim = read_u32(input)? as usize;
            let mut got = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                let mut b = [0u8; 8];
                input.read_exact(&mut b)?;
                got.push(u64::from_le_bytes(b) as usize);
            }
            if got != shape {
                return Err(Error::ModelFormat(format!("tensor shape {got:?}, expected {shape:?}")));
            }
            let n: usize = shape.iter().product();
            let mut buf = vec![0u8; n * 8];
            input.read_exact(&mut buf)?;
            snap.push(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
        }
        model.restore(&snap)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Index of the largest entry; the first one on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
