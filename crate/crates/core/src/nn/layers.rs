use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tensor::{gemm, Tensor};
use crate::error::{Error, Result};

/// Samples per work item in batched convolution; weight gradients are summed
/// per chunk and the chunks are combined in order, so results do not depend
/// on the thread count.
const CONV_CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Trainable array with its gradient accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    /// Whether weight decay applies (not to biases or normalization scales).
    pub decay: bool,
}

impl Param {
    fn new(shape: Vec<usize>, value: Vec<f64>, decay: bool) -> Self {
        let n = value.len();
        Self { shape, value, grad: vec![0.0; n], decay }
    }

    fn uniform(shape: Vec<usize>, bound: f64, decay: bool, rng: &mut ChaCha8Rng) -> Self {
        let n = shape.iter().product();
        let value = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        Self::new(shape, value, decay)
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

fn expect_rank(x: &Tensor, rank: usize, what: &str) -> Result<()> {
    if x.shape().len() != rank {
        return Err(Error::ShapeMismatch(format!("{what} expects rank {rank}, got shape {:?}", x.shape())));
    }
    Ok(())
}

fn same_shape(a: &Tensor, b: &[usize], what: &str) -> Result<()> {
    if a.shape() != b {
        return Err(Error::ShapeMismatch(format!("{what}: gradient shape {:?} vs {:?}", a.shape(), b)));
    }
    Ok(())
}

/// Output length with zero padding `(ks-1)/2` on both sides.
pub fn conv_out_len(len: usize, ks: usize, stride: usize) -> usize {
    let pad = (ks - 1) / 2;
    (len + 2 * pad - ks) / stride + 1
}

struct ConvGeom {
    c_in: usize,
    c_out: usize,
    ks: usize,
    stride: usize,
    len: usize,
    out_len: usize,
}

impl ConvGeom {
    fn new(input: &[usize], weight: &[usize], stride: usize) -> Result<Self> {
        let (c_in, len) = (input[input.len() - 2], input[input.len() - 1]);
        let [c_out, w_in, ks] = weight else {
            return Err(Error::ShapeMismatch(format!("conv weight must be rank 3, got {weight:?}")));
        };
        if *w_in != c_in {
            return Err(Error::ShapeMismatch(format!("conv expects {w_in} input channels, got {c_in}")));
        }
        if ks % 2 == 0 || !(1..=2).contains(&stride) {
            return Err(Error::ShapeMismatch(format!("kernel {ks} must be odd and stride {stride} in 1..=2")));
        }
        if len == 0 {
            return Err(Error::ShapeMismatch("empty input sequence".into()));
        }
        Ok(Self { c_in, c_out: *c_out, ks: *ks, stride, len, out_len: conv_out_len(len, *ks, stride) })
    }

    fn im2col(&self, x: &[f64], col: &mut [f64]) {
        let pad = (self.ks - 1) / 2;
        for ci in 0..self.c_in {
            let xr = &x[ci * self.len..(ci + 1) * self.len];
            for k in 0..self.ks {
                let row = &mut col[(ci * self.ks + k) * self.out_len..][..self.out_len];
                for (j, v) in row.iter_mut().enumerate() {
                    let pos = (j * self.stride + k) as isize - pad as isize;
                    *v = if pos >= 0 && (pos as usize) < self.len { xr[pos as usize] } else { 0.0 };
                }
            }
        }
    }

    fn col2im(&self, col: &[f64], gx: &mut [f64]) {
        let pad = (self.ks - 1) / 2;
        for ci in 0..self.c_in {
            let gr = &mut gx[ci * self.len..(ci + 1) * self.len];
            for k in 0..self.ks {
                let row = &col[(ci * self.ks + k) * self.out_len..][..self.out_len];
                for (j, v) in row.iter().enumerate() {
                    let pos = (j * self.stride + k) as isize - pad as isize;
                    if pos >= 0 && (pos as usize) < self.len {
                        gr[pos as usize] += v;
                    }
                }
            }
        }
    }

    fn forward_one(&self, x: &[f64], w: &[f64], b: &[f64], out: &mut [f64]) {
        let kk = self.c_in * self.ks;
        let mut col = vec![0.0; kk * self.out_len];
        self.im2col(x, &mut col);
        for (co, row) in out.chunks_exact_mut(self.out_len).enumerate() {
            row.fill(b[co]);
        }
        gemm(self.c_out, kk, self.out_len, w, (kk, 1), &col, (self.out_len, 1), 1.0, out, (self.out_len, 1));
    }

    /// Accumulates into `gw`, `gb`; overwrites `gx`.
    fn backward_one(&self, x: &[f64], w: &[f64], gy: &[f64], gx: &mut [f64], gw: &mut [f64], gb: &mut [f64]) {
        let kk = self.c_in * self.ks;
        let mut col = vec![0.0; kk * self.out_len];
        self.im2col(x, &mut col);
        gemm(self.c_out, self.out_len, kk, gy, (self.out_len, 1), &col, (1, self.out_len), 1.0, gw, (kk, 1));
        for (co, row) in gy.chunks_exact(self.out_len).enumerate() {
            gb[co] += row.iter().sum::<f64>();
        }
        gemm(kk, self.c_out, self.out_len, w, (1, kk), gy, (self.out_len, 1), 0.0, &mut col, (self.out_len, 1));
        gx.fill(0.0);
        self.col2im(&col, gx);
    }
}

/// Batched cross-correlation. `input` is `[C_in, L]` or `[B, C_in, L]`.
pub fn conv1d_forward(input: &Tensor, weight: &Tensor, bias: &[f64], stride: usize) -> Result<Tensor> {
    let (batched, shape) = batch_view(input)?;
    let g = ConvGeom::new(&shape, weight.shape(), stride)?;
    if bias.len() != g.c_out {
        return Err(Error::ShapeMismatch(format!("bias of {} for {} channels", bias.len(), g.c_out)));
    }
    let bsz = shape[0];
    let in_sz = g.c_in * g.len;
    let out_sz = g.c_out * g.out_len;
    let mut out = vec![0.0; bsz * out_sz];
    out.par_chunks_mut(out_sz).enumerate().for_each(|(i, o)| {
        g.forward_one(&input.data()[i * in_sz..(i + 1) * in_sz], weight.data(), bias, o);
    });
    let shape = if batched { vec![bsz, g.c_out, g.out_len] } else { vec![g.c_out, g.out_len] };
    Tensor::new(shape, out)
}

/// Gradients `(input, weight, bias)` of the forward map for upstream `grad_out`.
pub fn conv1d_backward(
    grad_out: &Tensor,
    input: &Tensor,
    weight: &Tensor,
    stride: usize,
) -> Result<(Tensor, Tensor, Vec<f64>)> {
    let (batched, shape) = batch_view(input)?;
    let g = ConvGeom::new(&shape, weight.shape(), stride)?;
    let bsz = shape[0];
    let expect = if batched { vec![bsz, g.c_out, g.out_len] } else { vec![g.c_out, g.out_len] };
    same_shape(grad_out, &expect, "conv1d")?;
    let in_sz = g.c_in * g.len;
    let out_sz = g.c_out * g.out_len;
    let mut gx = vec![0.0; bsz * in_sz];
    let partial: Vec<(Vec<f64>, Vec<f64>)> = gx
        .par_chunks_mut(CONV_CHUNK * in_sz)
        .enumerate()
        .map(|(c, gxc)| {
            let mut gw = vec![0.0; weight.len()];
            let mut gb = vec![0.0; g.c_out];
            for (j, gxi) in gxc.chunks_exact_mut(in_sz).enumerate() {
                let i = c * CONV_CHUNK + j;
                let x = &input.data()[i * in_sz..(i + 1) * in_sz];
                let gy = &grad_out.data()[i * out_sz..(i + 1) * out_sz];
                g.backward_one(x, weight.data(), gy, gxi, &mut gw, &mut gb);
            }
            (gw, gb)
        })
        .collect();
    let mut gw = vec![0.0; weight.len()];
    let mut gb = vec![0.0; g.c_out];
    for (pw, pb) in partial {
        gw.iter_mut().zip(pw).for_each(|(a, b)| *a += b);
        gb.iter_mut().zip(pb).for_each(|(a, b)| *a += b);
    }
    Ok((Tensor::new(input.shape().to_vec(), gx)?, Tensor::new(weight.shape().to_vec(), gw)?, gb))
}

fn batch_view(x: &Tensor) -> Result<(bool, Vec<usize>)> {
    match x.shape() {
        [c, l] => Ok((false, vec![1, *c, *l])),
        [b, c, l] => Ok((true, vec![*b, *c, *l])),
        s => Err(Error::ShapeMismatch(format!("conv input must be [C, L] or [B, C, L], got {s:?}"))),
    }
}

#[derive(Clone, Debug)]
pub struct Conv1d {
    pub stride: usize,
    pub weight: Param,
    pub bias: Param,
    cache: Option<Tensor>,
}

impl Conv1d {
    pub fn new(c_in: usize, c_out: usize, ks: usize, stride: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / ((c_in * ks) as f64).sqrt();
        Self {
            stride,
            weight: Param::uniform(vec![c_out, c_in, ks], bound, true, rng),
            bias: Param::uniform(vec![c_out], bound, false, rng),
            cache: None,
        }
    }

    fn weight_tensor(&self) -> Tensor {
        Tensor::new(self.weight.shape.clone(), self.weight.value.clone()).expect("consistent shape")
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        expect_rank(x, 3, "conv1d")?;
        let y = conv1d_forward(x, &self.weight_tensor(), &self.bias.value, self.stride)?;
        self.cache = (mode == Mode::Train).then(|| x.clone());
        Ok(y)
    }

    pub fn backward(&mut self, gy: &Tensor) -> Result<Tensor> {
        let x = self.cache.as_ref().ok_or_else(|| Error::ShapeMismatch("conv1d backward without forward".into()))?;
        let (gx, gw, gb) = conv1d_backward(gy, x, &self.weight_tensor(), self.stride)?;
        self.weight.grad.iter_mut().zip(gw.data()).for_each(|(a, b)| *a += b);
        self.bias.grad.iter_mut().zip(&gb).for_each(|(a, b)| *a += b);
        Ok(gx)
    }
}

/// Per-channel normalization over batch and length.
#[derive(Clone, Debug)]
pub struct BatchNorm1d {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
    cache: Option<BnCache>,
}

#[derive(Clone, Debug)]
struct BnCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    shape: Vec<usize>,
}

impl BatchNorm1d {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Param::new(vec![channels], vec![1.0; channels], false),
            beta: Param::new(vec![channels], vec![0.0; channels], false),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            eps: 1e-5,
            momentum: 0.1,
            cache: None,
        }
    }

    fn dims(&self, x: &Tensor) -> Result<(usize, usize, usize)> {
        let c = self.gamma.value.len();
        let (b, ch, l) = match x.shape() {
            [b, ch] => (*b, *ch, 1),
            [b, ch, l] => (*b, *ch, *l),
            s => return Err(Error::ShapeMismatch(format!("batchnorm input {s:?}"))),
        };
        if ch != c {
            return Err(Error::ShapeMismatch(format!("batchnorm over {c} channels, got {ch}")));
        }
        Ok((b, c, l))
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let (b, c, l) = self.dims(x)?;
        let d = x.data();
        let mut out = vec![0.0; d.len()];
        let idx = |i: usize, ch: usize, j: usize| (i * c + ch) * l + j;
        match mode {
            Mode::Eval => {
                for ch in 0..c {
                    let inv = 1.0 / (self.running_var[ch] + self.eps).sqrt();
                    let (g, be, m) = (self.gamma.value[ch], self.beta.value[ch], self.running_mean[ch]);
                    for i in 0..b {
                        for j in 0..l {
                            out[idx(i, ch, j)] = g * (d[idx(i, ch, j)] - m) * inv + be;
                        }
                    }
                }
                self.cache = None;
            }
            Mode::Train => {
                let n = (b * l) as f64;
                let mut xhat = vec![0.0; d.len()];
                let mut inv_std = vec![0.0; c];
                for ch in 0..c {
                    let mut mean = 0.0;
                    for i in 0..b {
                        for j in 0..l {
                            mean += d[idx(i, ch, j)];
                        }
                    }
                    mean /= n;
                    let mut var = 0.0;
                    for i in 0..b {
                        for j in 0..l {
                            let t = d[idx(i, ch, j)] - mean;
                            var += t * t;
                        }
                    }
                    var /= n;
                    let inv = 1.0 / (var + self.eps).sqrt();
                    inv_std[ch] = inv;
                    let (g, be) = (self.gamma.value[ch], self.beta.value[ch]);
                    for i in 0..b {
                        for j in 0..l {
                            let k = idx(i, ch, j);
                            xhat[k] = (d[k] - mean) * inv;
                            out[k] = g * xhat[k] + be;
                        }
                    }
                    let unbiased = if n > 1.0 { var * n / (n - 1.0) } else { var };
                    self.running_mean[ch] = (1.0 - self.momentum) * self.running_mean[ch] + self.momentum * mean;
                    self.running_var[ch] = (1.0 - self.momentum) * self.running_var[ch] + self.momentum * unbiased;
                }
                self.cache = Some(BnCache { xhat, inv_std, shape: x.shape().to_vec() });
            }
        }
        Tensor::new(x.shape().to_vec(), out)
    }

    pub fn backward(&mut self, gy: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or_else(|| Error::ShapeMismatch("batchnorm backward without forward".into()))?;
        same_shape(gy, &cache.shape, "batchnorm")?;
        let (b, c, l) = self.dims(gy)?;
        let n = (b * l) as f64;
        let g = gy.data();
        let idx = |i: usize, ch: usize, j: usize| (i * c + ch) * l + j;
        let mut gx = vec![0.0; g.len()];
        for ch in 0..c {
            let (mut sum_g, mut sum_gx) = (0.0, 0.0);
            for i in 0..b {
                for j in 0..l {
                    let k = idx(i, ch, j);
                    sum_g += g[k];
                    sum_gx += g[k] * cache.xhat[k];
                }
            }
            self.gamma.grad[ch] += sum_gx;
            self.beta.grad[ch] += sum_g;
            let scale = self.gamma.value[ch] * cache.inv_std[ch] / n;
            for i in 0..b {
                for j in 0..l {
                    let k = idx(i, ch, j);
                    gx[k] = scale * (n * g[k] - sum_g - cache.xhat[k] * sum_gx);
                }
            }
        }
        Tensor::new(gy.shape().to_vec(), gx)
    }
}

/// Affine map `y = x Wᵀ + b` on `[B, in]`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub weight: Param,
    pub bias: Param,
    cache: Option<Tensor>,
}

impl Dense {
    pub fn new(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (n_in as f64).sqrt();
        Self {
            weight: Param::uniform(vec![n_out, n_in], bound, true, rng),
            bias: Param::uniform(vec![n_out], bound, false, rng),
            cache: None,
        }
    }

    pub fn from_parts(weight: Vec<f64>, bias: Vec<f64>, n_in: usize) -> Result<Self> {
        let n_out = bias.len();
        if weight.len() != n_in * n_out {
            return Err(Error::ShapeMismatch(format!("dense weight of {} for {n_out}x{n_in}", weight.len())));
        }
        Ok(Self {
            weight: Param::new(vec![n_out, n_in], weight, true),
            bias: Param::new(vec![n_out], bias, false),
            cache: None,
        })
    }

    pub fn n_in(&self) -> usize {
        self.weight.shape[1]
    }

    pub fn n_out(&self) -> usize {
        self.weight.shape[0]
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        expect_rank(x, 2, "dense")?;
        let (b, n_in, n_out) = (x.batch(), self.n_in(), self.n_out());
        if x.shape()[1] != n_in {
            return Err(Error::ShapeMismatch(format!("dense expects {n_in} features, got {}", x.shape()[1])));
        }
        let mut out = Vec::with_capacity(b * n_out);
        for _ in 0..b {
            out.extend_from_slice(&self.bias.value);
        }
        gemm(b, n_in, n_out, x.data(), (n_in, 1), &self.weight.value, (1, n_in), 1.0, &mut out, (n_out, 1));
        self.cache = (mode == Mode::Train).then(|| x.clone());
        Tensor::new(vec![b, n_out], out)
    }

    pub fn backward(&mut self, gy: &Tensor) -> Result<Tensor> {
        let x = self.cache.as_ref().ok_or_else(|| Error::ShapeMismatch("dense backward without forward".into()))?;
        let (b, n_in, n_out) = (x.batch(), self.n_in(), self.n_out());
        same_shape(gy, &[b, n_out], "dense")?;
        gemm(n_out, b, n_in, gy.data(), (1, n_out), x.data(), (n_in, 1), 1.0, &mut self.weight.grad, (n_in, 1));
        for row in gy.data().chunks_exact(n_out) {
            self.bias.grad.iter_mut().zip(row).for_each(|(a, g)| *a += g);
        }
        let mut gx = vec![0.0; b * n_in];
        gemm(b, n_out, n_in, gy.data(), (n_out, 1), &self.weight.value, (n_in, 1), 0.0, &mut gx, (n_in, 1));
        Tensor::new(vec![b, n_in], gx)
    }
}

pub fn relu(x: f64) -> f64 {
    if x < 0.0 { 0.0 } else { x }
}

/// Inverted dropout: survivors are scaled by `1/(1-rate)`; identity in eval mode.
pub fn dropout(x: &[f64], rate: f64, mode: Mode, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    if mode == Mode::Eval || rate == 0.0 {
        return (x.to_vec(), vec![1.0; x.len()]);
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = x.iter().map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect();
    (x.iter().zip(&mask).map(|(a, m)| a * m).collect(), mask)
}

/// Fixed per-feature affine normalization `(x - mean) / std` on `[B, F]`.
#[derive(Clone, Debug)]
pub struct Standardize {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardize {
    pub fn identity(n: usize) -> Self {
        Self { mean: vec![0.0; n], std: vec![1.0; n] }
    }

    /// Column mean and population standard deviation; constant columns get std 1.
    pub fn fit(x: &Tensor) -> Result<Self> {
        expect_rank(x, 2, "standardize")?;
        let (b, f) = (x.batch(), x.shape()[1]);
        let mut mean = vec![0.0; f];
        let mut std = vec![0.0; f];
        for row in x.data().chunks_exact(f) {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= b.max(1) as f64);
        for row in x.data().chunks_exact(f) {
            for j in 0..f {
                std[j] += (row[j] - mean[j]).powi(2);
            }
        }
        for s in &mut std {
            *s = (*s / b.max(1) as f64).sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        Ok(Self { mean, std })
    }
}

/// One step of a sequential model.
#[derive(Clone, Debug)]
pub enum Layer {
    Conv1d(Conv1d),
    BatchNorm1d(BatchNorm1d),
    Dense(Dense),
    Relu { mask: Vec<bool> },
    Dropout { rate: f64, mask: Vec<f64> },
    /// `[B, C, 1]` to `[B, C]`.
    Flatten { shape: Vec<usize> },
    Standardize(Standardize),
}

impl Layer {
    pub fn relu() -> Self {
        Layer::Relu { mask: Vec::new() }
    }

    pub fn dropout(rate: f64) -> Self {
        Layer::Dropout { rate, mask: Vec::new() }
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Tensor> {
        match self {
            Layer::Conv1d(c) => c.forward(x, mode),
            Layer::BatchNorm1d(b) => b.forward(x, mode),
            Layer::Dense(d) => d.forward(x, mode),
            Layer::Relu { mask } => {
                if mode == Mode::Train {
                    *mask = x.data().iter().map(|&v| v > 0.0).collect();
                }
                Tensor::new(x.shape().to_vec(), x.data().iter().map(|&v| relu(v)).collect())
            }
            Layer::Dropout { rate, mask } => {
                let (y, m) = dropout(x.data(), *rate, mode, rng);
                if mode == Mode::Train {
                    *mask = m;
                }
                Tensor::new(x.shape().to_vec(), y)
            }
            Layer::Flatten { shape } => {
                let s = x.shape();
                if s.len() != 3 || s[2] != 1 {
                    return Err(Error::ShapeMismatch(format!("flatten expects [B, C, 1], got {s:?}")));
                }
                *shape = s.to_vec();
                x.clone().reshape(vec![s[0], s[1]])
            }
            Layer::Standardize(st) => {
                expect_rank(x, 2, "standardize")?;
                let f = st.mean.len();
                if x.shape()[1] != f {
                    return Err(Error::ShapeMismatch(format!("standardize expects {f} features, got {}", x.shape()[1])));
                }
                let mut y = x.data().to_vec();
                for row in y.chunks_exact_mut(f) {
                    for j in 0..f {
                        row[j] = (row[j] - st.mean[j]) / st.std[j];
                    }
                }
                Tensor::new(x.shape().to_vec(), y)
            }
        }
    }

    pub fn backward(&mut self, gy: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(c) => c.backward(gy),
            Layer::BatchNorm1d(b) => b.backward(gy),
            Layer::Dense(d) => d.backward(gy),
            Layer::Relu { mask } => {
                if mask.len() != gy.len() {
                    return Err(Error::ShapeMismatch("relu backward without matching forward".into()));
                }
                let g = gy.data().iter().zip(mask.iter()).map(|(&g, &m)| if m { g } else { 0.0 }).collect();
                Tensor::new(gy.shape().to_vec(), g)
            }
            Layer::Dropout { mask, .. } => {
                if mask.len() != gy.len() {
                    return Err(Error::ShapeMismatch("dropout backward without matching forward".into()));
                }
                Tensor::new(gy.shape().to_vec(), gy.data().iter().zip(mask.iter()).map(|(g, m)| g * m).collect())
            }
            Layer::Flatten { shape } => gy.clone().reshape(shape.clone()),
            Layer::Standardize(st) => {
                let f = st.std.len();
                let mut g = gy.data().to_vec();
                for row in g.chunks_exact_mut(f) {
                    row.iter_mut().zip(&st.std).for_each(|(v, s)| *v /= s);
                }
                Tensor::new(gy.shape().to_vec(), g)
            }
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            Layer::Conv1d(c) => vec![&mut c.weight, &mut c.bias],
            Layer::BatchNorm1d(b) => vec![&mut b.gamma, &mut b.beta],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => Vec::new(),
        }
    }

    /// Every persisted array in declaration order: parameters, then buffers.
    pub fn state(&self) -> Vec<(Vec<usize>, &[f64])> {
        match self {
            Layer::Conv1d(c) => vec![(c.weight.shape.clone(), &c.weight.value), (c.bias.shape.clone(), &c.bias.value)],
            Layer::BatchNorm1d(b) => {
                let n = vec![b.gamma.value.len()];
                vec![
                    (n.clone(), &b.gamma.value),
                    (n.clone(), &b.beta.value),
                    (n.clone(), &b.running_mean),
                    (n, &b.running_var),
                ]
            }
            Layer::Dense(d) => vec![(d.weight.shape.clone(), &d.weight.value), (d.bias.shape.clone(), &d.bias.value)],
            Layer::Standardize(s) => vec![(vec![s.mean.len()], &s.mean), (vec![s.std.len()], &s.std)],
            _ => Vec::new(),
        }
    }

    pub fn state_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Conv1d(c) => vec![&mut c.weight.value, &mut c.bias.value],
            Layer::BatchNorm1d(b) => vec![&mut b.gamma.value, &mut b.beta.value, &mut b.running_mean, &mut b.running_var],
            Layer::Dense(d) => vec![&mut d.weight.value, &mut d.bias.value],
            Layer::Standardize(s) => vec![&mut s.mean, &mut s.std],
            _ => Vec::new(),
        }
    }

    /// Drop cached activations.
    pub fn clear_cache(&mut self) {
        match self {
            Layer::Conv1d(c) => c.cache = None,
            Layer::BatchNorm1d(b) => b.cache = None,
            Layer::Dense(d) => d.cache = None,
            Layer::Relu { mask } => *mask = Vec::new(),
            Layer::Dropout { mask, .. } => *mask = Vec::new(),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_tensor(shape: &[usize], r: &mut ChaCha8Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn naive_conv(x: &Tensor, w: &Tensor, b: &[f64], stride: usize) -> Vec<f64> {
        let (ci, l) = (x.shape()[0], x.shape()[1]);
        let (co, ks) = (w.shape()[0], w.shape()[2]);
        let pad = (ks - 1) / 2;
        let lo = conv_out_len(l, ks, stride);
        let mut out = vec![0.0; co * lo];
        for o in 0..co {
            for j in 0..lo {
                let mut s = b[o];
                for c in 0..ci {
                    for k in 0..ks {
                        let p = (j * stride + k) as isize - pad as isize;
                        if p >= 0 && (p as usize) < l {
                            s += w.data()[(o * ci + c) * ks + k] * x.data()[c * l + p as usize];
                        }
                    }
                }
                out[o * lo + j] = s;
            }
        }
        out
    }

    #[test]
    fn identity_kernel_and_lengths() {
        let mut r = rng(1);
        let x = random_tensor(&[2, 9], &mut r);
        let mut w = Tensor::zeros(&[2, 2, 5]);
        w.data_mut()[2] = 1.0; // out 0 <- in 0, centre
        w.data_mut()[(2 + 1) * 5 + 2] = 1.0; // out 1 <- in 1
        let y = conv1d_forward(&x, &w, &[0.0, 0.0], 1).unwrap();
        assert_eq!(y, x);
        let x5 = random_tensor(&[1, 5], &mut r);
        let y = conv1d_forward(&x5, &random_tensor(&[1, 1, 3], &mut r), &[0.0], 2).unwrap();
        assert_eq!(y.shape(), &[1, 3]);
        assert_eq!(conv_out_len(1229, 17, 2), 615);
        assert_eq!(conv_out_len(1, 17, 2), 1);
    }

    #[test]
    fn matches_naive_loops() {
        let mut r = rng(2);
        for stride in [1, 2] {
            for (ci, co, l, ks) in [(3, 4, 11, 3), (2, 5, 8, 7), (1, 1, 1, 17)] {
                let x = random_tensor(&[ci, l], &mut r);
                let w = random_tensor(&[co, ci, ks], &mut r);
                let b: Vec<f64> = (0..co).map(|_| r.gen_range(-1.0..1.0)).collect();
                let y = conv1d_forward(&x, &w, &b, stride).unwrap();
                for (a, e) in y.data().iter().zip(naive_conv(&x, &w, &b, stride)) {
                    assert!((a - e).abs() < 1e-12);
                }
            }
        }
        let bad = conv1d_forward(&random_tensor(&[2, 4], &mut r), &random_tensor(&[1, 3, 3], &mut r), &[0.0], 1);
        assert!(matches!(bad, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn conv_backward_linear_in_grad() {
        let mut r = rng(3);
        let x = random_tensor(&[2, 3, 10], &mut r);
        let w = random_tensor(&[4, 3, 5], &mut r);
        let g = random_tensor(&[2, 4, 5], &mut r);
        let (gx, gw, gb) = conv1d_backward(&Tensor::zeros(&[2, 4, 5]), &x, &w, 2).unwrap();
        assert!(gx.data().iter().chain(gw.data()).chain(&gb).all(|&v| v == 0.0));
        let (gx1, gw1, _) = conv1d_backward(&g, &x, &w, 2).unwrap();
        let g3 = Tensor::new(g.shape().to_vec(), g.data().iter().map(|v| 3.0 * v).collect()).unwrap();
        let (gx3, gw3, _) = conv1d_backward(&g3, &x, &w, 2).unwrap();
        for (a, b) in gx1.data().iter().chain(gw1.data()).zip(gx3.data().iter().chain(gw3.data())) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn batchnorm_statistics() {
        let mut bn = BatchNorm1d::new(2);
        bn.beta.value = vec![0.5, -1.0];
        let c = Tensor::new(vec![3, 2, 2], vec![4.0; 12]).unwrap();
        let y = bn.forward(&c, Mode::Train).unwrap();
        assert!(y.data().chunks(2).enumerate().all(|(i, v)| v.iter().all(|&z| z == [0.5, -1.0][i % 2])));
        let mut r = rng(4);
        let mut bn = BatchNorm1d::new(3);
        let x = random_tensor(&[8, 3, 5], &mut r);
        let y = bn.forward(&x, Mode::Train).unwrap();
        for ch in 0..3 {
            let v: Vec<f64> = (0..8).flat_map(|i| y.item(i)[ch * 5..(ch + 1) * 5].to_vec()).collect();
            let m = v.iter().sum::<f64>() / 40.0;
            let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / 40.0;
            assert!(m.abs() < 1e-12 && (var - 1.0).abs() < 1e-3);
        }
        assert!(bn.running_mean.iter().all(|m| m.abs() < 0.1));
    }

    #[test]
    fn dense_identity_and_composition() {
        let mut r = rng(5);
        let mut id = Dense::from_parts(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2).unwrap();
        let x = random_tensor(&[4, 2], &mut r);
        assert_eq!(id.forward(&x, Mode::Eval).unwrap(), x);
        let mut a = Dense::new(3, 4, &mut r);
        let mut b = Dense::new(4, 2, &mut r);
        let x = random_tensor(&[5, 3], &mut r);
        let y = b.forward(&a.forward(&x, Mode::Eval).unwrap(), Mode::Eval).unwrap();
        // single affine map: W = Wb·Wa, c = Wb·ba + bb
        let mut w = vec![0.0; 6];
        gemm(2, 4, 3, &b.weight.value, (4, 1), &a.weight.value, (3, 1), 0.0, &mut w, (3, 1));
        let c: Vec<f64> = (0..2)
            .map(|i| b.bias.value[i] + (0..4).map(|k| b.weight.value[i * 4 + k] * a.bias.value[k]).sum::<f64>())
            .collect();
        let mut single = Dense::from_parts(w, c, 3).unwrap();
        let y2 = single.forward(&x, Mode::Eval).unwrap();
        assert!(y.data().iter().zip(y2.data()).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn relu_and_dropout() {
        assert_eq!(relu(-1.0), 0.0);
        assert_eq!(relu(2.0), 2.0);
        let mut r = rng(6);
        let x = vec![1.5; 100_000];
        assert_eq!(dropout(&x, 0.0, Mode::Train, &mut r).0, x);
        assert_eq!(dropout(&x, 0.4, Mode::Eval, &mut r).0, x);
        let (y, _) = dropout(&x, 0.3, Mode::Train, &mut r);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean / 1.5 - 1.0).abs() < 0.01, "{mean}");
    }
}
