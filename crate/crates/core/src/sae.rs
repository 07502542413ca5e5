//! Stacked autoencoder codec.
//!
//! Encoder layers shrink strictly from the input dimension to the
//! bottleneck; the decoder mirrors them with its own (untied) weights. Every
//! layer is an affine map. The hidden activation is applied after every layer
//! except the last encoder layer (so the code is unconstrained) and the last
//! decoder layer (identity output).
//!
//! Training is plain mini-batch gradient descent on the mean squared
//! reconstruction error `|x - x~|^2 / d0`, single-threaded and deterministic
//! given the seed. The model splits into an [`EncoderPart`] for the edge node
//! and a [`DecoderPart`] for the cloud; both carry the same fingerprint.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SaeError {
    #[error("invalid layer sizes {sizes:?}: {reason}")]
    InvalidSizes { sizes: Vec<usize>, reason: String },
    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("distortion is undefined for a zero-norm reference signal")]
    ZeroReference,
    #[error("compression ratio {cr} is not achievable; achievable ratios: {achievable:?}")]
    UnachievableRatio { cr: usize, achievable: Vec<usize> },
    #[error("model file: {0}")]
    Format(String),
    #[error("parameter {0} is not finite")]
    NonFiniteParameter(String),
}

pub type Result<T> = std::result::Result<T, SaeError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Identity => v,
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Affine map `y = W x + b` with `W` stored row-major (`rows` outputs by
/// `cols` inputs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(SaeError::InvalidSizes {
                sizes: vec![cols, rows],
                reason: format!(
                    "weights have {} entries and bias {}, expected {} and {rows}",
                    weights.len(),
                    bias.len(),
                    rows * cols
                ),
            });
        }
        Ok(Self {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.cols)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }

    fn flops(&self) -> u64 {
        2 * (self.rows * self.cols) as u64
    }
}

/// Runs a chain of layers; the activation follows every layer but the last.
fn run_chain(layers: &[DenseLayer], activation: Activation, x: &[f64]) -> Vec<f64> {
    let last = layers.len() - 1;
    let mut h = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        h = layer.affine(&h);
        if i < last {
            h.iter_mut().for_each(|v| *v = activation.apply(*v));
        }
    }
    h
}

/// Whether encoder sizes must strictly shrink.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeRule {
    Strict,
    /// Allows equal or growing sizes; only for hand-built test models.
    Relaxed,
}

fn check_sizes(sizes: &[usize], rule: SizeRule) -> Result<()> {
    let err = |reason: &str| SaeError::InvalidSizes {
        sizes: sizes.to_vec(),
        reason: reason.into(),
    };
    if sizes.len() < 2 {
        return Err(err("need at least an input and a bottleneck size"));
    }
    if sizes.contains(&0) {
        return Err(err("layer sizes must be positive"));
    }
    if rule == SizeRule::Strict && sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(err("encoder sizes must strictly decrease"));
    }
    if sizes.len() - 1 > u16::MAX as usize || sizes.iter().any(|&s| s > u32::MAX as usize) {
        return Err(err("too many or too large layers"));
    }
    Ok(())
}

/// Fingerprint of a model's hyperparameters plus a run tag.
pub fn fingerprint(sizes: &[usize], activation: Activation, run_tag: &[u8]) -> u64 {
    let mut h = Sha256::new();
    h.update(b"SAE1");
    h.update([activation.code()]);
    for &s in sizes {
        h.update((s as u64).to_le_bytes());
    }
    h.update(run_tag);
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaeModel {
    sizes: Vec<usize>,
    activation: Activation,
    encoder: Vec<DenseLayer>,
    decoder: Vec<DenseLayer>,
    fingerprint: u64,
}

pub const DEFAULT_INIT_SCALE: f64 = 1.0;

/// Random model with weights uniform in `[-s, s]`, `s = scale / sqrt(fan_in)`,
/// and zero biases. Encoder and decoder are drawn independently.
pub fn init_sae(sizes: &[usize], activation: Activation, seed: u64, weight_init_scale: f64) -> Result<SaeModel> {
    check_sizes(sizes, SizeRule::Strict)?;
    if !(weight_init_scale.is_finite() && weight_init_scale > 0.0) {
        return Err(SaeError::InvalidConfig(format!(
            "weight_init_scale {weight_init_scale} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_layer = |rows: usize, cols: usize| {
        let s = weight_init_scale / (cols as f64).sqrt();
        let weights = (0..rows * cols).map(|_| rng.gen_range(-s..=s)).collect();
        DenseLayer {
            rows,
            cols,
            weights,
            bias: vec![0.0; rows],
        }
    };
    let encoder: Vec<DenseLayer> = sizes.windows(2).map(|w| random_layer(w[1], w[0])).collect();
    let decoder: Vec<DenseLayer> = sizes.windows(2).rev().map(|w| random_layer(w[0], w[1])).collect();
    let mut tag = b"init".to_vec();
    tag.extend(seed.to_le_bytes());
    tag.extend(weight_init_scale.to_le_bytes());
    Ok(SaeModel {
        sizes: sizes.to_vec(),
        activation,
        encoder,
        decoder,
        fingerprint: fingerprint(sizes, activation, &tag),
    })
}

fn check_chain(sizes: &[usize], encoder: &[DenseLayer], decoder: &[DenseLayer]) -> Result<()> {
    let l = sizes.len() - 1;
    let bad = |reason: String| SaeError::InvalidSizes {
        sizes: sizes.to_vec(),
        reason,
    };
    if encoder.len() != l || decoder.len() != l {
        return Err(bad(format!(
            "expected {l} encoder and decoder layers, got {} and {}",
            encoder.len(),
            decoder.len()
        )));
    }
    for (i, layer) in encoder.iter().enumerate() {
        if (layer.cols, layer.rows) != (sizes[i], sizes[i + 1]) {
            return Err(bad(format!("encoder layer {i} is {}x{}", layer.rows, layer.cols)));
        }
    }
    for (i, layer) in decoder.iter().enumerate() {
        if (layer.cols, layer.rows) != (sizes[l - i], sizes[l - i - 1]) {
            return Err(bad(format!("decoder layer {i} is {}x{}", layer.rows, layer.cols)));
        }
    }
    Ok(())
}

fn check_finite<'a>(layers: impl IntoIterator<Item = &'a DenseLayer>) -> Result<()> {
    for (i, layer) in layers.into_iter().enumerate() {
        if layer.params().any(|p| !p.is_finite()) {
            return Err(SaeError::NonFiniteParameter(format!("layer {i}")));
        }
    }
    Ok(())
}

impl SaeModel {
    /// Assembles a model from explicit layers. `decoder[0]` maps the
    /// bottleneck back up; `decoder.last()` produces the reconstruction.
    pub fn from_layers(
        sizes: Vec<usize>,
        activation: Activation,
        encoder: Vec<DenseLayer>,
        decoder: Vec<DenseLayer>,
        rule: SizeRule,
    ) -> Result<Self> {
        check_sizes(&sizes, rule)?;
        check_chain(&sizes, &encoder, &decoder)?;
        check_finite(encoder.iter().chain(&decoder))?;
        let fingerprint = fingerprint(&sizes, activation, b"assembled");
        Ok(Self {
            sizes,
            activation,
            encoder,
            decoder,
            fingerprint,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn code_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn encoder_layers(&self) -> &[DenseLayer] {
        &self.encoder
    }

    pub fn decoder_layers(&self) -> &[DenseLayer] {
        &self.decoder
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x)?;
        Ok(run_chain(&self.encoder, self.activation, x))
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.code_dim(), z)?;
        Ok(run_chain(&self.decoder, self.activation, z))
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.encode(x)?)
    }

    pub fn split(&self) -> (EncoderPart, DecoderPart) {
        (
            EncoderPart {
                sizes: self.sizes.clone(),
                activation: self.activation,
                layers: self.encoder.clone(),
                fingerprint: self.fingerprint,
            },
            DecoderPart {
                sizes: self.sizes.clone(),
                activation: self.activation,
                layers: self.decoder.clone(),
                fingerprint: self.fingerprint,
            },
        )
    }

    /// Total parameter count.
    pub fn n_params(&self) -> usize {
        self.encoder
            .iter()
            .chain(&self.decoder)
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.encoder.iter().chain(&self.decoder)
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }

    /// Folds a per-dimension standardization into the outer layers so that
    /// the model consumes and produces raw (unstandardized) vectors.
    pub fn absorb_standardization(&self, std: &Standardizer) -> Result<SaeModel> {
        if std.mean.len() != self.input_dim() {
            return Err(SaeError::DimensionMismatch {
                expected: self.input_dim(),
                actual: std.mean.len(),
            });
        }
        let mut out = self.clone();
        let first = &mut out.encoder[0];
        for r in 0..first.rows {
            let mut shift = 0.0;
            for c in 0..first.cols {
                let w = first.weights[r * first.cols + c] / std.sd[c];
                first.weights[r * first.cols + c] = w;
                shift += w * std.mean[c];
            }
            first.bias[r] -= shift;
        }
        let last = out.decoder.last_mut().expect("at least one decoder layer");
        for r in 0..last.rows {
            for c in 0..last.cols {
                last.weights[r * last.cols + c] *= std.sd[r];
            }
            last.bias[r] = std.sd[r] * last.bias[r] + std.mean[r];
        }
        let mut tag = b"standardized".to_vec();
        tag.extend(self.fingerprint.to_le_bytes());
        out.fingerprint = fingerprint(&out.sizes, out.activation, &tag);
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        write_container(
            Half::Full,
            &self.sizes,
            self.activation,
            self.layers(),
            self.fingerprint,
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let c = read_container(bytes, Half::Full)?;
        let l = c.sizes.len() - 1;
        let mut layers = c.layers;
        let decoder = layers.split_off(l);
        let model = SaeModel {
            sizes: c.sizes,
            activation: c.activation,
            encoder: layers,
            decoder,
            fingerprint: c.fingerprint,
        };
        check_finite(model.layers())?;
        Ok(model)
    }
}

fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(SaeError::DimensionMismatch {
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Encoder half, deployed on the edge node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderPart {
    sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<DenseLayer>,
    fingerprint: u64,
}

/// Decoder half, deployed in the cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderPart {
    sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<DenseLayer>,
    fingerprint: u64,
}

impl EncoderPart {
    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn code_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x)?;
        Ok(run_chain(&self.layers, self.activation, x))
    }

    /// Multiply-add count of one forward pass, `2 * sum(d_{i-1} * d_i)`.
    pub fn flops(&self) -> u64 {
        self.layers.iter().map(DenseLayer::flops).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        write_container(
            Half::Encoder,
            &self.sizes,
            self.activation,
            self.layers.iter(),
            self.fingerprint,
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let c = read_container(bytes, Half::Encoder)?;
        check_finite(&c.layers)?;
        Ok(Self {
            sizes: c.sizes,
            activation: c.activation,
            layers: c.layers,
            fingerprint: c.fingerprint,
        })
    }
}

impl DecoderPart {
    pub fn output_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn code_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.code_dim(), z)?;
        Ok(run_chain(&self.layers, self.activation, z))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        write_container(
            Half::Decoder,
            &self.sizes,
            self.activation,
            self.layers.iter(),
            self.fingerprint,
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let c = read_container(bytes, Half::Decoder)?;
        check_finite(&c.layers)?;
        Ok(Self {
            sizes: c.sizes,
            activation: c.activation,
            layers: c.layers,
            fingerprint: c.fingerprint,
        })
    }
}

// Model container, little-endian:
//   "SAE1" | u8 activation | u8 half (0 full, 1 encoder, 2 decoder)
//   | u16 size count | u32 sizes... | per layer: f64 weights (row-major), f64 bias
//   | u64 fingerprint
const MODEL_MAGIC: &[u8; 4] = b"SAE1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Half {
    Full = 0,
    Encoder = 1,
    Decoder = 2,
}

fn write_container<'a>(
    half: Half,
    sizes: &[usize],
    activation: Activation,
    layers: impl Iterator<Item = &'a DenseLayer>,
    fp: u64,
) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.push(activation.code());
    out.push(half as u8);
    out.extend_from_slice(&(sizes.len() as u16).to_le_bytes());
    for &s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for layer in layers {
        for p in layer.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out.extend_from_slice(&fp.to_le_bytes());
    out
}

struct Container {
    sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<DenseLayer>,
    fingerprint: u64,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| SaeError::Format(format!("truncated at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| SaeError::Format("layer too large".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn read_container(bytes: &[u8], expected: Half) -> Result<Container> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != MODEL_MAGIC {
        return Err(SaeError::Format("bad magic".into()));
    }
    let activation =
        Activation::from_code(cur.u8()?).ok_or_else(|| SaeError::Format("unknown activation code".into()))?;
    let half = cur.u8()?;
    if half != expected as u8 {
        return Err(SaeError::Format(format!(
            "container holds half {half}, expected {}",
            expected as u8
        )));
    }
    let count = cur.u16()? as usize;
    let sizes = (0..count)
        .map(|_| cur.u32().map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    check_sizes(&sizes, SizeRule::Relaxed)?;
    let mut shapes = Vec::new();
    if expected != Half::Decoder {
        shapes.extend(sizes.windows(2).map(|w| (w[1], w[0])));
    }
    if expected != Half::Encoder {
        shapes.extend(sizes.windows(2).rev().map(|w| (w[0], w[1])));
    }
    let mut layers = Vec::with_capacity(shapes.len());
    for (rows, cols) in shapes {
        let weights = cur.f64s(rows * cols)?;
        let bias = cur.f64s(rows)?;
        layers.push(DenseLayer {
            rows,
            cols,
            weights,
            bias,
        });
    }
    let fingerprint = cur.u64()?;
    if cur.pos != bytes.len() {
        return Err(SaeError::Format(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok(Container {
        sizes,
        activation,
        layers,
        fingerprint,
    })
}

/// Gradient of the reconstruction loss, one entry per layer in the same
/// order as the model (encoder layers, then decoder layers).
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

impl Gradients {
    fn zeros_like(model: &SaeModel) -> Self {
        Self {
            layers: model.layers().map(|l| DenseLayer::zeros(l.rows, l.cols)).collect(),
        }
    }

    /// Flattened in model parameter order (per layer: weights, then bias).
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params().copied()).collect()
    }
}

/// Per-sample reconstruction loss `|x - x~|^2 / d0`.
pub fn reconstruction_loss(model: &SaeModel, x: &[f64]) -> Result<f64> {
    let xr = model.reconstruct(x)?;
    Ok(squared_error(x, &xr) / x.len() as f64)
}

fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Accumulates `weight * dL/dtheta` for one sample into `grads`; returns the
/// sample loss.
fn backprop_into(model: &SaeModel, x: &[f64], weight: f64, grads: &mut Gradients) -> f64 {
    let layers: Vec<&DenseLayer> = model.layers().collect();
    let n_enc = model.encoder.len();
    let n = layers.len();
    // activation after layer i unless it closes the encoder or the decoder
    let activated = |i: usize| i + 1 != n_enc && i + 1 != n;

    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    outputs.push(x.to_vec());
    for (i, layer) in layers.iter().enumerate() {
        let mut h = layer.affine(&outputs[i]);
        if activated(i) {
            h.iter_mut().for_each(|v| *v = model.activation.apply(*v));
        }
        outputs.push(h);
    }
    let d0 = x.len() as f64;
    let xr = &outputs[n];
    let loss = squared_error(x, xr) / d0;

    let mut delta: Vec<f64> = xr.iter().zip(x).map(|(r, t)| 2.0 * (r - t) / d0).collect();
    for i in (0..n).rev() {
        if activated(i) {
            for (d, y) in delta.iter_mut().zip(&outputs[i + 1]) {
                *d *= model.activation.derivative_from_output(*y);
            }
        }
        let layer = layers[i];
        let input = &outputs[i];
        let g = &mut grads.layers[i];
        for r in 0..layer.rows {
            let dr = weight * delta[r];
            g.bias[r] += dr;
            let row = &mut g.weights[r * layer.cols..(r + 1) * layer.cols];
            for (gw, a) in row.iter_mut().zip(input) {
                *gw += dr * a;
            }
        }
        if i > 0 {
            let mut prev = vec![0.0; layer.cols];
            for r in 0..layer.rows {
                let d = delta[r];
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * d;
                }
            }
            delta = prev;
        }
    }
    loss
}

/// Analytic gradient of [`reconstruction_loss`] at `x`.
pub fn loss_gradient(model: &SaeModel, x: &[f64]) -> Result<(f64, Gradients)> {
    check_dim(model.input_dim(), x)?;
    let mut grads = Gradients::zeros_like(model);
    let loss = backprop_into(model, x, 1.0, &mut grads);
    Ok((loss, grads))
}

/// Largest relative difference between the analytic gradient and central
/// finite differences, over every parameter. The denominator is floored at
/// `1e-8` so parameters with vanishing gradient compare absolutely.
pub fn gradient_check(model: &SaeModel, x: &[f64], epsilon: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(SaeError::InvalidConfig(format!(
            "epsilon {epsilon} outside [1e-7, 1e-3]"
        )));
    }
    let (_, grads) = loss_gradient(model, x)?;
    let analytic = grads.flatten();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let n_params = model.n_params();
    for (idx, &a) in analytic.iter().enumerate().take(n_params) {
        let original = *probe.layers_mut().flat_map(|l| l.params_mut()).nth(idx).expect("param");
        let set = |m: &mut SaeModel, v: f64| {
            *m.layers_mut().flat_map(|l| l.params_mut()).nth(idx).expect("param") = v;
        };
        set(&mut probe, original + epsilon);
        let plus = reconstruction_loss(&probe, x)?;
        set(&mut probe, original - epsilon);
        let minus = reconstruction_loss(&probe, x)?;
        set(&mut probe, original);
        let numeric = (plus - minus) / (2.0 * epsilon);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub weight_init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 300,
            batch_size: 16,
            seed: 0,
            weight_init_scale: DEFAULT_INIT_SCALE,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(SaeError::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(SaeError::InvalidConfig("epochs and batch size must be positive".into()));
        }
        if !(self.weight_init_scale.is_finite() && self.weight_init_scale > 0.0) {
            return Err(SaeError::InvalidConfig(format!(
                "weight_init_scale {}",
                self.weight_init_scale
            )));
        }
        Ok(())
    }

    fn tag(&self) -> Vec<u8> {
        let mut tag = b"train".to_vec();
        tag.extend(self.learning_rate.to_le_bytes());
        tag.extend((self.epochs as u64).to_le_bytes());
        tag.extend((self.batch_size as u64).to_le_bytes());
        tag.extend(self.seed.to_le_bytes());
        tag.extend(self.weight_init_scale.to_le_bytes());
        tag
    }
}

/// Mini-batch gradient descent on the mean reconstruction loss. Returns the
/// trained model and the mean loss of every epoch (measured during the
/// epoch, before each batch's update).
pub fn train_sae(model: &SaeModel, data: &[Vec<f64>], cfg: &TrainConfig) -> Result<(SaeModel, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(SaeError::InvalidConfig("no training vectors".into()));
    }
    for row in data {
        check_dim(model.input_dim(), row)?;
    }
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut sample_loss = vec![0.0; data.len()];
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeros_like(&model);
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                sample_loss[i] = backprop_into(&model, &data[i], w, &mut grads);
            }
            if cfg.learning_rate != 0.0 {
                for (layer, g) in model.layers_mut().zip(&grads.layers) {
                    for (p, gp) in layer.params_mut().zip(g.params()) {
                        *p -= cfg.learning_rate * gp;
                    }
                }
            }
        }
        // summed in index order so the value does not depend on the shuffle
        let mean = sample_loss.iter().sum::<f64>() / data.len() as f64;
        if !mean.is_finite() {
            return Err(SaeError::Divergence { epoch });
        }
        history.push(mean);
    }
    if model.layers().any(|l| l.params().any(|p| !p.is_finite())) {
        return Err(SaeError::Divergence { epoch: cfg.epochs - 1 });
    }
    let mut tag = cfg.tag();
    tag.extend(model.fingerprint.to_le_bytes());
    model.fingerprint = fingerprint(&model.sizes, model.activation, &tag);
    Ok((model, history))
}

/// Percentage root-mean-square difference, `100 * |x - x~| / |x|`.
pub fn distortion_prd(x: &[f64], reconstruction: &[f64]) -> Result<f64> {
    check_dim(x.len(), reconstruction)?;
    let norm: f64 = x.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Err(SaeError::ZeroReference);
    }
    Ok(100.0 * (squared_error(x, reconstruction) / norm).sqrt())
}

/// PRD over a batch of vectors, pooling the squared errors and norms.
pub fn pooled_prd(x: &[Vec<f64>], reconstruction: &[Vec<f64>]) -> Result<f64> {
    let mut err = 0.0;
    let mut norm = 0.0;
    for (a, b) in x.iter().zip(reconstruction) {
        check_dim(a.len(), b)?;
        err += squared_error(a, b);
        norm += a.iter().map(|v| v * v).sum::<f64>();
    }
    if norm == 0.0 {
        return Err(SaeError::ZeroReference);
    }
    Ok(100.0 * (err / norm).sqrt())
}

/// Input dimension over bottleneck dimension.
pub fn compression_ratio(model: &SaeModel) -> f64 {
    model.input_dim() as f64 / model.code_dim() as f64
}

/// Per-dimension zero-mean, unit-variance scaling fitted on training data.
/// Dimensions with zero variance keep unit scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let first = data
            .first()
            .ok_or_else(|| SaeError::InvalidConfig("no vectors to standardize".into()))?;
        let d = first.len();
        let n = data.len() as f64;
        let mut mean = vec![0.0; d];
        for row in data {
            check_dim(d, row)?;
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in data {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, sd })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

/// Standardizes `data`, trains `model` on it and returns a model that works
/// directly on raw vectors, plus the loss history.
pub fn train_standardized(model: &SaeModel, data: &[Vec<f64>], cfg: &TrainConfig) -> Result<(SaeModel, Vec<f64>)> {
    let std = Standardizer::fit(data)?;
    let scaled: Vec<Vec<f64>> = data.iter().map(|x| std.apply(x)).collect();
    let (trained, history) = train_sae(model, &scaled, cfg)?;
    Ok((trained.absorb_standardization(&std)?, history))
}

/// Encoder sizes from `input` down to `code`: one hidden layer at the
/// geometric mean when it fits strictly between them.
pub fn layer_sizes_for(input: usize, code: usize) -> Vec<usize> {
    let mid = ((input * code) as f64).sqrt().round() as usize;
    if mid > code && mid < input {
        vec![input, mid, code]
    } else {
        vec![input, code]
    }
}
