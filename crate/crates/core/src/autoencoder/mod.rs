//! Dense autoencoder with PReLU hidden layers, a sigmoid output and
//! binary cross-entropy loss, trained with Adadelta.
//!
//! Weights are stored row-major as `fan_out x fan_in`. The flattened
//! parameter order used by [`Autoencoder::flat_params`] and
//! [`Gradients::flatten`] is, layer by layer: weights, biases, PReLU slopes.

pub mod adadelta;

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adadelta::{AdadeltaConfig, AdadeltaState};

use crate::error::{Error, Result};

pub const PRELU_INIT_SLOPE: f64 = 0.25;
/// Reconstructions are clamped to `[CLAMP_EPS, 1 - CLAMP_EPS]` inside the loss.
pub const CLAMP_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Prelu,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    HeNormal,
    HeUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    pub activation: Activation,
    pub dropout_p: f64,
    pub init: Init,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.fan_in == 0 || self.fan_out == 0 {
            return Err(Error::Config(format!(
                "layer {}x{} has an empty side",
                self.fan_in, self.fan_out
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout_p)));
        }
        Ok(())
    }
}

/// Training hyperparameters. The layer stack is derived from the input
/// dimension: one PReLU/He-normal layer per entry of `hidden`, then a
/// sigmoid/He-uniform reconstruction layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    pub hidden: Vec<usize>,
    /// Dropout per hidden layer; missing entries mean no dropout.
    pub dropout: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdadeltaConfig,
    pub rng_seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            hidden: vec![60, 20, 60],
            dropout: vec![0.2, 0.2],
            epochs: 100,
            batch_size: 32,
            optimizer: AdadeltaConfig::default(),
            rng_seed: 0,
        }
    }
}

impl AutoencoderConfig {
    pub fn layer_specs(&self, n_inputs: usize) -> Vec<LayerSpec> {
        let mut specs = Vec::with_capacity(self.hidden.len() + 1);
        let mut fan_in = n_inputs;
        for (i, &h) in self.hidden.iter().enumerate() {
            specs.push(LayerSpec {
                fan_in,
                fan_out: h,
                activation: Activation::Prelu,
                dropout_p: self.dropout.get(i).copied().unwrap_or(0.0),
                init: Init::HeNormal,
            });
            fan_in = h;
        }
        specs.push(LayerSpec {
            fan_in,
            fan_out: n_inputs,
            activation: Activation::Sigmoid,
            dropout_p: 0.0,
            init: Init::HeUniform,
        });
        specs
    }

    /// Index of the narrowest hidden layer (the first one on ties).
    pub fn code_layer(&self) -> usize {
        self.hidden
            .iter()
            .enumerate()
            .fold(0, |b, (i, &h)| if h < self.hidden[b] { i } else { b })
    }

    pub fn code_dim(&self) -> usize {
        self.hidden.get(self.code_layer()).copied().unwrap_or(0)
    }

    pub fn validate(&self, n_inputs: usize) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::Config("autoencoder needs at least one hidden layer".into()));
        }
        if self.dropout.len() > self.hidden.len() {
            return Err(Error::Config("more dropout rates than hidden layers".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        self.optimizer.validate()?;
        self.layer_specs(n_inputs).iter().try_for_each(LayerSpec::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// One learnable negative-side slope per unit; empty for sigmoid layers.
    pub slopes: Vec<f64>,
}

impl Layer {
    pub fn zeros(spec: LayerSpec) -> Self {
        Self {
            weights: vec![0.0; spec.fan_in * spec.fan_out],
            bias: vec![0.0; spec.fan_out],
            slopes: match spec.activation {
                Activation::Prelu => vec![PRELU_INIT_SLOPE; spec.fan_out],
                Activation::Sigmoid => Vec::new(),
            },
            spec,
        }
    }

    fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len() + self.slopes.len()
    }

    fn affine(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.spec.fan_in)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    fn activate(&self, z: &[f64]) -> Vec<f64> {
        match self.spec.activation {
            Activation::Prelu => z
                .iter()
                .zip(&self.slopes)
                .map(|(&z, &a)| if z > 0.0 { z } else { a * z })
                .collect(),
            Activation::Sigmoid => z.iter().map(|&z| sigmoid(z)).collect(),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// He-initialized layer: normal with sd `sqrt(2/fan_in)` or uniform on
/// `±sqrt(6/fan_in)`; zero biases and PReLU slopes at 0.25.
pub fn he_init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Layer {
    let mut layer = Layer::zeros(spec);
    let fan_in = spec.fan_in as f64;
    match spec.init {
        Init::HeNormal => {
            let d = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("finite sd");
            layer.weights.iter_mut().for_each(|w| *w = d.sample(rng));
        }
        Init::HeUniform => {
            let limit = (6.0 / fan_in).sqrt();
            let d = Uniform::new_inclusive(-limit, limit);
            layer.weights.iter_mut().for_each(|w| *w = d.sample(rng));
        }
    }
    layer
}

/// Mean over components of the elementwise binary cross-entropy (nats).
pub fn bce_loss(x: &[f64], x_hat: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(x_hat)
        .map(|(&t, &p)| {
            let p = p.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    sum / x.len() as f64
}

static GENERATION: AtomicU64 = AtomicU64::new(1);

fn fresh_generation() -> u64 {
    GENERATION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Intermediate values of one forward pass, tied to the parameter state
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    generation: u64,
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
    /// Bottleneck activations.
    pub code: Vec<f64>,
    /// Reconstruction.
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    fn zeros_like(model: &Autoencoder) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGradients {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                    slopes: vec![0.0; l.slopes.len()],
                })
                .collect(),
        }
    }

    fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in [
                (&mut a.weights, &b.weights),
                (&mut a.bias, &b.bias),
                (&mut a.slopes, &b.slopes),
            ] {
                x.iter_mut().zip(y).for_each(|(x, y)| *x += scale * y);
            }
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).chain(&l.slopes).copied())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Autoencoder {
    pub layers: Vec<Layer>,
    pub code_layer: usize,
    #[serde(skip, default = "fresh_generation")]
    generation: u64,
}

impl PartialEq for Autoencoder {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.code_layer == other.code_layer
    }
}

impl Autoencoder {
    pub fn from_layers(layers: Vec<Layer>, code_layer: usize) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::Config("autoencoder has no layers".into()));
        };
        if last.spec.activation != Activation::Sigmoid || last.spec.fan_out != layers[0].spec.fan_in {
            return Err(Error::Config(
                "last layer must be a sigmoid reconstruction of the input".into(),
            ));
        }
        if code_layer + 1 >= layers.len() {
            return Err(Error::Config(format!("code layer {code_layer} is not a hidden layer")));
        }
        for (i, l) in layers.iter().enumerate() {
            l.spec.validate()?;
            let slopes = if l.spec.activation == Activation::Prelu {
                l.spec.fan_out
            } else {
                0
            };
            if l.weights.len() != l.spec.fan_in * l.spec.fan_out
                || l.bias.len() != l.spec.fan_out
                || l.slopes.len() != slopes
            {
                return Err(Error::Config(format!("layer {i} parameters do not match its shape")));
            }
            if i > 0 && layers[i - 1].spec.fan_out != l.spec.fan_in {
                return Err(Error::Config(format!("layer {i} does not chain with layer {}", i - 1)));
            }
        }
        Ok(Self {
            layers,
            code_layer,
            generation: fresh_generation(),
        })
    }

    /// Freshly initialized network for `n_inputs`-dimensional data.
    pub fn init<R: Rng + ?Sized>(cfg: &AutoencoderConfig, n_inputs: usize, rng: &mut R) -> Result<Self> {
        cfg.validate(n_inputs)?;
        let layers = cfg.layer_specs(n_inputs).into_iter().map(|s| he_init(s, rng)).collect();
        Self::from_layers(layers, cfg.code_layer())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.fan_in
    }

    pub fn code_dim(&self) -> usize {
        self.layers[self.code_layer].spec.fan_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).chain(&l.slopes).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        let mut rest = params;
        for l in &mut self.layers {
            for block in [&mut l.weights, &mut l.bias, &mut l.slopes] {
                let (head, tail) = rest.split_at(block.len());
                block.copy_from_slice(head);
                rest = tail;
            }
        }
        self.generation = fresh_generation();
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).chain(&l.slopes).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Inverted-dropout masks for one training sample: 0 for dropped units,
    /// `1/(1-p)` for kept ones.
    fn draw_masks<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Option<Vec<f64>>> {
        self.layers
            .iter()
            .map(|l| {
                let p = l.spec.dropout_p;
                (p > 0.0).then(|| {
                    let keep = 1.0 / (1.0 - p);
                    (0..l.spec.fan_out)
                        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
                        .collect()
                })
            })
            .collect()
    }

    pub fn forward<R: Rng + ?Sized>(&self, x: &[f64], mode: Mode, rng: &mut R) -> Result<ForwardCache> {
        let masks = match mode {
            Mode::Train => self.draw_masks(rng),
            Mode::Eval => vec![None; self.layers.len()],
        };
        self.forward_with_masks(x, masks)
    }

    pub fn forward_eval(&self, x: &[f64]) -> Result<ForwardCache> {
        self.forward_with_masks(x, vec![None; self.layers.len()])
    }

    /// Forward pass with explicit dropout masks (`None` = no dropout).
    pub fn forward_with_masks(&self, x: &[f64], masks: Vec<Option<Vec<f64>>>) -> Result<ForwardCache> {
        self.check_input(x)?;
        if masks.len() != self.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layers.len(),
                got: masks.len(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        let mut code = Vec::new();
        for (i, (layer, mask)) in self.layers.iter().zip(&masks).enumerate() {
            let z = layer.affine(&current);
            let mut a = layer.activate(&z);
            if let Some(m) = mask {
                if m.len() != a.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.len(),
                        got: m.len(),
                    });
                }
                a.iter_mut().zip(m).for_each(|(a, m)| *a *= m);
            }
            if i == self.code_layer {
                code = a.clone();
            }
            inputs.push(std::mem::replace(&mut current, a));
            pre.push(z);
        }
        Ok(ForwardCache {
            generation: self.generation,
            inputs,
            pre_activations: pre,
            masks,
            code,
            output: current,
        })
    }

    /// Gradient of `bce_loss(x, output)` for the sample that produced
    /// `cache`, honoring its dropout masks. Clamped outputs have zero
    /// gradient.
    pub fn backward(&self, cache: &ForwardCache, x: &[f64]) -> Result<Gradients> {
        if cache.generation != self.generation {
            return Err(Error::StaleCache);
        }
        self.check_input(x)?;
        let n = x.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        // sigmoid + cross-entropy collapse to (x' - x) / n at the output
        let mut g_z: Vec<f64> = cache
            .output
            .iter()
            .zip(x)
            .map(|(&p, &t)| {
                if (CLAMP_EPS..=1.0 - CLAMP_EPS).contains(&p) {
                    (p - t) / n
                } else {
                    0.0
                }
            })
            .collect();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &cache.inputs[l];
            let g = &mut grads.layers[l];
            for (i, &gz) in g_z.iter().enumerate() {
                g.bias[i] = gz;
                if gz != 0.0 {
                    g.weights[i * layer.spec.fan_in..(i + 1) * layer.spec.fan_in]
                        .iter_mut()
                        .zip(input)
                        .for_each(|(gw, &xin)| *gw = gz * xin);
                }
            }
            if l == 0 {
                break;
            }
            let mut g_in = vec![0.0; layer.spec.fan_in];
            for (row, &gz) in layer.weights.chunks_exact(layer.spec.fan_in).zip(&g_z) {
                if gz != 0.0 {
                    g_in.iter_mut().zip(row).for_each(|(gi, &w)| *gi += w * gz);
                }
            }
            let below = &self.layers[l - 1];
            if let Some(m) = &cache.masks[l - 1] {
                g_in.iter_mut().zip(m).for_each(|(g, m)| *g *= m);
            }
            let z = &cache.pre_activations[l - 1];
            g_z = match below.spec.activation {
                Activation::Prelu => {
                    let gs = &mut grads.layers[l - 1].slopes;
                    g_in.iter()
                        .zip(z)
                        .zip(&below.slopes)
                        .enumerate()
                        .map(|(j, ((&ga, &z), &a))| {
                            if z > 0.0 {
                                ga
                            } else {
                                gs[j] = ga * z;
                                ga * a
                            }
                        })
                        .collect()
                }
                Activation::Sigmoid => g_in
                    .iter()
                    .zip(z)
                    .map(|(&ga, &z)| {
                        let s = sigmoid(z);
                        ga * s * (1.0 - s)
                    })
                    .collect(),
            };
        }
        Ok(grads)
    }

    /// Eval-mode pass through the encoder only.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        for layer in &self.layers[..=self.code_layer] {
            current = layer.activate(&layer.affine(&current));
        }
        Ok(current)
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_eval(x)?.output)
    }

    fn apply_update(&mut self, state: &mut AdadeltaState, grads: &Gradients) {
        let mut offset = 0;
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (p, g) in [
                (&mut l.weights, &g.weights),
                (&mut l.bias, &g.bias),
                (&mut l.slopes, &g.slopes),
            ] {
                state.step_at(offset, p, g);
                offset += p.len();
            }
        }
        self.generation = fresh_generation();
    }
}

pub const MODEL_FORMAT: &str = "genreforge-autoencoder";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedAutoencoder {
    pub format: String,
    pub version: u32,
    pub config: AutoencoderConfig,
    pub model: Autoencoder,
    /// Mean training loss per epoch, computed on the dropout-perturbed passes.
    pub loss_history: Vec<f64>,
}

impl TrainedAutoencoder {
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.encode(x)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::format("<autoencoder>", e))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::format(
                "<autoencoder>",
                format!("unsupported model format {} v{}", m.format, m.version),
            ));
        }
        let model = Autoencoder::from_layers(m.model.layers, m.model.code_layer)?;
        Ok(Self { model, ..m })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Format { reason, .. } => Error::format(path, reason),
            other => other,
        })
    }
}

/// Number of minibatches per epoch.
pub fn batches_per_epoch(n_samples: usize, batch_size: usize) -> usize {
    n_samples.div_ceil(batch_size)
}

/// Trains on vectors scaled to `[0, 1]`. Samples are reshuffled every epoch;
/// per-sample gradients within a minibatch are computed in parallel and
/// averaged in sample order, so results depend only on the seed.
pub fn train(data: &[Vec<f64>], cfg: &AutoencoderConfig) -> Result<TrainedAutoencoder> {
    let Some(first) = data.first() else {
        return Err(Error::TooFewSamples("no training vectors".into()));
    };
    let n_inputs = first.len();
    for (i, row) in data.iter().enumerate() {
        if row.len() != n_inputs {
            return Err(Error::DimensionMismatch {
                expected: n_inputs,
                got: row.len(),
            });
        }
        if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InputOutOfRange(format!("sample {i} has value {v}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut model = Autoencoder::init(cfg, n_inputs, &mut rng)?;
    let mut state = AdadeltaState::new(cfg.optimizer, model.n_params());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let masks: Vec<_> = batch.iter().map(|_| model.draw_masks(&mut rng)).collect();
            let per_sample: Vec<(f64, Gradients)> = batch
                .par_iter()
                .zip(masks)
                .map(|(&i, m)| {
                    let cache = model.forward_with_masks(&data[i], m)?;
                    let g = model.backward(&cache, &data[i])?;
                    Ok((bce_loss(&data[i], &cache.output), g))
                })
                .collect::<Result<_>>()?;
            let mut total = Gradients::zeros_like(&model);
            let scale = 1.0 / batch.len() as f64;
            for (loss, g) in &per_sample {
                epoch_loss += loss;
                total.add_scaled(g, scale);
            }
            model.apply_update(&mut state, &total);
        }
        history.push(epoch_loss / data.len() as f64);
    }
    if !model.all_finite() {
        return Err(Error::Invariant("autoencoder parameters diverged".into()));
    }
    Ok(TrainedAutoencoder {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: cfg.clone(),
        model,
        loss_history: history,
    })
}
