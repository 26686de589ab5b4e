//! Supervised representation learning for drift detection.
//!
//! A small feed-forward network (sigmoid hidden layers, softmax output) is
//! trained on the labeled reference window with categorical cross-entropy and
//! Adam. The trained network is then *clipped*: the output-side layers are
//! dropped and the input-side stack up to a hidden layer (by default the last
//! one) becomes an embedding function. Drift tests run both on raw features
//! and on these learned embeddings, where class-relevant structure is
//! concentrated.
//!
//! Training is deterministic for a given seed: weight initialization and the
//! per-epoch shuffles all draw from one seeded stream, and no parallelism is
//! involved.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// On-disk model format version accepted by [`TrainedMlp::load`].
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Network shape and optimization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths, input side first.
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![20, 20],
            epochs: 3,
            batch_size: 20,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 42,
        }
    }
}

impl MlpConfig {
    pub fn with_hidden_layers(mut self, hidden_layers: Vec<usize>) -> Self {
        self.hidden_layers = hidden_layers;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Zero epochs are allowed and leave the network at its initialization.
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() {
            return Err(Error::Config("at least one hidden layer is required".into()));
        }
        if self.hidden_layers.iter().any(|&w| w == 0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("beta1 and beta2 must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-feature z-score transform fitted on the training window and reused for
/// every later batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Fits means and population standard deviations; zero-variance features
    /// get a floor so constant columns map to 0 rather than NaN.
    pub fn fit(data: &LabeledDataset) -> Self {
        let means = data.feature_means();
        let stds = data.feature_stds().iter().map(|&s| s.max(1e-12)).collect();
        Self { means, stds }
    }

    pub fn num_features(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(self.means.iter().zip(&self.stds)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }
}

/// One dense layer; weights are row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        let biases = (0..out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        Self { in_dim, out_dim, weights, biases }
    }

    fn zeros_like(&self) -> Self {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            weights: vec![0.0; self.weights.len()],
            biases: vec![0.0; self.biases.len()],
        }
    }

    fn linear(&self, input: &[f64]) -> Vec<f64> {
        let mut out = self.biases.clone();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            out[o] += row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
        out
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.weights.len() != self.in_dim * self.out_dim || self.biases.len() != self.out_dim {
            return Err(Error::ModelFormat(format!(
                "layer {index}: parameter counts do not match declared dimensions"
            )));
        }
        if self.weights.iter().chain(&self.biases).any(|v| !v.is_finite()) {
            return Err(Error::ModelFormat(format!("layer {index}: non-finite parameters")));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Activations of every layer for one standardized input: `out[0]` is the
/// input itself, `out[last]` the softmax probabilities.
fn forward_store(layers: &[Layer], standardized: Vec<f64>) -> Vec<Vec<f64>> {
    let mut activations = Vec::with_capacity(layers.len() + 1);
    activations.push(standardized);
    for (l, layer) in layers.iter().enumerate() {
        let z = layer.linear(activations.last().expect("non-empty"));
        let a = if l + 1 == layers.len() {
            softmax(&z)
        } else {
            z.iter().map(|&v| sigmoid(v)).collect()
        };
        activations.push(a);
    }
    activations
}

/// Adds this sample's cross-entropy gradient (softmax + one-hot label) into
/// the accumulators.
fn backward_accumulate(
    layers: &[Layer],
    activations: &[Vec<f64>],
    label: usize,
    grads: &mut [Layer],
) {
    let output = activations.last().expect("non-empty");
    let mut delta: Vec<f64> = output.clone();
    delta[label] -= 1.0;
    for l in (0..layers.len()).rev() {
        let input = &activations[l];
        let grad = &mut grads[l];
        for o in 0..layers[l].out_dim {
            let row = &mut grad.weights[o * layers[l].in_dim..(o + 1) * layers[l].in_dim];
            for (gw, x) in row.iter_mut().zip(input) {
                *gw += delta[o] * x;
            }
            grad.biases[o] += delta[o];
        }
        if l > 0 {
            let mut prev = vec![0.0; layers[l].in_dim];
            for o in 0..layers[l].out_dim {
                let row = &layers[l].weights[o * layers[l].in_dim..(o + 1) * layers[l].in_dim];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * delta[o];
                }
            }
            // Sigmoid derivative through the hidden activation.
            delta = prev.iter().zip(input).map(|(p, a)| p * a * (1.0 - a)).collect();
        }
    }
}

struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: u64,
}

impl AdamState {
    fn new(layers: &[Layer]) -> Self {
        Self {
            m: layers.iter().map(Layer::zeros_like).collect(),
            v: layers.iter().map(Layer::zeros_like).collect(),
            t: 0,
        }
    }

    fn step(&mut self, layers: &mut [Layer], grads: &[Layer], cfg: &MlpConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for (l, grad) in grads.iter().enumerate() {
            let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
            };
            for i in 0..grad.weights.len() {
                update(
                    &mut layers[l].weights[i],
                    grad.weights[i],
                    &mut self.m[l].weights[i],
                    &mut self.v[l].weights[i],
                );
            }
            for i in 0..grad.biases.len() {
                update(
                    &mut layers[l].biases[i],
                    grad.biases[i],
                    &mut self.m[l].biases[i],
                    &mut self.v[l].biases[i],
                );
            }
        }
    }
}

/// A trained classifier network together with the standardizer fitted on its
/// training window.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMlp {
    config: MlpConfig,
    standardizer: Standardizer,
    layers: Vec<Layer>,
    input_dim: usize,
    num_classes: usize,
    label_names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    input_dim: usize,
    num_classes: usize,
    label_names: Option<Vec<String>>,
    config: MlpConfig,
    standardizer: Standardizer,
    layers: Vec<Layer>,
}

impl TrainedMlp {
    /// Trains on the labeled dataset: mini-batch categorical cross-entropy
    /// with Adam, reshuffling every epoch from the seeded stream.
    pub fn train(data: &LabeledDataset, config: MlpConfig) -> Result<Self> {
        Ok(Self::train_with_history(data, config)?.0)
    }

    /// Like [`train`](Self::train), also returning the mean training loss of
    /// each epoch (averaged over its mini-batches as they were visited).
    pub fn train_with_history(
        data: &LabeledDataset,
        config: MlpConfig,
    ) -> Result<(Self, Vec<f64>)> {
        config.validate()?;
        if data.num_classes() < 2 {
            return Err(Error::InvalidInput(format!(
                "training needs at least 2 classes, dataset has {}",
                data.num_classes()
            )));
        }

        let standardizer = Standardizer::fit(data);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut dims = vec![data.num_features()];
        dims.extend_from_slice(&config.hidden_layers);
        dims.push(data.num_classes());
        let mut layers: Vec<Layer> =
            dims.windows(2).map(|d| Layer::init(d[0], d[1], &mut rng)).collect();

        let mut adam = AdamState::new(&layers);
        let mut indices: Vec<usize> = (0..data.num_rows()).collect();
        let labels = data.labels();
        let mut history = Vec::with_capacity(config.epochs);
        for _ in 0..config.epochs {
            indices.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in indices.chunks(config.batch_size) {
                let mut grads: Vec<Layer> = layers.iter().map(Layer::zeros_like).collect();
                for &i in batch {
                    let activations =
                        forward_store(&layers, standardizer.transform_row(data.row(i)));
                    let probs = activations.last().expect("softmax layer");
                    epoch_loss += -probs[labels[i]].max(1e-300).ln();
                    backward_accumulate(&layers, &activations, labels[i], &mut grads);
                }
                let scale = 1.0 / batch.len() as f64;
                for grad in &mut grads {
                    for g in grad.weights.iter_mut().chain(grad.biases.iter_mut()) {
                        *g *= scale;
                    }
                }
                adam.step(&mut layers, &grads, &config);
            }
            history.push(epoch_loss / data.num_rows() as f64);
        }

        let trained = Self {
            config,
            standardizer,
            layers,
            input_dim: data.num_features(),
            num_classes: data.num_classes(),
            label_names: data.label_names().map(<[String]>::to_vec),
        };
        Ok((trained, history))
    }

    pub(crate) fn from_parts(
        config: MlpConfig,
        standardizer: Standardizer,
        layers: Vec<Layer>,
        input_dim: usize,
        num_classes: usize,
        label_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ModelFormat("model has no layers".into()));
        }
        if standardizer.means.len() != input_dim || standardizer.stds.len() != input_dim {
            return Err(Error::ModelFormat("standardizer does not match input_dim".into()));
        }
        let mut expected_in = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i)?;
            if layer.in_dim != expected_in {
                return Err(Error::ModelFormat(format!(
                    "layer {i}: expects {} inputs, previous layer provides {expected_in}",
                    layer.in_dim
                )));
            }
            expected_in = layer.out_dim;
        }
        if expected_in != num_classes {
            return Err(Error::ModelFormat(format!(
                "output layer provides {expected_in} values for {num_classes} classes"
            )));
        }
        Ok(Self { config, standardizer, layers, input_dim, num_classes, label_names })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn label_names(&self) -> Option<&[String]> {
        self.label_names.as_deref()
    }

    /// Class probabilities for one raw (unstandardized) feature row.
    pub fn forward(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: row.len() });
        }
        let activations = forward_store(&self.layers, self.standardizer.transform_row(row));
        Ok(activations.into_iter().next_back().expect("non-empty"))
    }

    /// Predicted class index (argmax of the class probabilities).
    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        let probs = self.forward(row)?;
        Ok(probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty"))
    }

    /// Predicted class index for every row.
    pub fn predict(&self, data: &LabeledDataset) -> Result<Vec<usize>> {
        (0..data.num_rows()).map(|i| self.predict_row(data.row(i))).collect()
    }

    /// Mean categorical cross-entropy over the dataset.
    pub fn mean_loss(&self, data: &LabeledDataset) -> Result<f64> {
        if data.num_features() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: data.num_features(),
            });
        }
        let labels = data.labels();
        let mut total = 0.0;
        for i in 0..data.num_rows() {
            let probs = self.forward(data.row(i))?;
            total -= probs[labels[i]].max(1e-300).ln();
        }
        Ok(total / data.num_rows() as f64)
    }

    /// Analytic gradient of [`Self::mean_loss`] with respect to every
    /// parameter, flattened in [`Self::param_at`] order.
    pub fn loss_gradients(&self, data: &LabeledDataset) -> Result<Vec<f64>> {
        if data.num_features() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: data.num_features(),
            });
        }
        let labels = data.labels();
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        for i in 0..data.num_rows() {
            let activations =
                forward_store(&self.layers, self.standardizer.transform_row(data.row(i)));
            backward_accumulate(&self.layers, &activations, labels[i], &mut grads);
        }
        let scale = 1.0 / data.num_rows() as f64;
        let mut flat = Vec::with_capacity(self.param_count());
        for grad in &grads {
            flat.extend(grad.weights.iter().map(|g| g * scale));
            flat.extend(grad.biases.iter().map(|g| g * scale));
        }
        Ok(flat)
    }

    /// Total number of parameters (weights and biases across all layers).
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Parameter at a flat index (per layer: weights first, then biases).
    pub fn param_at(&self, mut index: usize) -> f64 {
        for layer in &self.layers {
            if index < layer.weights.len() {
                return layer.weights[index];
            }
            index -= layer.weights.len();
            if index < layer.biases.len() {
                return layer.biases[index];
            }
            index -= layer.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// A copy with one flat-indexed parameter shifted by `delta`; used for
    /// finite-difference checks.
    pub fn perturbed(&self, mut index: usize, delta: f64) -> Self {
        let mut out = self.clone();
        for layer in &mut out.layers {
            if index < layer.weights.len() {
                layer.weights[index] += delta;
                return out;
            }
            index -= layer.weights.len();
            if index < layer.biases.len() {
                layer.biases[index] += delta;
                return out;
            }
            index -= layer.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// Drops the output-side layers, keeping the first `keep_hidden` hidden
    /// layers as the embedding function.
    pub fn clip(&self, keep_hidden: usize) -> Result<ClippedMlp> {
        let hidden = self.num_hidden_layers();
        if keep_hidden == 0 || keep_hidden > hidden {
            return Err(Error::Config(format!(
                "clip depth must lie in 1..={hidden}, got {keep_hidden}"
            )));
        }
        Ok(ClippedMlp {
            standardizer: self.standardizer.clone(),
            layers: self.layers[..keep_hidden].to_vec(),
            input_dim: self.input_dim,
        })
    }

    /// Clips at the last hidden layer, the default embedding depth.
    pub fn clip_last_hidden(&self) -> Result<ClippedMlp> {
        self.clip(self.num_hidden_layers())
    }

    /// Serializes the model (versioned JSON).
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            input_dim: self.input_dim,
            num_classes: self.num_classes,
            label_names: self.label_names.clone(),
            config: self.config.clone(),
            standardizer: self.standardizer.clone(),
            layers: self.layers.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("model serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Loads a model saved by [`Self::save`], validating version and shape.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Self::from_parts(
            file.config,
            file.standardizer,
            file.layers,
            file.input_dim,
            file.num_classes,
            file.label_names,
        )
    }
}

/// The input-side stack of a trained network, used as an embedding function.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedMlp {
    standardizer: Standardizer,
    layers: Vec<Layer>,
    input_dim: usize,
}

impl ClippedMlp {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Width of the embedding (the last kept hidden layer).
    pub fn dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Embedding of one raw feature row: standardize, then sigmoid layers.
    pub fn embed_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: row.len() });
        }
        let mut a = self.standardizer.transform_row(row);
        for layer in &self.layers {
            a = layer.linear(&a).iter().map(|&z| sigmoid(z)).collect();
        }
        Ok(a)
    }

    /// Embeds every row of a dataset.
    pub fn embed(&self, data: &LabeledDataset) -> Result<RepresentationSet> {
        if data.num_features() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: data.num_features(),
            });
        }
        let dim = self.dim();
        let mut values = Vec::with_capacity(data.num_rows() * dim);
        for i in 0..data.num_rows() {
            values.extend(self.embed_row(data.row(i))?);
        }
        Ok(RepresentationSet { values, num_rows: data.num_rows(), dim })
    }
}

/// Embeddings of a dataset: `num_rows` points of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    values: Vec<f64>,
    num_rows: usize,
    dim: usize,
}

impl RepresentationSet {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_rows = rows.len();
        if num_rows == 0 {
            return Err(Error::InvalidInput("representation set needs at least one row".into()));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("representation rows have unequal lengths".into()));
        }
        Ok(Self { values: rows.into_iter().flatten().collect(), num_rows, dim })
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// One embedding dimension across all rows.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.num_rows).map(|i| self.values[i * self.dim + j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::BlobConfig;
    use crate::stats::ks_two_sample;
    use approx::assert_relative_eq;

    fn blobs(seed: u64) -> LabeledDataset {
        BlobConfig { samples_per_class: 80, num_features: 6, seed, ..BlobConfig::default() }
            .generate("train")
            .unwrap()
    }

    fn tiny_config() -> MlpConfig {
        MlpConfig::default().with_hidden_layers(vec![2]).with_epochs(1).with_seed(7)
    }

    fn tiny_dataset() -> LabeledDataset {
        let features = vec![
            vec![0.2, -1.0],
            vec![1.4, 0.3],
            vec![-0.8, 0.9],
            vec![0.5, 0.5],
            vec![-1.2, -0.4],
            vec![0.9, -0.7],
            vec![-0.3, 1.3],
            vec![1.1, 1.0],
        ];
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1];
        LabeledDataset::from_rows("tiny", features, labels).unwrap()
    }

    #[test]
    fn gradient_check_analytic_vs_central_differences() {
        let data = tiny_dataset();
        let mlp = TrainedMlp::train(&data, tiny_config()).unwrap();
        let analytic = mlp.loss_gradients(&data).unwrap();
        assert_eq!(analytic.len(), mlp.param_count());

        let h = 1e-5;
        for (i, &g) in analytic.iter().enumerate() {
            let plus = mlp.perturbed(i, h).mean_loss(&data).unwrap();
            let minus = mlp.perturbed(i, -h).mean_loss(&data).unwrap();
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-10);
            assert!(rel <= 1e-4, "param {i}: analytic {g}, numeric {numeric}, rel {rel}");
        }
    }

    #[test]
    fn training_is_bitwise_deterministic_for_a_seed() {
        let data = blobs(11);
        let a = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        let b = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = TrainedMlp::train(&data, MlpConfig::default().with_seed(43)).unwrap();
        assert_ne!(a.layers[0].weights, c.layers[0].weights);
    }

    #[test]
    fn training_reduces_loss_from_initialization() {
        // Zero epochs leaves the net at its seeded initialization, giving an
        // untrained baseline with identical weights.
        let mut improved = 0;
        for seed in [1, 2, 3] {
            let data = blobs(seed);
            let config = MlpConfig::default().with_seed(seed);
            let initial = TrainedMlp::train(&data, config.clone().with_epochs(0)).unwrap();
            let trained = TrainedMlp::train(&data, config).unwrap();
            if trained.mean_loss(&data).unwrap() < initial.mean_loss(&data).unwrap() {
                improved += 1;
            }
        }
        assert!(improved >= 2, "loss improved on only {improved} of 3 seeds");
    }

    #[test]
    fn loss_history_has_one_entry_per_epoch_and_trends_down() {
        let data = blobs(9);
        let config = MlpConfig::default().with_epochs(12);
        let (model, history) = TrainedMlp::train_with_history(&data, config.clone()).unwrap();
        assert_eq!(history.len(), 12);
        assert!(history.iter().all(|l| l.is_finite() && *l > 0.0));
        assert!(history[11] < history[0], "history {history:?}");
        // The history-returning path trains the identical model.
        let direct = TrainedMlp::train(&data, config).unwrap();
        assert_eq!(model.param_count(), direct.param_count());
        for i in 0..model.param_count() {
            assert_eq!(model.param_at(i), direct.param_at(i));
        }
    }

    #[test]
    fn trained_classifier_beats_chance_comfortably() {
        let data = blobs(5);
        let mlp = TrainedMlp::train(&data, MlpConfig::default().with_epochs(30)).unwrap();
        let predictions = mlp.predict(&data).unwrap();
        let hits = predictions.iter().zip(data.labels()).filter(|(p, l)| p == l).count();
        let accuracy = hits as f64 / data.num_rows() as f64;
        assert!(accuracy > 0.5, "accuracy {accuracy} on well-separated blobs");
    }

    #[test]
    fn zero_weight_network_outputs_uniform_probabilities() {
        let data = tiny_dataset();
        let trained = TrainedMlp::train(&data, tiny_config()).unwrap();
        let zeroed_layers: Vec<Layer> =
            trained.layers.iter().map(Layer::zeros_like).collect();
        let zeroed = TrainedMlp::from_parts(
            tiny_config(),
            trained.standardizer.clone(),
            zeroed_layers,
            2,
            2,
            None,
        )
        .unwrap();
        let probs = zeroed.forward(&[0.3, -0.2]).unwrap();
        for p in probs {
            assert_relative_eq!(p, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_weight_hidden_units_sit_at_sigmoid_midpoint() {
        let data = tiny_dataset();
        let trained = TrainedMlp::train(&data, tiny_config()).unwrap();
        let zeroed_layers: Vec<Layer> =
            trained.layers.iter().map(Layer::zeros_like).collect();
        let zeroed = TrainedMlp::from_parts(
            tiny_config(),
            trained.standardizer.clone(),
            zeroed_layers,
            2,
            2,
            None,
        )
        .unwrap();
        let embedding = zeroed.clip_last_hidden().unwrap().embed_row(&[1.0, 2.0]).unwrap();
        for v in embedding {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_matches_straight_line_reimplementation() {
        let data = tiny_dataset();
        let mlp = TrainedMlp::train(&data, tiny_config()).unwrap();
        let row = [0.7, -0.4];

        // Unrolled recomputation with explicit loops.
        let x = mlp.standardizer.transform_row(&row);
        let mut a = x;
        for (l, layer) in mlp.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim];
            for o in 0..layer.out_dim {
                z[o] = layer.biases[o];
                for i in 0..layer.in_dim {
                    z[o] += layer.weights[o * layer.in_dim + i] * a[i];
                }
            }
            if l + 1 == mlp.layers.len() {
                let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
                let sum: f64 = exps.iter().sum();
                a = exps.iter().map(|e| e / sum).collect();
            } else {
                a = z.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect();
            }
        }

        let expected = a;
        let actual = mlp.forward(&row).unwrap();
        for (e, g) in expected.iter().zip(&actual) {
            assert_relative_eq!(e, g, epsilon = 1e-12);
        }
        let sum: f64 = actual.iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn clip_keeps_the_requested_hidden_stack() {
        let data = blobs(3);
        let mlp = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        assert_eq!(mlp.num_hidden_layers(), 2);
        let first = mlp.clip(1).unwrap();
        assert_eq!(first.dim(), 20);
        assert_eq!(first.num_layers(), 1);
        let last = mlp.clip_last_hidden().unwrap();
        assert_eq!(last.dim(), 20);
        assert_eq!(last.num_layers(), 2);
        assert!(mlp.clip(0).is_err());
        assert!(mlp.clip(3).is_err());
    }

    #[test]
    fn clipped_embedding_matches_hidden_activations_of_full_forward() {
        let data = blobs(4);
        let mlp = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        let clipped = mlp.clip_last_hidden().unwrap();
        let row = data.row(17);
        let activations = forward_store(&mlp.layers, mlp.standardizer.transform_row(row));
        let embedded = clipped.embed_row(row).unwrap();
        for (e, a) in embedded.iter().zip(&activations[2]) {
            assert_relative_eq!(e, a, epsilon = 1e-12);
        }
    }

    #[test]
    fn save_and_load_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let data = blobs(6);
        let mlp = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        mlp.save(&path).unwrap();
        let loaded = TrainedMlp::load(&path).unwrap();
        assert_eq!(mlp, loaded);
        let row = data.row(3);
        assert_eq!(mlp.forward(row).unwrap(), loaded.forward(row).unwrap());
    }

    #[test]
    fn load_rejects_wrong_version_and_broken_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let data = blobs(6);
        let mlp = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        mlp.save(&path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"format_version\": 1", "\"format_version\": 9"))
            .unwrap();
        assert!(matches!(TrainedMlp::load(&path), Err(Error::ModelFormat(_))));

        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(TrainedMlp::load(&path), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn embeddings_separate_shifted_data_on_some_dimension() {
        let data = blobs(8);
        let mlp = TrainedMlp::train(&data, MlpConfig::default()).unwrap();
        let clipped = mlp.clip_last_hidden().unwrap();

        let shift = 3.0 * data.mean_feature_std();
        let shifted_rows: Vec<Vec<f64>> =
            (0..data.num_rows()).map(|i| data.row(i).iter().map(|v| v + shift).collect()).collect();
        let shifted =
            LabeledDataset::from_rows("shifted", shifted_rows, data.labels().to_vec()).unwrap();

        let r0 = clipped.embed(&data).unwrap();
        let r1 = clipped.embed(&shifted).unwrap();
        assert_eq!(r0.dim(), 20);
        let mut max_d: f64 = 0.0;
        for j in 0..r0.dim() {
            let d = ks_two_sample(&r0.column(j), &r1.column(j)).unwrap().statistic;
            max_d = max_d.max(d);
        }
        assert!(max_d > 0.2, "largest embedding-dimension KS distance {max_d}");
    }

    #[test]
    fn standardizer_centers_and_scales_the_training_window() {
        let data = blobs(9);
        let s = Standardizer::fit(&data);
        let transformed: Vec<Vec<f64>> =
            (0..data.num_rows()).map(|i| s.transform_row(data.row(i))).collect();
        for j in 0..data.num_features() {
            let col: Vec<f64> = transformed.iter().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            assert_relative_eq!(mean, 0.0, epsilon = 1e-9);
            assert_relative_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn perturbed_changes_exactly_one_parameter() {
        let data = tiny_dataset();
        let mlp = TrainedMlp::train(&data, tiny_config()).unwrap();
        let idx = mlp.param_count() - 1;
        let shifted = mlp.perturbed(idx, 0.25);
        assert_relative_eq!(shifted.param_at(idx), mlp.param_at(idx) + 0.25, epsilon = 1e-15);
        for i in 0..idx {
            assert_eq!(shifted.param_at(i), mlp.param_at(i));
        }
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let data = tiny_dataset();
        assert!(TrainedMlp::train(&data, MlpConfig::default().with_hidden_layers(vec![])).is_err());
        assert!(TrainedMlp::train(&data, MlpConfig::default().with_batch_size(0)).is_err());
        assert!(
            TrainedMlp::train(&data, MlpConfig::default().with_learning_rate(0.0)).is_err()
        );
    }

    #[test]
    fn representation_set_row_and_column_access() {
        let set = RepresentationSet::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(set.num_rows(), 2);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.row(1), &[3.0, 4.0]);
        assert_eq!(set.column(0), vec![1.0, 3.0]);
        assert!(RepresentationSet::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
