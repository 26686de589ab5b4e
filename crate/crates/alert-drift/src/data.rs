//! Labeled tabular datasets, CSV ingestion, synthetic generation, and drift injection.
//!
//! A [`LabeledDataset`] is an immutable row-major feature matrix plus integer
//! class labels. Drift is injected by additive feature shifts — abrupt (a
//! random subset of rows shifted at once) or gradual (a per-row offset ramp) —
//! and labels are never altered by injection. A [`DatasetSequence`] is one
//! reference dataset followed by consecutive batches with a ground-truth drift
//! flag per batch, either split from a single file or synthesized from a
//! [`SequencePlan`].

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable labeled dataset: row-major features plus one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    features: Vec<f64>,
    num_rows: usize,
    num_features: usize,
    labels: Vec<usize>,
    num_classes: usize,
    /// Original label strings in index order, when loaded from a file.
    label_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Builds a dataset, validating every structural invariant.
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        num_features: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let name = name.into();
        if num_features == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset '{name}': at least one feature column required"
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidInput(format!("dataset '{name}': no rows")));
        }
        if features.len() != labels.len() * num_features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * num_features,
                actual: features.len(),
            });
        }
        if num_classes == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset '{name}': num_classes must be positive"
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidInput(format!(
                "dataset '{name}': label {bad} out of range for {num_classes} classes"
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "dataset '{name}': non-finite feature value at row {}, column {}",
                pos / num_features,
                pos % num_features
            )));
        }
        Ok(Self {
            name,
            num_rows: labels.len(),
            features,
            num_features,
            labels,
            num_classes,
            label_names: None,
        })
    }

    /// Builds a dataset from nested rows; `num_classes` is inferred as
    /// `max(label) + 1`.
    pub fn from_rows(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let name = name.into();
        if rows.is_empty() {
            return Err(Error::InvalidInput(format!("dataset '{name}': no rows")));
        }
        let num_features = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != num_features) {
            return Err(Error::DimensionMismatch { expected: num_features, actual: bad.len() });
        }
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        Self::new(name, rows.into_iter().flatten().collect(), num_features, labels, num_classes)
    }

    /// Attaches the original label strings (index order) as metadata.
    #[must_use]
    pub fn with_label_names(mut self, names: Vec<String>) -> Self {
        self.label_names = Some(names);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> Option<&[String]> {
        self.label_names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    /// Copies out one feature column.
    pub fn feature_column(&self, j: usize) -> Vec<f64> {
        (0..self.num_rows).map(|i| self.row(i)[j]).collect()
    }

    /// Per-column means.
    pub fn feature_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.num_features];
        for i in 0..self.num_rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.num_rows as f64;
        }
        means
    }

    /// Per-column population standard deviations.
    pub fn feature_stds(&self) -> Vec<f64> {
        let means = self.feature_means();
        let mut vars = vec![0.0; self.num_features];
        for i in 0..self.num_rows {
            for ((v, x), m) in vars.iter_mut().zip(self.row(i)).zip(&means) {
                let d = x - m;
                *v += d * d;
            }
        }
        vars.iter().map(|v| (v / self.num_rows as f64).sqrt()).collect()
    }

    /// Mean of the per-column standard deviations — the "reference SD" scale
    /// used when expressing drift magnitudes in units of spread.
    pub fn mean_feature_std(&self) -> f64 {
        let stds = self.feature_stds();
        stds.iter().sum::<f64>() / stds.len() as f64
    }

    /// Returns a copy restricted to the given row indices, in the given order.
    pub fn select_rows(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("row selection is empty".into()));
        }
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.num_rows {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range ({} rows)",
                    self.num_rows
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let mut out = Self::new(name, features, self.num_features, labels, self.num_classes)?;
        out.label_names = self.label_names.clone();
        Ok(out)
    }

    /// Concatenates two datasets with identical schemas.
    pub fn concat(&self, other: &Self, name: impl Into<String>) -> Result<Self> {
        if other.num_features != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                actual: other.num_features,
            });
        }
        if other.num_classes != self.num_classes {
            return Err(Error::DimensionMismatch {
                expected: self.num_classes,
                actual: other.num_classes,
            });
        }
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut out = Self::new(name, features, self.num_features, labels, self.num_classes)?;
        out.label_names = self.label_names.clone();
        Ok(out)
    }

    /// Writes the dataset as CSV with feature headers and a trailing label column.
    pub fn to_csv(&self, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| Error::csv(&display, e.to_string()))?;
        let mut header: Vec<String> = (0..self.num_features).map(|j| format!("f{j:02}")).collect();
        header.push(label_column.to_string());
        writer
            .write_record(&header)
            .map_err(|e| Error::csv(&display, e.to_string()))?;
        for i in 0..self.num_rows {
            let mut record: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            let label = match &self.label_names {
                Some(names) => names[self.labels[i]].clone(),
                None => self.labels[i].to_string(),
            };
            record.push(label);
            writer
                .write_record(&record)
                .map_err(|e| Error::csv(&display, e.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io(&display, e))?;
        Ok(())
    }
}

/// Loads a CSV file with a header row into a [`LabeledDataset`].
///
/// All columns other than `label_column` must be numeric; labels are re-indexed
/// to contiguous integers in order of first appearance and the original strings
/// are kept as metadata. `schema` optionally fixes which feature columns to read
/// and in what order.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    schema: Option<&[String]>,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => {
            Error::io(&display, std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()))
        }
        _ => Error::csv(&display, e.to_string()),
    })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::csv(&display, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::csv(&display, format!("label column '{label_column}' not found")))?;

    let feature_indices: Vec<(usize, String)> = match schema {
        Some(cols) => {
            let mut out = Vec::with_capacity(cols.len());
            for col in cols {
                let idx = headers.iter().position(|h| h == col).ok_or_else(|| {
                    Error::csv(&display, format!("schema column '{col}' not found"))
                })?;
                if idx == label_idx {
                    return Err(Error::csv(
                        &display,
                        format!("schema column '{col}' is the label column"),
                    ));
                }
                out.push((idx, col.clone()));
            }
            out
        }
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(i, h)| (i, h.clone()))
            .collect(),
    };
    if feature_indices.is_empty() {
        return Err(Error::csv(&display, "no feature columns".to_string()));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    for (row_num, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(&display, e.to_string()))?;
        for (idx, col_name) in &feature_indices {
            let cell = record.get(*idx).unwrap_or("").trim();
            let value: f64 = cell.parse().map_err(|_| {
                Error::csv(
                    &display,
                    format!("row {}, column {col_name}: non-numeric cell '{cell}'", row_num + 1),
                )
            })?;
            if !value.is_finite() {
                return Err(Error::csv(
                    &display,
                    format!("row {}, column {col_name}: non-finite cell '{cell}'", row_num + 1),
                ));
            }
            features.push(value);
        }
        let raw_label = record.get(label_idx).unwrap_or("").trim().to_string();
        let label = match label_names.iter().position(|l| *l == raw_label) {
            Some(i) => i,
            None => {
                label_names.push(raw_label);
                label_names.len() - 1
            }
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::csv(&display, "file has a header but no data rows".to_string()));
    }

    let num_classes = label_names.len();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".to_string());
    Ok(
        LabeledDataset::new(stem, features, feature_indices.len(), labels, num_classes)?
            .with_label_names(label_names),
    )
}

/// How a batch drifts relative to the reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    /// Identity: the batch is returned unchanged.
    None,
    /// A random subset of rows gets `magnitude` added to every targeted feature.
    Abrupt,
    /// Per-row offsets ramp linearly from 0 up to `magnitude`, then stay constant.
    Gradual,
    /// Values of each targeted feature are permuted among a random subset of
    /// rows. Every per-feature marginal is preserved exactly; only the joint
    /// structure (feature-feature and feature-label association) breaks.
    /// `magnitude` is ignored.
    Shuffle,
}

/// A drift injection recipe. Deterministic given `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftScenario {
    pub kind: DriftKind,
    pub magnitude: f64,
    /// For `Abrupt` and `Shuffle`: the fraction of rows touched. For
    /// `Gradual`: the fraction of the batch over which the ramp rises before
    /// plateauing.
    pub fraction_drifted: f64,
    pub seed: u64,
}

impl DriftScenario {
    pub fn none() -> Self {
        Self { kind: DriftKind::None, magnitude: 0.0, fraction_drifted: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction_drifted) {
            return Err(Error::Config(format!(
                "fraction_drifted must lie in [0, 1], got {}",
                self.fraction_drifted
            )));
        }
        if !self.magnitude.is_finite() {
            return Err(Error::Config("drift magnitude must be finite".into()));
        }
        Ok(())
    }
}

/// Injects drift into every feature column. Labels and row count are untouched.
pub fn inject_drift(batch: &LabeledDataset, scenario: &DriftScenario) -> Result<LabeledDataset> {
    inject_drift_features(batch, scenario, None)
}

/// Like [`inject_drift`] but restricted to the given feature columns
/// (`None` = all columns). Used by sequence synthesis to model drifts that
/// touch only some sensors.
pub fn inject_drift_features(
    batch: &LabeledDataset,
    scenario: &DriftScenario,
    features: Option<&[usize]>,
) -> Result<LabeledDataset> {
    scenario.validate()?;
    if let Some(cols) = features {
        if let Some(&bad) = cols.iter().find(|&&c| c >= batch.num_features) {
            return Err(Error::InvalidInput(format!(
                "drift feature column {bad} out of range ({} features)",
                batch.num_features
            )));
        }
    }
    let mut out = batch.clone();
    let n = batch.num_rows;
    let targeted = |j: usize| features.map_or(true, |cols| cols.contains(&j));

    match scenario.kind {
        DriftKind::None => {}
        DriftKind::Abrupt => {
            let count = ((scenario.fraction_drifted * n as f64).round() as usize).min(n);
            let mut indices: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            indices.shuffle(&mut rng);
            for &i in indices.iter().take(count) {
                for j in 0..batch.num_features {
                    if targeted(j) {
                        out.features[i * batch.num_features + j] += scenario.magnitude;
                    }
                }
            }
        }
        DriftKind::Gradual => {
            // Ramp endpoint at row index fraction*n; zero fraction degenerates
            // to a constant shift of the whole batch.
            let ramp_end = scenario.fraction_drifted * n as f64;
            for i in 0..n {
                let t = if ramp_end <= 0.0 { 1.0 } else { (i as f64 / ramp_end).min(1.0) };
                let offset = scenario.magnitude * t;
                for j in 0..batch.num_features {
                    if targeted(j) {
                        out.features[i * batch.num_features + j] += offset;
                    }
                }
            }
        }
        DriftKind::Shuffle => {
            let count = ((scenario.fraction_drifted * n as f64).round() as usize).min(n);
            let mut indices: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            indices.shuffle(&mut rng);
            let touched = &indices[..count];
            for j in 0..batch.num_features {
                if !targeted(j) {
                    continue;
                }
                // Independent permutation per column: each touched row ends up
                // with a mix of other touched rows' values.
                let mut order = touched.to_vec();
                order.shuffle(&mut rng);
                let values: Vec<f64> =
                    order.iter().map(|&i| batch.features[i * batch.num_features + j]).collect();
                for (&i, v) in touched.iter().zip(values) {
                    out.features[i * batch.num_features + j] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Mean per-row offset a gradual scenario injects into each targeted feature.
/// Exposed so callers can reason about expected mean shifts exactly.
pub fn gradual_mean_offset(n: usize, magnitude: f64, fraction: f64) -> f64 {
    let ramp_end = fraction * n as f64;
    let total: f64 = (0..n)
        .map(|i| {
            let t = if ramp_end <= 0.0 { 1.0 } else { (i as f64 / ramp_end).min(1.0) };
            magnitude * t
        })
        .sum();
    total / n as f64
}

/// A reference dataset followed by consecutive batches with ground-truth drift flags.
#[derive(Debug, Clone)]
pub struct DatasetSequence {
    pub name: String,
    pub reference: LabeledDataset,
    pub batches: Vec<LabeledDataset>,
    /// `drift_truth[i]` says whether `batches[i]` drifted relative to the reference.
    pub drift_truth: Vec<bool>,
}

impl DatasetSequence {
    pub fn validate(&self) -> Result<()> {
        if self.batches.is_empty() {
            return Err(Error::InvalidInput("sequence has no batches".into()));
        }
        if self.drift_truth.len() != self.batches.len() {
            return Err(Error::DimensionMismatch {
                expected: self.batches.len(),
                actual: self.drift_truth.len(),
            });
        }
        for b in &self.batches {
            if b.num_features() != self.reference.num_features() {
                return Err(Error::DimensionMismatch {
                    expected: self.reference.num_features(),
                    actual: b.num_features(),
                });
            }
            if b.num_classes() != self.reference.num_classes() {
                return Err(Error::DimensionMismatch {
                    expected: self.reference.num_classes(),
                    actual: b.num_classes(),
                });
            }
        }
        Ok(())
    }

    /// Writes the sequence as a directory of CSV files plus a drift-truth table.
    pub fn save_dir(&self, dir: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        self.reference.to_csv(dir.join("d0.csv"), label_column)?;
        for (i, batch) in self.batches.iter().enumerate() {
            batch.to_csv(dir.join(format!("d{:02}.csv", i + 1)), label_column)?;
        }
        let truth_path = dir.join("drift_truth.csv");
        let display = truth_path.display().to_string();
        let mut writer =
            csv::Writer::from_path(&truth_path).map_err(|e| Error::csv(&display, e.to_string()))?;
        writer
            .write_record(["batch", "drifted"])
            .map_err(|e| Error::csv(&display, e.to_string()))?;
        for (i, drifted) in self.drift_truth.iter().enumerate() {
            writer
                .write_record([format!("{}", i + 1), drifted.to_string()])
                .map_err(|e| Error::csv(&display, e.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io(&display, e))?;
        Ok(())
    }

    /// Loads a directory produced by [`DatasetSequence::save_dir`].
    pub fn load_dir(dir: impl AsRef<Path>, label_column: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let truth_path = dir.join("drift_truth.csv");
        let display = truth_path.display().to_string();
        let mut reader = csv::Reader::from_path(&truth_path)
            .map_err(|e| Error::csv(&display, e.to_string()))?;
        let mut drift_truth = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::csv(&display, e.to_string()))?;
            let flag = record.get(1).unwrap_or("").trim();
            drift_truth.push(flag.parse::<bool>().map_err(|_| {
                Error::csv(&display, format!("bad drifted flag '{flag}'"))
            })?);
        }
        let reference = load_csv(dir.join("d0.csv"), label_column, None)?;
        let schema: Vec<String> = (0..reference.num_features()).map(|j| format!("f{j:02}")).collect();
        let mut batches = Vec::with_capacity(drift_truth.len());
        for i in 0..drift_truth.len() {
            batches.push(load_csv(
                dir.join(format!("d{:02}.csv", i + 1)),
                label_column,
                Some(&schema),
            )?);
        }
        let seq = Self {
            name: dir
                .file_name()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "sequence".to_string()),
            reference,
            batches,
            drift_truth,
        };
        seq.validate()?;
        Ok(seq)
    }
}

/// Splits one dataset into a reference plus `num_batches - 1` equal-sized
/// (±1 row) batches after a seeded shuffle. All truth flags are false: a split
/// of one dataset contains no injected drift.
pub fn split_sequence(
    data: &LabeledDataset,
    num_batches: usize,
    shuffle_seed: u64,
) -> Result<DatasetSequence> {
    if num_batches < 2 {
        return Err(Error::Config(format!(
            "num_batches must be at least 2, got {num_batches}"
        )));
    }
    if data.num_rows() < num_batches {
        return Err(Error::InvalidInput(format!(
            "cannot split {} rows into {num_batches} batches",
            data.num_rows()
        )));
    }
    let mut indices: Vec<usize> = (0..data.num_rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    indices.shuffle(&mut rng);

    let n = data.num_rows();
    let base = n / num_batches;
    let extra = n % num_batches;
    let mut parts = Vec::with_capacity(num_batches);
    let mut cursor = 0;
    for b in 0..num_batches {
        let size = base + usize::from(b < extra);
        parts.push(&indices[cursor..cursor + size]);
        cursor += size;
    }

    let reference = data.select_rows(parts[0], format!("{}-d0", data.name()))?;
    let mut batches = Vec::with_capacity(num_batches - 1);
    for (i, part) in parts.iter().enumerate().skip(1) {
        batches.push(data.select_rows(part, format!("{}-d{:02}", data.name(), i))?);
    }
    let drift_truth = vec![false; batches.len()];
    Ok(DatasetSequence { name: data.name().to_string(), reference, batches, drift_truth })
}

/// Parameters for a synthetic Gaussian-blob classification dataset.
///
/// Class centers are drawn once from the seed; samples add isotropic noise.
/// `quantize_step` rounds readings onto a grid (e.g. 1.0 for integer
/// RSS-style measurements), which is how the source testbeds record data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlobConfig {
    pub num_classes: usize,
    pub samples_per_class: usize,
    pub num_features: usize,
    /// Location the class centers scatter around (e.g. -90.0 for dBm-like data).
    pub center_loc: f64,
    /// Standard deviation of the center scatter: larger = more separable classes.
    pub center_spread: f64,
    /// Within-class noise standard deviation.
    pub noise_std: f64,
    pub quantize_step: Option<f64>,
    /// The last `heavy_tail_features` columns use Student-t noise instead of
    /// Gaussian, modeling flaky sensors with occasional extreme readings.
    #[serde(default)]
    pub heavy_tail_features: usize,
    /// Degrees of freedom for the heavy-tailed columns (smaller = wilder).
    #[serde(default = "default_heavy_tail_df")]
    pub heavy_tail_df: f64,
    pub seed: u64,
}

fn default_heavy_tail_df() -> f64 {
    2.0
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            num_classes: 5,
            samples_per_class: 200,
            num_features: 8,
            center_loc: -90.0,
            center_spread: 3.0,
            noise_std: 2.0,
            quantize_step: None,
            heavy_tail_features: 0,
            heavy_tail_df: default_heavy_tail_df(),
            seed: 42,
        }
    }
}

impl BlobConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Config("blob generator needs at least 2 classes".into()));
        }
        if self.samples_per_class == 0 || self.num_features == 0 {
            return Err(Error::Config("blob generator needs positive sizes".into()));
        }
        if !(self.noise_std > 0.0) || !(self.center_spread >= 0.0) {
            return Err(Error::Config("blob generator needs positive noise_std".into()));
        }
        if let Some(step) = self.quantize_step {
            if !(step > 0.0) {
                return Err(Error::Config("quantize_step must be positive".into()));
            }
        }
        if self.heavy_tail_features > self.num_features {
            return Err(Error::Config(format!(
                "heavy_tail_features {} exceeds num_features {}",
                self.heavy_tail_features, self.num_features
            )));
        }
        if self.heavy_tail_features > 0 && !(self.heavy_tail_df > 1.0) {
            return Err(Error::Config("heavy_tail_df must exceed 1".into()));
        }
        Ok(())
    }

    fn draw_centers(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..self.num_classes)
            .map(|_| {
                (0..self.num_features)
                    .map(|_| {
                        self.center_loc + self.center_spread * rng.sample::<f64, _>(StandardNormal)
                    })
                    .collect()
            })
            .collect()
    }

    /// Generates one balanced dataset of `num_classes * samples_per_class` rows.
    pub fn generate(&self, name: impl Into<String>) -> Result<LabeledDataset> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let centers = self.draw_centers(&mut rng);
        sample_blobs(name, self, &centers, self.num_classes * self.samples_per_class, &mut rng)
    }
}

/// Draws `rows` samples (classes balanced, row order shuffled) around fixed centers.
fn sample_blobs(
    name: impl Into<String>,
    config: &BlobConfig,
    centers: &[Vec<f64>],
    rows: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LabeledDataset> {
    let num_classes = centers.len();
    let num_features = centers[0].len();
    let first_heavy = num_features - config.heavy_tail_features;
    let mut labels: Vec<usize> = (0..rows).map(|i| i % num_classes).collect();
    labels.shuffle(rng);
    let mut features = Vec::with_capacity(rows * num_features);
    for &label in &labels {
        for (j, &c) in centers[label].iter().enumerate() {
            let noise: f64 = if j >= first_heavy {
                rng.sample(StudentT::new(config.heavy_tail_df).expect("validated df"))
            } else {
                rng.sample(StandardNormal)
            };
            let mut v = c + config.noise_std * noise;
            if let Some(step) = config.quantize_step {
                v = (v / step).round() * step;
            }
            features.push(v);
        }
    }
    LabeledDataset::new(name, features, num_features, labels, num_classes)
}

/// One planned drifted batch inside a [`SequencePlan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlannedDrift {
    /// 1-based batch number (batch 1 is the first batch after the reference).
    pub batch: usize,
    pub scenario: DriftScenario,
    /// Restrict the shift to these feature columns; `None` = all columns.
    pub features: Option<Vec<usize>>,
}

/// Recipe for a synthetic sequence: a reference batch plus `num_batches`
/// same-distribution batches, some of which get drift injected afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequencePlan {
    pub name: String,
    pub num_batches: usize,
    pub rows_per_batch: usize,
    pub blobs: BlobConfig,
    pub drifts: Vec<PlannedDrift>,
    pub seed: u64,
}

impl SequencePlan {
    /// Uniform plan: every `every`-th batch drifted with the same scenario.
    pub fn every_nth(
        name: impl Into<String>,
        num_batches: usize,
        rows_per_batch: usize,
        blobs: BlobConfig,
        every: usize,
        scenario: DriftScenario,
        seed: u64,
    ) -> Result<Self> {
        if every == 0 {
            return Err(Error::Config("drift period must be positive".into()));
        }
        let drifts = (1..=num_batches)
            .filter(|b| b % every == 0)
            .enumerate()
            .map(|(i, batch)| PlannedDrift {
                batch,
                scenario: DriftScenario { seed: scenario.seed.wrapping_add(i as u64), ..scenario },
                features: None,
            })
            .collect();
        Ok(Self { name: name.into(), num_batches, rows_per_batch, blobs, drifts, seed })
    }

    pub fn validate(&self) -> Result<()> {
        self.blobs.validate()?;
        if self.num_batches == 0 {
            return Err(Error::Config("sequence needs at least one batch".into()));
        }
        if self.rows_per_batch < self.blobs.num_classes {
            return Err(Error::Config(format!(
                "rows_per_batch {} cannot cover {} classes",
                self.rows_per_batch, self.blobs.num_classes
            )));
        }
        for d in &self.drifts {
            d.scenario.validate()?;
            if d.batch == 0 || d.batch > self.num_batches {
                return Err(Error::Config(format!(
                    "planned drift targets batch {} outside 1..={}",
                    d.batch, self.num_batches
                )));
            }
        }
        Ok(())
    }

    /// Synthesizes the sequence. All randomness flows from `seed` (batch draws)
    /// and each scenario's own seed (row subsets), so equal plans give equal
    /// sequences.
    pub fn synthesize(&self) -> Result<DatasetSequence> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let centers = self.blobs.draw_centers(&mut rng);

        let reference = sample_blobs(
            format!("{}-d0", self.name),
            &self.blobs,
            &centers,
            self.rows_per_batch,
            &mut rng,
        )?;

        let mut batches = Vec::with_capacity(self.num_batches);
        let mut drift_truth = vec![false; self.num_batches];
        for b in 1..=self.num_batches {
            let clean = sample_blobs(
                format!("{}-d{:02}", self.name, b),
                &self.blobs,
                &centers,
                self.rows_per_batch,
                &mut rng,
            )?;
            let batch = match self.drifts.iter().find(|d| d.batch == b) {
                Some(planned) => {
                    drift_truth[b - 1] = planned.scenario.kind != DriftKind::None;
                    inject_drift_features(&clean, &planned.scenario, planned.features.as_deref())?
                }
                None => clean,
            };
            batches.push(batch);
        }
        Ok(DatasetSequence {
            name: self.name.clone(),
            reference,
            batches,
            drift_truth,
        })
    }
}
