//! Benchmark harness comparing drift detectors on synthetic batch sequences.
//!
//! A sequence is a labeled reference window plus a stream of batches, some of
//! which drifted. Every detector makes one call per batch; calls are scored
//! against a per-batch *retraining gain* measured on a monitored model: fit
//! on the reference, compare its macro-F1 on a held-out half of the batch
//! against a model refit on reference plus the other half. A hit earns the
//! gain, a correct pass earns the small skip reward `t_s`, a false alarm
//! earns `gain - t_s`, and a miss forfeits the gain. The report ranks
//! detectors by total score; wall-clock timings are kept out of the report so
//! repeated runs produce identical bytes.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alert::{assess, AssessParams};
use crate::data::{
    BlobConfig, DatasetSequence, DriftKind, DriftScenario, LabeledDataset, PlannedDrift,
    SequencePlan,
};
use crate::error::{Error, Result};
use crate::repr::{MlpConfig, TrainedMlp};
use crate::stats::baselines::{
    baseline_test_with, distance_calibration, BaselineConfig, BaselineTest,
};
use crate::stats::psi;

/// Monitored-model family whose retraining gain defines the batch stakes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum M0Kind {
    Knn { k: usize },
    Mlp,
}

impl Default for M0Kind {
    fn default() -> Self {
        M0Kind::Knn { k: 5 }
    }
}

/// A fitted monitored model.
pub enum FittedM0 {
    Knn { rows: Vec<f64>, num_features: usize, labels: Vec<usize>, k: usize },
    Mlp(Box<TrainedMlp>),
}

impl FittedM0 {
    pub fn fit(data: &LabeledDataset, kind: M0Kind, seed: u64) -> Result<Self> {
        match kind {
            M0Kind::Knn { k } => {
                if k == 0 {
                    return Err(Error::Config("k must be positive".into()));
                }
                let rows =
                    (0..data.num_rows()).flat_map(|i| data.row(i).iter().copied()).collect();
                Ok(FittedM0::Knn {
                    rows,
                    num_features: data.num_features(),
                    labels: data.labels().to_vec(),
                    k,
                })
            }
            M0Kind::Mlp => {
                let config = MlpConfig::default().with_seed(seed);
                Ok(FittedM0::Mlp(Box::new(TrainedMlp::train(data, config)?)))
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        match self {
            FittedM0::Knn { rows, num_features, labels, k } => {
                if row.len() != *num_features {
                    return Err(Error::DimensionMismatch {
                        expected: *num_features,
                        actual: row.len(),
                    });
                }
                let mut neighbors: Vec<(f64, usize)> = rows
                    .chunks_exact(*num_features)
                    .zip(labels)
                    .map(|(train, &label)| {
                        let d2 =
                            train.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                        (d2, label)
                    })
                    .collect();
                neighbors.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut votes = std::collections::BTreeMap::new();
                for (_, label) in neighbors.iter().take(*k) {
                    *votes.entry(*label).or_insert(0usize) += 1;
                }
                // Highest vote count; ties break toward the smaller class.
                Ok(votes
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(label, _)| label)
                    .expect("k >= 1"))
            }
            FittedM0::Mlp(mlp) => mlp.predict_row(row),
        }
    }

    /// Macro-F1 of this model on a labeled evaluation set.
    pub fn macro_f1(&self, eval: &LabeledDataset) -> Result<f64> {
        let predicted: Vec<usize> =
            (0..eval.num_rows()).map(|i| self.predict_row(eval.row(i))).collect::<Result<_>>()?;
        macro_f1(eval.labels(), &predicted, eval.num_classes())
    }
}

/// Macro-averaged F1 over the classes present in `truth`; per-class precision
/// and recall with empty denominators count as zero.
pub fn macro_f1(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<f64> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(Error::InvalidInput(format!(
            "macro_f1 needs equal non-empty label slices, got {} and {}",
            truth.len(),
            predicted.len()
        )));
    }
    let mut f1_sum = 0.0;
    let mut present = 0usize;
    for class in 0..num_classes {
        let tp = truth
            .iter()
            .zip(predicted)
            .filter(|(&t, &p)| t == class && p == class)
            .count() as f64;
        let support = truth.iter().filter(|&&t| t == class).count() as f64;
        if support == 0.0 {
            continue;
        }
        present += 1;
        let called = predicted.iter().filter(|&&p| p == class).count() as f64;
        let precision = if called > 0.0 { tp / called } else { 0.0 };
        let recall = tp / support;
        if precision + recall > 0.0 {
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(f1_sum / present as f64)
}

/// Retraining gain for one batch: macro-F1 of a model refit on
/// reference + half the batch, minus the original model's macro-F1, both
/// measured on the other half.
pub fn f1_gain(
    original: &FittedM0,
    reference: &LabeledDataset,
    batch: &LabeledDataset,
    kind: M0Kind,
    m0_seed: u64,
    split_seed: u64,
) -> Result<f64> {
    if batch.num_rows() < 4 {
        return Err(Error::InvalidInput(format!(
            "gain measurement needs at least 4 rows per batch, got {}",
            batch.num_rows()
        )));
    }
    let mut indices: Vec<usize> = (0..batch.num_rows()).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed));
    let half = batch.num_rows() / 2;
    let retrain_half = batch.select_rows(&indices[..half], format!("{}-retrain", batch.name()))?;
    let eval_half = batch.select_rows(&indices[half..], format!("{}-eval", batch.name()))?;

    let refit_data = reference.concat(&retrain_half, format!("{}-refit", batch.name()))?;
    let refit = FittedM0::fit(&refit_data, kind, m0_seed)?;
    Ok(refit.macro_f1(&eval_half)? - original.macro_f1(&eval_half)?)
}

/// Reward for one detection call.
pub fn batch_score(detected: bool, drifted: bool, gain: f64, t_s: f64) -> f64 {
    match (detected, drifted) {
        (true, true) => gain,
        (false, false) => t_s,
        (true, false) => gain - t_s,
        (false, true) => -gain,
    }
}

/// Detection-call counts against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl ConfusionCounts {
    pub fn from_calls(detections: &[bool], truth: &[bool]) -> Self {
        let mut c = ConfusionCounts {
            true_positives: 0,
            true_negatives: 0,
            false_positives: 0,
            false_negatives: 0,
        };
        for (&d, &t) in detections.iter().zip(truth) {
            match (d, t) {
                (true, true) => c.true_positives += 1,
                (false, false) => c.true_negatives += 1,
                (true, false) => c.false_positives += 1,
                (false, true) => c.false_negatives += 1,
            }
        }
        c
    }
}

/// Precision/recall-style summary of detection calls. Metrics whose
/// denominator is zero are reported as 0 with `degenerate` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub false_discovery_rate: f64,
    pub degenerate: bool,
}

/// Computes the four detection metrics from counts.
pub fn detection_metrics(counts: ConfusionCounts) -> DetectionMetrics {
    let tp = counts.true_positives as f64;
    let fp = counts.false_positives as f64;
    let fn_ = counts.false_negatives as f64;
    let mut degenerate = false;
    let mut ratio = |num: f64, denom: f64| {
        if denom > 0.0 {
            num / denom
        } else {
            degenerate = true;
            0.0
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    let false_discovery_rate = ratio(fp, tp + fp);
    DetectionMetrics { precision, recall, f1, false_discovery_rate, degenerate }
}

/// A drift detector making one call per batch.
pub trait Detector: Send + Sync {
    fn name(&self) -> String;
    /// `batch_index` is the 0-based position of `batch` in the sequence.
    fn detect(
        &self,
        reference: &LabeledDataset,
        batch: &LabeledDataset,
        batch_index: usize,
    ) -> Result<bool>;
}

/// The representation-based detector under study.
pub struct AlertDetector {
    model: TrainedMlp,
    params: AssessParams,
}

impl AlertDetector {
    /// Trains the representation model on the reference window.
    pub fn fit(
        reference: &LabeledDataset,
        config: MlpConfig,
        params: AssessParams,
    ) -> Result<Self> {
        params.validate()?;
        Ok(Self { model: TrainedMlp::train(reference, config)?, params })
    }

    pub fn model(&self) -> &TrainedMlp {
        &self.model
    }
}

impl Detector for AlertDetector {
    fn name(&self) -> String {
        "alert".into()
    }

    fn detect(
        &self,
        reference: &LabeledDataset,
        batch: &LabeledDataset,
        _batch_index: usize,
    ) -> Result<bool> {
        Ok(assess(&self.model, reference, batch, &self.params)?.retrain)
    }
}

/// One classical test lifted to multivariate batches: run per feature, then
/// apply the test's drift rule to the feature mean (mean p-value below alpha,
/// mean PSI above its threshold, or mean distance above the mean permutation
/// threshold).
pub struct BaselineDetector {
    test: BaselineTest,
    config: BaselineConfig,
}

impl BaselineDetector {
    pub fn new(test: BaselineTest, config: BaselineConfig) -> Self {
        Self { test, config }
    }

    /// All ten baselines with one shared configuration.
    pub fn all(config: &BaselineConfig) -> Vec<Self> {
        BaselineTest::ALL.iter().map(|&test| Self::new(test, config.clone())).collect()
    }
}

impl Detector for BaselineDetector {
    fn name(&self) -> String {
        self.test.name().into()
    }

    fn detect(
        &self,
        reference: &LabeledDataset,
        batch: &LabeledDataset,
        _batch_index: usize,
    ) -> Result<bool> {
        if batch.num_features() != reference.num_features() {
            return Err(Error::DimensionMismatch {
                expected: reference.num_features(),
                actual: batch.num_features(),
            });
        }
        let columns = |j: usize| (reference.feature_column(j), batch.feature_column(j));
        let num_features = reference.num_features() as f64;
        match self.test {
            BaselineTest::Psi => {
                let mut total = 0.0;
                for j in 0..reference.num_features() {
                    let (a, b) = columns(j);
                    total += psi(&a, &b, self.config.psi_bins)?.psi;
                }
                Ok(total / num_features > self.config.psi_threshold)
            }
            BaselineTest::EnergyDistance | BaselineTest::Emd => {
                let mut observed = 0.0;
                let mut threshold = 0.0;
                for j in 0..reference.num_features() {
                    let (a, b) = columns(j);
                    let (obs, thr) = distance_calibration(self.test, &a, &b, &self.config)?;
                    observed += obs;
                    threshold += thr;
                }
                Ok(observed / num_features > threshold / num_features)
            }
            _ => {
                let mut total = 0.0;
                for j in 0..reference.num_features() {
                    let (a, b) = columns(j);
                    let outcome = baseline_test_with(self.test, &a, &b, &self.config)?;
                    total += outcome.p_value.expect("p-value test");
                }
                Ok(total / num_features < self.config.alpha)
            }
        }
    }
}

/// Fixed calls, one per batch; useful for scoring bounds and tests.
pub struct ScriptedDetector {
    name: String,
    calls: Vec<bool>,
}

impl ScriptedDetector {
    pub fn new(name: impl Into<String>, calls: Vec<bool>) -> Self {
        Self { name: name.into(), calls }
    }
}

impl Detector for ScriptedDetector {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn detect(
        &self,
        _reference: &LabeledDataset,
        _batch: &LabeledDataset,
        batch_index: usize,
    ) -> Result<bool> {
        self.calls.get(batch_index).copied().ok_or_else(|| {
            Error::InvalidInput(format!(
                "scripted detector '{}' has {} calls, batch index {batch_index} requested",
                self.name,
                self.calls.len()
            ))
        })
    }
}

/// Harness settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Skip reward for correctly passing on a clean batch.
    pub t_s: f64,
    pub m0: M0Kind,
    pub m0_seed: u64,
    pub split_seed: u64,
    /// Worker threads; `None` uses the global default.
    pub jobs: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { t_s: 0.1, m0: M0Kind::default(), m0_seed: 11, split_seed: 202, jobs: None }
    }
}

/// One detector's line in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorRow {
    pub name: String,
    pub detections: Vec<bool>,
    pub counts: ConfusionCounts,
    pub metrics: DetectionMetrics,
    pub score: f64,
}

/// Full benchmark result; deterministic for a given sequence and config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub sequence: String,
    pub t_s: f64,
    pub truth: Vec<bool>,
    pub gains: Vec<f64>,
    /// Score of the always-correct detector on this sequence.
    pub perfect_score: f64,
    /// Sorted by score, best first; ties break alphabetically.
    pub rows: Vec<DetectorRow>,
}

impl BenchReport {
    /// Plain-text ranking table.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let drifted = self.truth.iter().filter(|&&t| t).count();
        writeln!(
            out,
            "sequence: {}   batches: {}   drifted: {}   t_s: {}",
            self.sequence,
            self.truth.len(),
            drifted,
            self.t_s
        )
        .unwrap();
        writeln!(out, "perfect score: {:.4}", self.perfect_score).unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:<18} {:>3} {:>3} {:>3} {:>3}  {:>9} {:>7} {:>7} {:>7} {:>8}",
            "method", "tp", "tn", "fp", "fn", "precision", "fdr", "recall", "f1", "score"
        )
        .unwrap();
        for row in &self.rows {
            writeln!(
                out,
                "{:<18} {:>3} {:>3} {:>3} {:>3}  {:>9.3} {:>7.3} {:>7.3} {:>7.3} {:>8.4}",
                row.name,
                row.counts.true_positives,
                row.counts.true_negatives,
                row.counts.false_positives,
                row.counts.false_negatives,
                row.metrics.precision,
                row.metrics.false_discovery_rate,
                row.metrics.recall,
                row.metrics.f1,
                row.score
            )
            .unwrap();
        }
        out
    }
}

/// Wall-clock timings of a run; kept separate from [`BenchReport`] so the
/// report itself stays byte-identical across reruns.
#[derive(Debug, Clone)]
pub struct BenchTiming {
    pub gains_seconds: f64,
    pub detectors: Vec<(String, f64)>,
    pub total_seconds: f64,
}

impl BenchTiming {
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "gains: {:.3}s", self.gains_seconds).unwrap();
        for (name, secs) in &self.detectors {
            writeln!(out, "{name}: {secs:.3}s").unwrap();
        }
        writeln!(out, "total: {:.3}s", self.total_seconds).unwrap();
        out
    }
}

fn in_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs every detector over the sequence and scores the calls.
pub fn run_benchmark(
    sequence: &DatasetSequence,
    detectors: &[Box<dyn Detector>],
    cfg: &BenchConfig,
) -> Result<(BenchReport, BenchTiming)> {
    sequence.validate()?;
    if detectors.is_empty() {
        return Err(Error::Config("benchmark needs at least one detector".into()));
    }
    let started = Instant::now();

    let (gains_seconds, gains, detector_results, detector_seconds) = in_pool(cfg.jobs, || {
        let gains_started = Instant::now();
        let original = FittedM0::fit(&sequence.reference, cfg.m0, cfg.m0_seed)?;
        let gains: Vec<f64> = sequence
            .batches
            .par_iter()
            .enumerate()
            .map(|(i, batch)| {
                let split_seed = cfg.split_seed.wrapping_add(i as u64);
                f1_gain(&original, &sequence.reference, batch, cfg.m0, cfg.m0_seed, split_seed)
            })
            .collect::<Result<_>>()?;
        let gains_seconds = gains_started.elapsed().as_secs_f64();

        let mut detector_results = Vec::with_capacity(detectors.len());
        let mut detector_seconds = Vec::with_capacity(detectors.len());
        for detector in detectors {
            let det_started = Instant::now();
            let detections: Vec<bool> = sequence
                .batches
                .par_iter()
                .enumerate()
                .map(|(i, batch)| detector.detect(&sequence.reference, batch, i))
                .collect::<Result<_>>()?;
            detector_seconds.push((detector.name(), det_started.elapsed().as_secs_f64()));
            detector_results.push((detector.name(), detections));
        }
        Ok::<_, Error>((gains_seconds, gains, detector_results, detector_seconds))
    })??;

    let truth = sequence.drift_truth.clone();
    let perfect_score: f64 = truth
        .iter()
        .zip(&gains)
        .map(|(&drifted, &gain)| batch_score(drifted, drifted, gain, cfg.t_s))
        .sum();

    // Highest score any call sequence could reach: |gain| per drifted batch
    // (a miss on a negative-gain batch outscores the hit), and the better of
    // passing or alarming per clean batch.
    let score_ceiling: f64 = truth
        .iter()
        .zip(&gains)
        .map(|(&drifted, &gain)| if drifted { gain.abs() } else { cfg.t_s.max(gain - cfg.t_s) })
        .sum();

    let mut rows: Vec<DetectorRow> = detector_results
        .into_iter()
        .map(|(name, detections)| {
            let score: f64 = detections
                .iter()
                .zip(&truth)
                .zip(&gains)
                .map(|((&d, &t), &g)| batch_score(d, t, g, cfg.t_s))
                .sum();
            assert!(
                score <= score_ceiling + 1e-9,
                "detector {name} scored {score}, above the ceiling {score_ceiling}"
            );
            let counts = ConfusionCounts::from_calls(&detections, &truth);
            DetectorRow { name, detections, counts, metrics: detection_metrics(counts), score }
        })
        .collect();
    rows.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.name.cmp(&b.name)));

    let report = BenchReport {
        sequence: sequence.name.clone(),
        t_s: cfg.t_s,
        truth,
        gains,
        perfect_score,
        rows,
    };
    let timing = BenchTiming {
        gains_seconds,
        detectors: detector_seconds,
        total_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((report, timing))
}

/// The full default field: the representation detector plus all ten
/// baselines.
pub fn default_detectors(
    reference: &LabeledDataset,
    mlp: MlpConfig,
    params: AssessParams,
    baselines: &BaselineConfig,
) -> Result<Vec<Box<dyn Detector>>> {
    let mut detectors: Vec<Box<dyn Detector>> =
        vec![Box::new(AlertDetector::fit(reference, mlp, params)?)];
    for baseline in BaselineDetector::all(baselines) {
        detectors.push(Box::new(baseline));
    }
    Ok(detectors)
}

/// The standard synthetic corpus: quantized signal-strength-style blobs with
/// two flaky heavy-tailed sensors, thirty batches, every third one drifted,
/// cycling four drift shapes (strong broad shift, gradual ramp, medium shift
/// on most features, and a correlation break that leaves every per-feature
/// marginal untouched).
pub fn default_plan(seed: u64) -> SequencePlan {
    let blobs = BlobConfig {
        num_classes: 5,
        samples_per_class: 100,
        num_features: 25,
        center_loc: -90.0,
        center_spread: 2.5,
        noise_std: 2.0,
        quantize_step: Some(1.0),
        heavy_tail_features: 2,
        heavy_tail_df: 2.0,
        seed,
    };
    // Drift stays off the flaky sensors so their role is pure noise.
    let steady = blobs.num_features - blobs.heavy_tail_features;
    let feature_subset = |count: usize, salt: u64| -> Vec<usize> {
        let mut all: Vec<usize> = (0..steady).collect();
        all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(salt)));
        let mut chosen: Vec<usize> = all.into_iter().take(count).collect();
        chosen.sort_unstable();
        chosen
    };
    let drifts = (0..10)
        .map(|k| {
            let batch = 3 * (k + 1);
            let drift_seed = seed.wrapping_add(1000 + k as u64);
            match k % 4 {
                0 => PlannedDrift {
                    batch,
                    scenario: DriftScenario {
                        kind: DriftKind::Abrupt,
                        magnitude: -6.0,
                        fraction_drifted: 1.0,
                        seed: drift_seed,
                    },
                    features: None,
                },
                1 => PlannedDrift {
                    batch,
                    scenario: DriftScenario {
                        kind: DriftKind::Gradual,
                        magnitude: -5.0,
                        fraction_drifted: 0.6,
                        seed: drift_seed,
                    },
                    features: None,
                },
                2 => PlannedDrift {
                    batch,
                    scenario: DriftScenario {
                        kind: DriftKind::Abrupt,
                        magnitude: -7.0,
                        fraction_drifted: 1.0,
                        seed: drift_seed,
                    },
                    features: Some(feature_subset(15, 40 + k as u64)),
                },
                _ => PlannedDrift {
                    batch,
                    scenario: DriftScenario {
                        kind: DriftKind::Shuffle,
                        magnitude: 0.0,
                        fraction_drifted: 1.0,
                        seed: drift_seed,
                    },
                    features: Some(feature_subset(16, 40 + k as u64)),
                },
            }
        })
        .collect();
    SequencePlan {
        name: "rss-monitor".into(),
        num_batches: 30,
        rows_per_batch: 500,
        blobs,
        drifts,
        seed,
    }
}

/// One grid point of a network-shape sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Total dense layers including the output layer (2 = one hidden).
    pub layers: usize,
    /// Width of every hidden layer.
    pub neurons: usize,
    pub epochs: usize,
    pub utility: f64,
}

/// Sweep results over a (layers, neurons, epochs) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layers,neurons,epochs,utility\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.layers, p.neurons, p.epochs, p.utility));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Trains one network per (layers, neurons, epochs) grid point on the
/// reference window and records the drift utility against the candidate
/// batch. `layer_counts` are total dense layers (at least 2).
pub fn sweep_mlp(
    reference: &LabeledDataset,
    candidate: &LabeledDataset,
    layer_counts: &[usize],
    neuron_counts: &[usize],
    epoch_counts: &[usize],
    base: &MlpConfig,
    params: &AssessParams,
    jobs: Option<usize>,
) -> Result<SweepReport> {
    if layer_counts.is_empty() || neuron_counts.is_empty() || epoch_counts.is_empty() {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    if layer_counts.iter().any(|&l| l < 2) {
        return Err(Error::Config("layer counts include the output layer; minimum is 2".into()));
    }
    if neuron_counts.iter().any(|&n| n == 0) {
        return Err(Error::Config("neuron counts must be positive".into()));
    }
    let grid: Vec<(usize, usize, usize)> = layer_counts
        .iter()
        .flat_map(|&l| {
            neuron_counts
                .iter()
                .flat_map(move |&n| epoch_counts.iter().map(move |&e| (l, n, e)))
        })
        .collect();
    let points = in_pool(jobs, || {
        grid.par_iter()
            .map(|&(layers, neurons, epochs)| {
                let config = base
                    .clone()
                    .with_hidden_layers(vec![neurons; layers - 1])
                    .with_epochs(epochs);
                let model = TrainedMlp::train(reference, config)?;
                let utility = assess(&model, reference, candidate, params)?.utility;
                Ok(SweepPoint { layers, neurons, epochs, utility })
            })
            .collect::<Result<Vec<SweepPoint>>>()
    })??;
    Ok(SweepReport { points })
}
