//! The drift utility: turning two-sample evidence into a retrain decision.
//!
//! Four aggregated statistics feed the score — KS p-values and PSI values,
//! each computed on raw features and on learned embeddings:
//!
//! - `U_KS  = ((1 - p_data) + (1 - p_repr)) / 2`
//! - `U_PSI = logistic((psi_data + psi_repr) / 2)`
//! - `U     = (U_KS + U_PSI) / 2`
//!
//! `U` is bounded in [0, 1]; a batch is flagged for retraining when
//! `U >= threshold` (default 0.5). Two identical windows score exactly 0.25:
//! the KS side contributes nothing (p = 1) and the PSI side sits at the
//! logistic midpoint (PSI = 0). The module also decomposes a verdict into
//! per-component contributions and supports ablations where one component is
//! replaced by its no-drift value.

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::repr::TrainedMlp;
use crate::stats::{AggregationMode, TestReport};

/// Standard logistic function `1 / (1 + e^{-z})`.
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// KS side of the utility: mean complement of the two aggregated p-values.
pub fn utility_ks(p_data: f64, p_repr: f64) -> f64 {
    ((1.0 - p_data) + (1.0 - p_repr)) / 2.0
}

/// PSI side of the utility: logistic of the mean aggregated PSI.
pub fn utility_psi(psi_data: f64, psi_repr: f64) -> f64 {
    logistic((psi_data + psi_repr) / 2.0)
}

/// The combined drift utility.
pub fn utility(p_data: f64, p_repr: f64, psi_data: f64, psi_repr: f64) -> f64 {
    (utility_ks(p_data, p_repr) + utility_psi(psi_data, psi_repr)) / 2.0
}

/// The four evidence sources feeding the utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityComponent {
    KsData,
    KsRepr,
    PsiData,
    PsiRepr,
}

impl UtilityComponent {
    pub const ALL: [UtilityComponent; 4] = [
        UtilityComponent::KsData,
        UtilityComponent::KsRepr,
        UtilityComponent::PsiData,
        UtilityComponent::PsiRepr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            UtilityComponent::KsData => "ks-data",
            UtilityComponent::KsRepr => "ks-repr",
            UtilityComponent::PsiData => "psi-data",
            UtilityComponent::PsiRepr => "psi-repr",
        }
    }
}

impl std::fmt::Display for UtilityComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The utility with one component replaced by its no-drift value (p = 1 for a
/// KS component, PSI = 0 for a PSI component), keeping the two-term structure
/// of each side intact.
pub fn utility_without(
    component: UtilityComponent,
    p_data: f64,
    p_repr: f64,
    psi_data: f64,
    psi_repr: f64,
) -> f64 {
    match component {
        UtilityComponent::KsData => utility(1.0, p_repr, psi_data, psi_repr),
        UtilityComponent::KsRepr => utility(p_data, 1.0, psi_data, psi_repr),
        UtilityComponent::PsiData => utility(p_data, p_repr, 0.0, psi_repr),
        UtilityComponent::PsiRepr => utility(p_data, p_repr, psi_data, 0.0),
    }
}

/// Additive decomposition of a utility value: the four parts sum to `U`
/// exactly.
///
/// The KS side is already a sum, `(1 - p_data)/4 + (1 - p_repr)/4`. The PSI
/// side, `U_PSI / 2`, is split between its two inputs in proportion to their
/// PSI values (equally when both are zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub ks_data: f64,
    pub ks_repr: f64,
    pub psi_data: f64,
    pub psi_repr: f64,
}

impl Contributions {
    pub fn compute(p_data: f64, p_repr: f64, psi_data: f64, psi_repr: f64) -> Self {
        let psi_side = utility_psi(psi_data, psi_repr) / 2.0;
        let psi_total = psi_data + psi_repr;
        let (wd, wr) =
            if psi_total > 0.0 { (psi_data / psi_total, psi_repr / psi_total) } else { (0.5, 0.5) };
        Self {
            ks_data: (1.0 - p_data) / 4.0,
            ks_repr: (1.0 - p_repr) / 4.0,
            psi_data: psi_side * wd,
            psi_repr: psi_side * wr,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ks_data, self.ks_repr, self.psi_data, self.psi_repr]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Percentage share of each component; sums to 100 (the total is at least
    /// 0.25, so the division is always defined).
    pub fn shares(&self) -> [f64; 4] {
        let total = self.total();
        self.as_array().map(|m| 100.0 * m / total)
    }
}

/// Settings for one drift assessment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessParams {
    /// Retrain when the utility reaches this value.
    pub threshold: f64,
    /// Bins for the PSI computations.
    pub num_bins: usize,
    pub aggregation: AggregationMode,
    /// Embedding depth: keep this many hidden layers (`None` = all of them).
    pub clip_layer: Option<usize>,
}

impl Default for AssessParams {
    fn default() -> Self {
        Self { threshold: 0.5, num_bins: 10, aggregation: AggregationMode::Mean, clip_layer: None }
    }
}

impl AssessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && (0.0..=1.0).contains(&self.threshold)) {
            return Err(Error::Config(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.num_bins < 2 {
            return Err(Error::Config(format!(
                "num_bins must be at least 2, got {}",
                self.num_bins
            )));
        }
        Ok(())
    }
}

/// Outcome of one assessment: the score, the decision, and everything that
/// went into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftVerdict {
    pub utility: f64,
    pub threshold: f64,
    pub retrain: bool,
    pub utility_ks: f64,
    pub utility_psi: f64,
    pub contributions: Contributions,
    pub report: TestReport,
}

impl DriftVerdict {
    fn inputs(&self) -> (f64, f64, f64, f64) {
        (
            self.report.ks_data.p_value,
            self.report.ks_repr.p_value,
            self.report.psi_data.psi,
            self.report.psi_repr.psi,
        )
    }
}

/// Assesses a candidate batch against the reference window.
///
/// The candidate's labels are never read: both windows are embedded with the
/// model's clipped stack, the four aggregated statistics are computed, and
/// the utility decides. This is what allows assessment of unlabeled
/// production batches.
pub fn assess(
    model: &TrainedMlp,
    reference: &LabeledDataset,
    candidate: &LabeledDataset,
    params: &AssessParams,
) -> Result<DriftVerdict> {
    params.validate()?;
    let clipped = match params.clip_layer {
        Some(depth) => model.clip(depth)?,
        None => model.clip_last_hidden()?,
    };
    let repr_reference = clipped.embed(reference)?;
    let repr_candidate = clipped.embed(candidate)?;
    let report = TestReport::compute(
        reference,
        candidate,
        &repr_reference,
        &repr_candidate,
        params.num_bins,
        params.aggregation,
    )?;

    let u_ks = utility_ks(report.ks_data.p_value, report.ks_repr.p_value);
    let u_psi = utility_psi(report.psi_data.psi, report.psi_repr.psi);
    let u = (u_ks + u_psi) / 2.0;
    let contributions = Contributions::compute(
        report.ks_data.p_value,
        report.ks_repr.p_value,
        report.psi_data.psi,
        report.psi_repr.psi,
    );
    Ok(DriftVerdict {
        utility: u,
        threshold: params.threshold,
        retrain: u >= params.threshold,
        utility_ks: u_ks,
        utility_psi: u_psi,
        contributions,
        report,
    })
}

/// One ablation row: the utility with a component nulled out, and the change
/// that removal causes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub component: UtilityComponent,
    pub utility_without: f64,
    /// `utility_without - baseline`: negative when the component was pushing
    /// toward retraining.
    pub delta: f64,
}

/// Ablation of a verdict: the full utility next to each leave-one-out value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub baseline: f64,
    pub rows: Vec<AblationRow>,
}

/// Recomputes the utility four times, each with one component nulled.
pub fn ablation(verdict: &DriftVerdict) -> AblationTable {
    let (p_data, p_repr, psi_data, psi_repr) = verdict.inputs();
    let rows = UtilityComponent::ALL
        .iter()
        .map(|&component| {
            let without = utility_without(component, p_data, p_repr, psi_data, psi_repr);
            AblationRow { component, utility_without: without, delta: without - verdict.utility }
        })
        .collect();
    AblationTable { baseline: verdict.utility, rows }
}

impl std::fmt::Display for AblationTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<10}  {:>10}  {:>10}", "component", "U without", "delta")?;
        writeln!(f, "{:<10}  {:>10.6}  {:>10}", "(none)", self.baseline, "-")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<10}  {:>10.6}  {:>+10.6}",
                row.component.name(),
                row.utility_without,
                row.delta
            )?;
        }
        Ok(())
    }
}
