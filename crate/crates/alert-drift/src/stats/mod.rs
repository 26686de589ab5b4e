//! Two-sample statistics: Kolmogorov-Smirnov, population stability index, and
//! the per-feature test report that feeds the drift utility.
//!
//! KS computes the exact sup-distance between empirical CDFs over the merged
//! sample points and the asymptotic two-sided tail probability. PSI bins both
//! samples into quantile bins of the reference (outer bins open-ended), floors
//! frequencies at a small epsilon, renormalizes, and sums
//! `(P(x_i) - P(y_i)) * ln(P(x_i) / P(y_i))`. Multivariate inputs are tested
//! per feature dimension and aggregated by mean (default) or max.

pub mod baselines;

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::repr::RepresentationSet;

/// Frequencies are floored at this value before renormalization so PSI stays
/// finite when a bin is empty on one side.
pub const PSI_SMOOTHING_EPS: f64 = 1e-4;

/// Kolmogorov-Smirnov tail series truncation: stop once a term drops below
/// this magnitude, or after [`KS_SERIES_MAX_TERMS`] terms.
pub const KS_SERIES_EPS: f64 = 1e-12;
pub const KS_SERIES_MAX_TERMS: usize = 1000;

/// Result of a two-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// Sup-distance between the two empirical CDFs.
    pub statistic: f64,
    /// Two-sided asymptotic p-value, clamped to [0, 1].
    pub p_value: f64,
    pub n_x: usize,
    pub n_y: usize,
}

/// Result of a population stability index computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiResult {
    pub psi: f64,
    pub num_bins: usize,
    /// Interior bin edges (reference quantiles); the outer bins extend to ±∞.
    /// Empty on aggregated results, where no single edge set applies.
    pub bin_edges: Vec<f64>,
}

impl PsiResult {
    /// Conventional reading: PSI below 0.1 indicates no significant difference.
    pub fn is_significant(&self) -> bool {
        self.psi >= 0.1
    }
}

/// How per-feature statistics collapse to a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    #[default]
    Mean,
    Max,
}

fn validate_sample(name: &str, sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::InvalidInput(format!("{name} sample is empty")));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} sample contains non-finite values")));
    }
    Ok(())
}

/// Largest positive and negative ECDF differences over the merged sample
/// points of two sorted samples: `(sup F_x - F_y, sup F_y - F_x)`.
pub(crate) fn ecdf_extremes(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut d_plus, mut d_minus) = (0.0f64, 0.0f64);
    while i < xs.len() || j < ys.len() {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!("loop guard"),
        };
        while i < xs.len() && xs[i] == t {
            i += 1;
        }
        while j < ys.len() && ys[j] == t {
            j += 1;
        }
        let diff = i as f64 / n - j as f64 / m;
        if diff > d_plus {
            d_plus = diff;
        }
        if -diff > d_minus {
            d_minus = -diff;
        }
    }
    (d_plus, d_minus)
}

pub(crate) fn sorted_copy(sample: &[f64]) -> Vec<f64> {
    let mut out = sample.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// The statistic is the exact sup of |F_x - F_y| over the merged sample
/// points; the p-value is the asymptotic two-sided tail
/// `2 Σ_{i≥1} (-1)^{i-1} exp(-2 c² i²)` at `c = D √(n·m/(n+m))`, truncated per
/// [`KS_SERIES_EPS`] / [`KS_SERIES_MAX_TERMS`] and clamped to [0, 1].
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    validate_sample("x", x)?;
    validate_sample("y", y)?;
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let (d_plus, d_minus) = ecdf_extremes(&xs, &ys);
    let d = d_plus.max(d_minus);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let c = d * ((n * m) / (n + m)).sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_tail(c), n_x: xs.len(), n_y: ys.len() })
}

/// Asymptotic two-sided Kolmogorov tail probability at scaled statistic `c`.
/// `c = 0` (identical ECDFs) clamps to 1 directly: the series does not
/// converge there.
pub(crate) fn kolmogorov_tail(c: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for i in 1..=KS_SERIES_MAX_TERMS {
        let k = i as f64;
        let term = (-2.0 * c * c * k * k).exp();
        sum += sign * term;
        if term < KS_SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Interior quantile edges of `sample` for `num_bins` equal-probability bins
/// (linear interpolation between order statistics).
pub(crate) fn quantile_edges(sample: &[f64], num_bins: usize) -> Vec<f64> {
    let sorted = sorted_copy(sample);
    let n = sorted.len();
    (1..num_bins)
        .map(|k| {
            let pos = (k as f64 / num_bins as f64) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        })
        .collect()
}

/// Bin index for `v` against sorted interior edges: bins are
/// `(-∞, e1], (e1, e2], …, (e_{k-1}, +∞)`.
pub(crate) fn bin_index(v: f64, edges: &[f64]) -> usize {
    edges.partition_point(|&e| e < v)
}

fn smoothed_frequencies(sample: &[f64], edges: &[f64], num_bins: usize) -> Vec<f64> {
    let mut counts = vec![0usize; num_bins];
    for &v in sample {
        counts[bin_index(v, edges)] += 1;
    }
    let total = sample.len() as f64;
    let mut freqs: Vec<f64> =
        counts.iter().map(|&c| (c as f64 / total).max(PSI_SMOOTHING_EPS)).collect();
    let sum: f64 = freqs.iter().sum();
    for f in &mut freqs {
        *f /= sum;
    }
    freqs
}

/// Population stability index of `candidate` against `reference`.
///
/// Bins are `num_bins` quantile bins of the reference with open-ended outer
/// bins; frequencies on both sides are floored at [`PSI_SMOOTHING_EPS`] and
/// renormalized before summing `(p_i - q_i) ln(p_i / q_i)`.
pub fn psi(reference: &[f64], candidate: &[f64], num_bins: usize) -> Result<PsiResult> {
    validate_sample("reference", reference)?;
    validate_sample("candidate", candidate)?;
    if num_bins < 2 {
        return Err(Error::Config(format!("num_bins must be at least 2, got {num_bins}")));
    }
    let edges = quantile_edges(reference, num_bins);
    let p = smoothed_frequencies(reference, &edges, num_bins);
    let q = smoothed_frequencies(candidate, &edges, num_bins);
    let value: f64 = p.iter().zip(&q).map(|(pi, qi)| (pi - qi) * (pi / qi).ln()).sum();
    Ok(PsiResult { psi: value, num_bins, bin_edges: edges })
}

/// Collapses per-dimension statistics (p-values or PSI values) into one value.
pub fn aggregate_per_feature(values: &[f64], mode: AggregationMode) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("nothing to aggregate".into()));
    }
    Ok(match mode {
        AggregationMode::Mean => values.iter().sum::<f64>() / values.len() as f64,
        AggregationMode::Max => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Per-feature test results for both routes (raw data and representation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerFeatureReport {
    pub ks_data: Vec<KsResult>,
    pub ks_repr: Vec<KsResult>,
    pub psi_data: Vec<PsiResult>,
    pub psi_repr: Vec<PsiResult>,
}

/// The four aggregated statistics the drift utility consumes, plus the
/// per-feature detail they were aggregated from.
///
/// On the aggregated `KsResult`s, both `statistic` and `p_value` are the
/// aggregation of the per-feature values; on the aggregated `PsiResult`s the
/// edge list is empty because no single edge set applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub aggregation: AggregationMode,
    pub num_bins: usize,
    pub ks_data: KsResult,
    pub ks_repr: KsResult,
    pub psi_data: PsiResult,
    pub psi_repr: PsiResult,
    pub per_feature: PerFeatureReport,
}

impl TestReport {
    /// Runs KS and PSI per feature dimension on the raw data pair and per
    /// embedding dimension on the representation pair, then aggregates.
    pub fn compute(
        reference: &LabeledDataset,
        candidate: &LabeledDataset,
        repr_reference: &RepresentationSet,
        repr_candidate: &RepresentationSet,
        num_bins: usize,
        aggregation: AggregationMode,
    ) -> Result<Self> {
        if candidate.num_features() != reference.num_features() {
            return Err(Error::DimensionMismatch {
                expected: reference.num_features(),
                actual: candidate.num_features(),
            });
        }
        if repr_candidate.dim() != repr_reference.dim() {
            return Err(Error::DimensionMismatch {
                expected: repr_reference.dim(),
                actual: repr_candidate.dim(),
            });
        }

        let data_cols = |j: usize| (reference.feature_column(j), candidate.feature_column(j));
        let repr_cols = |j: usize| (repr_reference.column(j), repr_candidate.column(j));

        let mut ks_data = Vec::with_capacity(reference.num_features());
        let mut psi_data = Vec::with_capacity(reference.num_features());
        for j in 0..reference.num_features() {
            let (a, b) = data_cols(j);
            ks_data.push(ks_two_sample(&a, &b)?);
            psi_data.push(psi(&a, &b, num_bins)?);
        }
        let mut ks_repr = Vec::with_capacity(repr_reference.dim());
        let mut psi_repr = Vec::with_capacity(repr_reference.dim());
        for j in 0..repr_reference.dim() {
            let (a, b) = repr_cols(j);
            ks_repr.push(ks_two_sample(&a, &b)?);
            psi_repr.push(psi(&a, &b, num_bins)?);
        }

        let agg_ks = |results: &[KsResult]| -> Result<KsResult> {
            Ok(KsResult {
                statistic: aggregate_per_feature(
                    &results.iter().map(|r| r.statistic).collect::<Vec<_>>(),
                    aggregation,
                )?,
                p_value: aggregate_per_feature(
                    &results.iter().map(|r| r.p_value).collect::<Vec<_>>(),
                    aggregation,
                )?,
                n_x: results[0].n_x,
                n_y: results[0].n_y,
            })
        };
        let agg_psi = |results: &[PsiResult]| -> Result<PsiResult> {
            Ok(PsiResult {
                psi: aggregate_per_feature(
                    &results.iter().map(|r| r.psi).collect::<Vec<_>>(),
                    aggregation,
                )?,
                num_bins,
                bin_edges: Vec::new(),
            })
        };

        Ok(TestReport {
            aggregation,
            num_bins,
            ks_data: agg_ks(&ks_data)?,
            ks_repr: agg_ks(&ks_repr)?,
            psi_data: agg_psi(&psi_data)?,
            psi_repr: agg_psi(&psi_repr)?,
            per_feature: PerFeatureReport { ks_data, ks_repr, psi_data, psi_repr },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const TOL: f64 = 1e-12;

    fn normal_sample(n: usize, mean: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| mean + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    // Brute-force oracle: evaluate both ECDFs at every sample point by scanning.
    fn ks_statistic_oracle(x: &[f64], y: &[f64]) -> f64 {
        let mut d: f64 = 0.0;
        for &t in x.iter().chain(y.iter()) {
            let fx = x.iter().filter(|&&v| v <= t).count() as f64 / x.len() as f64;
            let fy = y.iter().filter(|&&v| v <= t).count() as f64 / y.len() as f64;
            d = d.max((fx - fy).abs());
        }
        d
    }

    #[test]
    fn ks_identical_samples_give_zero_statistic_and_p_one() {
        let x = [1.0, 2.0, 3.0];
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_disjoint_samples_give_statistic_one() {
        let x = [0.0, 0.1, 0.2, 0.3];
        let y = [5.0, 5.1, 5.2, 5.3];
        let r = ks_two_sample(&x, &y).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 0.1);
    }

    #[test]
    fn ks_small_fixture_matches_hand_computed_distance() {
        // F_x steps at 1,2,3; F_y at 1.5,2.5,3.5; the sup gap is 1/3 at several
        // points and 2/3 nowhere, checked by the scanning oracle too.
        let x = [1.0, 2.0, 3.0];
        let y = [1.5, 2.5, 3.5];
        let r = ks_two_sample(&x, &y).unwrap();
        assert_relative_eq!(r.statistic, 1.0 / 3.0, epsilon = TOL);
        assert_relative_eq!(r.statistic, ks_statistic_oracle(&x, &y), epsilon = 0.0);
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        let x = [1.0, 1.0, 2.0];
        let y = [1.0, 2.0, 2.0];
        let r = ks_two_sample(&x, &y).unwrap();
        assert_relative_eq!(r.statistic, ks_statistic_oracle(&x, &y), epsilon = 0.0);
        assert_relative_eq!(r.statistic, 1.0 / 3.0, epsilon = TOL);
    }

    #[test]
    fn ks_statistic_matches_scanning_oracle_on_seeded_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..25 {
            let n = rng.random_range(5..200);
            let m = rng.random_range(5..200);
            let x = normal_sample(n, 0.0, 100 + round);
            let y = normal_sample(m, 0.3, 200 + round);
            let r = ks_two_sample(&x, &y).unwrap();
            assert_eq!(r.statistic, ks_statistic_oracle(&x, &y), "round {round}");
        }
    }

    #[test]
    fn ks_p_value_matches_independent_series_sum() {
        // Independent re-summation of the tail series with the same truncation.
        let oracle = |c: f64| -> f64 {
            if c == 0.0 {
                return 1.0;
            }
            let mut total = 0.0;
            for i in 1..=1000 {
                let term = (-2.0 * c * c * (i * i) as f64).exp();
                total += if i % 2 == 1 { term } else { -term };
                if term < 1e-12 {
                    break;
                }
            }
            (2.0 * total).clamp(0.0, 1.0)
        };
        let x = normal_sample(80, 0.0, 1);
        let y = normal_sample(120, 0.4, 2);
        let r = ks_two_sample(&x, &y).unwrap();
        let n = 80.0f64;
        let m = 120.0f64;
        let c = r.statistic * ((n * m) / (n + m)).sqrt();
        assert_relative_eq!(r.p_value, oracle(c), epsilon = 1e-9);
    }

    #[test]
    fn ks_is_symmetric_in_both_samples() {
        let x = normal_sample(50, 0.0, 3);
        let y = normal_sample(70, 0.5, 4);
        let a = ks_two_sample(&x, &y).unwrap();
        let b = ks_two_sample(&y, &x).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.p_value, b.p_value);
        assert_eq!(a.n_x, b.n_y);
    }

    #[test]
    fn ks_rejects_empty_and_non_finite_samples() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[1.0], &[f64::NAN]).is_err());
    }

    #[test]
    fn psi_of_a_sample_with_itself_is_exactly_zero() {
        let a = normal_sample(500, 0.0, 9);
        let r = psi(&a, &a, 10).unwrap();
        assert_eq!(r.psi, 0.0);
        assert_eq!(r.bin_edges.len(), 9);
    }

    #[test]
    fn psi_is_nonnegative_and_grows_with_shift() {
        let reference = normal_sample(2000, 0.0, 10);
        let base = normal_sample(2000, 0.0, 11);
        let mut last = -1.0;
        for shift in [0.0, 0.5, 1.0, 2.0] {
            let shifted: Vec<f64> = base.iter().map(|v| v + shift).collect();
            let r = psi(&reference, &shifted, 10).unwrap();
            assert!(r.psi >= 0.0);
            assert!(r.psi > last, "psi not increasing at shift {shift}");
            last = r.psi;
        }
    }

    #[test]
    fn psi_same_distribution_draws_stay_below_point_one() {
        let a = normal_sample(1500, 0.0, 12);
        let b = normal_sample(1500, 0.0, 13);
        let r = psi(&a, &b, 10).unwrap();
        assert!(r.psi < 0.1, "psi = {}", r.psi);
        assert!(!r.is_significant());
    }

    #[test]
    fn psi_matches_independent_resummation() {
        // Recompute frequencies with a naive per-bin count and re-sum.
        let reference = normal_sample(400, 0.0, 14);
        let candidate = normal_sample(300, 0.8, 15);
        let num_bins = 10;
        let r = psi(&reference, &candidate, num_bins).unwrap();

        let freqs = |sample: &[f64]| -> Vec<f64> {
            let mut counts = vec![0usize; num_bins];
            'outer: for &v in sample {
                for (b, &e) in r.bin_edges.iter().enumerate() {
                    if v <= e {
                        counts[b] += 1;
                        continue 'outer;
                    }
                }
                counts[num_bins - 1] += 1;
            }
            let raw: Vec<f64> =
                counts.iter().map(|&c| (c as f64 / sample.len() as f64).max(1e-4)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|f| f / s).collect()
        };
        let p = freqs(&reference);
        let q = freqs(&candidate);
        let expected: f64 =
            p.iter().zip(&q).map(|(pi, qi)| (pi - qi) * (pi / qi).ln()).sum();
        assert_relative_eq!(r.psi, expected, epsilon = 1e-12);
    }

    #[test]
    fn psi_empty_bin_stays_finite_via_smoothing() {
        let reference = normal_sample(200, 0.0, 16);
        let candidate: Vec<f64> = normal_sample(200, 0.0, 17).iter().map(|v| v + 50.0).collect();
        let r = psi(&reference, &candidate, 10).unwrap();
        assert!(r.psi.is_finite());
        assert!(r.psi > 1.0);
    }

    #[test]
    fn psi_constant_reference_is_handled() {
        let reference = vec![5.0; 100];
        let r = psi(&reference, &reference, 10).unwrap();
        assert_eq!(r.psi, 0.0);
        let shifted = vec![6.0; 100];
        let r2 = psi(&reference, &shifted, 10).unwrap();
        assert!(r2.psi.is_finite());
        assert!(r2.psi > 0.0);
    }

    #[test]
    fn psi_rejects_too_few_bins() {
        assert!(psi(&[1.0, 2.0], &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn aggregate_mean_and_max_behave() {
        let values = [0.2, 0.4, 0.9];
        assert_relative_eq!(
            aggregate_per_feature(&values, AggregationMode::Mean).unwrap(),
            0.5,
            epsilon = TOL
        );
        assert_eq!(aggregate_per_feature(&values, AggregationMode::Max).unwrap(), 0.9);
        assert!(aggregate_per_feature(&[], AggregationMode::Mean).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            // Positive affine maps are exact in f64, so order and ties are
            // preserved exactly and D must not move at all.
            #[test]
            fn ks_statistic_invariant_under_increasing_affine_map(
                x in prop::collection::vec(-1000..1000i32, 2..60),
                y in prop::collection::vec(-1000..1000i32, 2..60),
            ) {
                let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                let base = ks_two_sample(&xf, &yf).unwrap();
                let tx: Vec<f64> = xf.iter().map(|v| v * 2.0 + 1.0).collect();
                let ty: Vec<f64> = yf.iter().map(|v| v * 2.0 + 1.0).collect();
                let mapped = ks_two_sample(&tx, &ty).unwrap();
                prop_assert_eq!(base.statistic, mapped.statistic);
            }

            #[test]
            fn ks_statistic_lies_in_unit_interval(
                x in prop::collection::vec(-1e6..1e6f64, 1..80),
                y in prop::collection::vec(-1e6..1e6f64, 1..80),
            ) {
                let r = ks_two_sample(&x, &y).unwrap();
                prop_assert!((0.0..=1.0).contains(&r.statistic));
                prop_assert!((0.0..=1.0).contains(&r.p_value));
            }

            #[test]
            fn psi_nonnegative_on_arbitrary_pairs(
                x in prop::collection::vec(-100..100i32, 5..80),
                y in prop::collection::vec(-100..100i32, 5..80),
            ) {
                let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                let r = psi(&xf, &yf, 10).unwrap();
                prop_assert!(r.psi >= 0.0);
                prop_assert!(r.psi.is_finite());
            }
        }
    }
}
