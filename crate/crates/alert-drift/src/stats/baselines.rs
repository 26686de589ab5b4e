//! Classical two-sample drift baselines.
//!
//! Each test follows its standard textbook construction: Kuiper and KS from
//! ECDF extremes with their asymptotic tail series, Cramér-von Mises from
//! pooled midranks normalized to the one-sample limiting distribution
//! (Csörgő-Faraway series, Bessel K_{1/4}), Anderson-Darling from the
//! Scholz-Stephens standardized two-sample statistic with their published
//! interpolation table, Mann-Whitney with exact enumeration on small pooled
//! samples, Welch's t and a chi-square homogeneity test on the PSI binning.
//! Energy distance and the 1-D earth mover's distance have no closed-form
//! null, so their drift calls are calibrated by a seeded permutation scheme.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

use super::{bin_index, ecdf_extremes, ks_two_sample, psi, quantile_edges, sorted_copy};
use crate::error::{Error, Result};

/// The implemented baseline detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineTest {
    Kuiper,
    CramerVonMises,
    AndersonDarling,
    MannWhitneyU,
    WelchT,
    ChiSquare,
    Ks,
    Psi,
    EnergyDistance,
    Emd,
}

impl BaselineTest {
    pub const ALL: [BaselineTest; 10] = [
        BaselineTest::Kuiper,
        BaselineTest::CramerVonMises,
        BaselineTest::AndersonDarling,
        BaselineTest::MannWhitneyU,
        BaselineTest::WelchT,
        BaselineTest::ChiSquare,
        BaselineTest::Ks,
        BaselineTest::Psi,
        BaselineTest::EnergyDistance,
        BaselineTest::Emd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineTest::Kuiper => "kuiper",
            BaselineTest::CramerVonMises => "cvm",
            BaselineTest::AndersonDarling => "anderson-darling",
            BaselineTest::MannWhitneyU => "mann-whitney",
            BaselineTest::WelchT => "welch-t",
            BaselineTest::ChiSquare => "chi-square",
            BaselineTest::Ks => "ks",
            BaselineTest::Psi => "psi",
            BaselineTest::EnergyDistance => "energy",
            BaselineTest::Emd => "emd",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.name() == name)
    }
}

impl std::fmt::Display for BaselineTest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds and calibration knobs shared by all baselines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Significance level for the p-value based tests.
    pub alpha: f64,
    /// Bins for the PSI and chi-square binning.
    pub psi_bins: usize,
    /// PSI above this value flags drift.
    pub psi_threshold: f64,
    /// Permutations for the distance-test calibration.
    pub permutations: usize,
    /// Quantile of the permutation distribution used as the drift threshold.
    pub permutation_quantile: f64,
    pub permutation_seed: u64,
    /// Mann-Whitney switches to exact enumeration when n + m is at most this.
    pub mwu_exact_limit: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            psi_bins: 10,
            psi_threshold: 0.1,
            permutations: 99,
            permutation_quantile: 0.95,
            permutation_seed: 0x5EED_CA1B,
            mwu_exact_limit: 14,
        }
    }
}

/// Outcome of one baseline run on a univariate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    pub test: BaselineTest,
    pub statistic: f64,
    /// `None` for the distance tests, whose calls are permutation-calibrated.
    pub p_value: Option<f64>,
    pub drift: bool,
}

/// Runs one baseline with default thresholds.
pub fn baseline_test(test: BaselineTest, x: &[f64], y: &[f64]) -> Result<BaselineOutcome> {
    baseline_test_with(test, x, y, &BaselineConfig::default())
}

/// Runs one baseline with explicit configuration.
pub fn baseline_test_with(
    test: BaselineTest,
    x: &[f64],
    y: &[f64],
    cfg: &BaselineConfig,
) -> Result<BaselineOutcome> {
    let outcome = |statistic: f64, p_value: Option<f64>, drift: bool| BaselineOutcome {
        test,
        statistic,
        p_value,
        drift,
    };
    Ok(match test {
        BaselineTest::Kuiper => {
            let (v, p) = kuiper(x, y)?;
            outcome(v, Some(p), p < cfg.alpha)
        }
        BaselineTest::CramerVonMises => {
            let (t, p) = cramer_von_mises(x, y)?;
            outcome(t, Some(p), p < cfg.alpha)
        }
        BaselineTest::AndersonDarling => {
            let (a2, p) = anderson_darling(x, y)?;
            outcome(a2, Some(p), p < cfg.alpha)
        }
        BaselineTest::MannWhitneyU => {
            let (u, p) = mann_whitney_u(x, y, cfg.mwu_exact_limit)?;
            outcome(u, Some(p), p < cfg.alpha)
        }
        BaselineTest::WelchT => {
            let (t, p) = welch_t(x, y)?;
            outcome(t, Some(p), p < cfg.alpha)
        }
        BaselineTest::ChiSquare => {
            let (chi2, p) = chi_square(x, y, cfg.psi_bins)?;
            outcome(chi2, Some(p), p < cfg.alpha)
        }
        BaselineTest::Ks => {
            let r = ks_two_sample(x, y)?;
            outcome(r.statistic, Some(r.p_value), r.p_value < cfg.alpha)
        }
        BaselineTest::Psi => {
            let r = psi(x, y, cfg.psi_bins)?;
            outcome(r.psi, None, r.psi > cfg.psi_threshold)
        }
        BaselineTest::EnergyDistance => {
            let (values, mask, n, m) = pooled_with_mask(x, y)?;
            let observed = energy_masked(&values, &mask, n, m);
            let drift = permutation_exceeds(observed, &values, &mask, n, m, cfg, energy_masked);
            outcome(observed, None, drift)
        }
        BaselineTest::Emd => {
            let (values, mask, n, m) = pooled_with_mask(x, y)?;
            let observed = emd_masked(&values, &mask, n, m);
            let drift = permutation_exceeds(observed, &values, &mask, n, m, cfg, emd_masked);
            outcome(observed, None, drift)
        }
    })
}

fn validate_pair(x: &[f64], y: &[f64], min_len: usize, what: &str) -> Result<()> {
    for (name, s) in [("x", x), ("y", y)] {
        if s.len() < min_len {
            return Err(Error::InvalidInput(format!(
                "{what} needs at least {min_len} observations per sample, {name} has {}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{what}: {name} contains non-finite values")));
        }
    }
    Ok(())
}

/// Kuiper two-sample test: `V = D⁺ + D⁻` with the asymptotic tail series
/// `2 Σ (4j²λ² - 1) e^{-2j²λ²}` at Stephens' corrected
/// `λ = (√Ne + 0.155 + 0.24/√Ne) V`.
pub fn kuiper(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    validate_pair(x, y, 1, "kuiper")?;
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let (d_plus, d_minus) = ecdf_extremes(&xs, &ys);
    let v = d_plus + d_minus;
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let ne = n * m / (n + m);
    let lambda = (ne.sqrt() + 0.155 + 0.24 / ne.sqrt()) * v;
    Ok((v, kuiper_tail(lambda)))
}

/// Asymptotic Kuiper tail; below λ = 0.4 the series is useless and the
/// probability is 1 to working precision.
fn kuiper_tail(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=1000 {
        let jf = j as f64;
        let a = jf * jf * lambda * lambda;
        let term = (4.0 * a - 1.0) * (-2.0 * a).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pooled midranks (average ranks, 1-based) for two individually sorted
/// samples, returned aligned to each sorted sample.
fn pooled_midranks(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let m = ys.len();
    let mut rx = vec![0.0; n];
    let mut ry = vec![0.0; m];
    let (mut i, mut j) = (0usize, 0usize);
    let mut assigned = 0usize;
    while i < n || j < m {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!("loop guard"),
        };
        let i0 = i;
        let j0 = j;
        while i < n && xs[i] == t {
            i += 1;
        }
        while j < m && ys[j] == t {
            j += 1;
        }
        let run = (i - i0) + (j - j0);
        // Average of 1-based ranks assigned..assigned+run-1.
        let midrank = assigned as f64 + (run as f64 + 1.0) / 2.0;
        for r in &mut rx[i0..i] {
            *r = midrank;
        }
        for r in &mut ry[j0..j] {
            *r = midrank;
        }
        assigned += run;
    }
    (rx, ry)
}

/// Two-sample Cramér-von Mises criterion T with its asymptotic p-value
/// (Anderson's rank form; T normalized onto the one-sample limiting
/// distribution).
pub fn cramer_von_mises(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    validate_pair(x, y, 2, "cramer-von-mises")?;
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let (rx, ry) = pooled_midranks(&xs, &ys);
    let n = xs.len() as f64;
    let m = ys.len() as f64;
    let big_n = n + m;

    let mut u = 0.0;
    for (i, r) in rx.iter().enumerate() {
        let d = r - (i + 1) as f64;
        u += n * d * d;
    }
    for (j, r) in ry.iter().enumerate() {
        let d = r - (j + 1) as f64;
        u += m * d * d;
    }

    let k = n * m;
    let t = u / (k * big_n) - (4.0 * k - 1.0) / (6.0 * big_n);

    let et = (1.0 + 1.0 / big_n) / 6.0;
    let vt = (big_n + 1.0) * (4.0 * k * big_n - 3.0 * (n * n + m * m) - 2.0 * k)
        / (45.0 * big_n * big_n * 4.0 * k);
    let tn = 1.0 / 6.0 + (t - et) / (45.0 * vt).sqrt();
    let p = if tn < 0.003 { 1.0 } else { (1.0 - cvm_limit_cdf(tn)).max(0.0) };
    Ok((t, p))
}

/// CDF of the one-sample Cramér-von Mises limiting distribution
/// (Csörgő-Faraway series).
fn cvm_limit_cdf(x: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..100 {
        let kf = k as f64;
        let u = (ln_gamma(kf + 0.5) - ln_gamma(kf + 1.0)).exp() / (PI.powf(1.5) * x.sqrt());
        let y = 4.0 * kf + 1.0;
        let q = y * y / (16.0 * x);
        let term = if q > 700.0 { 0.0 } else { u * y.sqrt() * (-q).exp() * bessel_k_quarter(q) };
        total += term;
        if term.abs() < 1e-7 {
            break;
        }
    }
    total.min(1.0)
}

/// Modified Bessel function of the second kind, order 1/4, via the integral
/// representation `K_ν(z) = ∫₀^∞ e^{-z cosh t} cosh(νt) dt` (composite
/// Simpson on a truncated range).
fn bessel_k_quarter(z: f64) -> f64 {
    if z > 700.0 {
        return 0.0;
    }
    let upper = (760.0 / z).max(2.0).acosh() + 1.0;
    let n = 4096usize;
    let h = upper / n as f64;
    let f = |t: f64| (-z * t.cosh()).exp() * (t / 4.0).cosh();
    let mut sum = f(0.0) + f(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0
}

/// Two-sample Anderson-Darling test: Scholz-Stephens midrank statistic,
/// standardized, with the p-value interpolated from their critical-value
/// table and clamped to [0.001, 0.25].
pub fn anderson_darling(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    validate_pair(x, y, 2, "anderson-darling")?;
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let mut pooled = xs.clone();
    pooled.extend_from_slice(&ys);
    pooled.sort_by(f64::total_cmp);
    let big_n = pooled.len();
    if big_n < 5 {
        return Err(Error::InvalidInput(
            "anderson-darling needs at least 5 pooled observations".into(),
        ));
    }
    let mut distinct = pooled.clone();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidInput(
            "anderson-darling needs more than one distinct observation".into(),
        ));
    }

    let nf = big_n as f64;
    let mut a2 = 0.0;
    for sample in [&xs, &ys] {
        let ni = sample.len() as f64;
        let mut inner = 0.0;
        for &z in &distinct {
            let left = pooled.partition_point(|&v| v < z);
            let right = pooled.partition_point(|&v| v <= z);
            let lj = (right - left) as f64;
            let bj = left as f64 + lj / 2.0;
            let s_right = sample.partition_point(|&v| v <= z) as f64;
            let s_left = sample.partition_point(|&v| v < z) as f64;
            let fij = s_right - s_left;
            let mij = s_right - fij / 2.0;
            let num = nf * mij - bj * ni;
            inner += lj / nf * num * num / (bj * (nf - bj) - nf * lj / 4.0);
        }
        a2 += inner / ni;
    }
    a2 *= (nf - 1.0) / nf;

    // Scholz-Stephens variance of the statistic under the null, k = 2.
    let k = 2.0f64;
    let h_cap = 1.0 / xs.len() as f64 + 1.0 / ys.len() as f64;
    let mut hs_cs = Vec::with_capacity(big_n - 2);
    let mut acc = 0.0;
    for denom in (2..=big_n - 1).rev() {
        acc += 1.0 / denom as f64;
        hs_cs.push(acc);
    }
    let h = hs_cs.last().unwrap() + 1.0;
    let g: f64 = hs_cs.iter().enumerate().map(|(idx, v)| v / (idx + 2) as f64).sum();

    let a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * h_cap;
    let b = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * h_cap - 8.0 * h
        + 4.0 * g
        - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * k * k + (4.0 * h - 4.0 * g + 6.0) * k
        + (2.0 * h - 6.0) * h_cap
        + 4.0 * h;
    let d = (2.0 * h + 6.0) * k * k - 4.0 * h * k;
    let sigma_sq = (a * nf.powi(3) + b * nf.powi(2) + c * nf + d)
        / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let standardized = (a2 - (k - 1.0)) / sigma_sq.sqrt();

    Ok((standardized, anderson_darling_p(standardized)))
}

/// Interpolates the standardized statistic against the Scholz-Stephens
/// two-sample critical values (their Table 2 at m = k - 1 = 1); quadratic fit
/// of log significance, clamped to the table's [0.001, 0.25] range.
fn anderson_darling_p(standardized: f64) -> f64 {
    const B0: [f64; 7] = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
    const B1: [f64; 7] = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
    const B2: [f64; 7] = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];
    const SIG: [f64; 7] = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
    let critical: Vec<f64> = (0..7).map(|i| B0[i] + B1[i] + B2[i]).collect();
    if standardized < critical[0] {
        return SIG[0];
    }
    if standardized > critical[6] {
        return SIG[6];
    }
    let log_sig: Vec<f64> = SIG.iter().map(|s| s.ln()).collect();
    let (c2, c1, c0) = quadratic_fit(&critical, &log_sig);
    (c2 * standardized * standardized + c1 * standardized + c0).exp()
}

/// Least-squares quadratic (highest degree first) through the given points.
fn quadratic_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut xp = 1.0;
        for sk in &mut s {
            *sk += xp;
            xp *= x;
        }
        t[0] += y;
        t[1] += y * x;
        t[2] += y * x * x;
    }
    // Normal equations for [c0, c1, c2]; solved by Cramer's rule.
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let det = det3(m);
    let col = |j: usize| {
        let mut r = m;
        for (row, &ti) in r.iter_mut().zip(&t) {
            row[j] = ti;
        }
        det3(r) / det
    };
    (col(2), col(1), col(0))
}

/// Mann-Whitney U (two-sided). Exact enumeration of all pooled assignments
/// when `n + m <= exact_limit`; otherwise the normal approximation with tie
/// and continuity corrections. Returns the first sample's U.
pub fn mann_whitney_u(x: &[f64], y: &[f64], exact_limit: usize) -> Result<(f64, f64)> {
    validate_pair(x, y, 1, "mann-whitney")?;
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let n = xs.len();
    let m = ys.len();
    let (rx, _) = pooled_midranks(&xs, &ys);
    let r_x: f64 = rx.iter().sum();
    let u_x = r_x - (n * (n + 1)) as f64 / 2.0;

    let p = if n + m <= exact_limit {
        mwu_exact_p(&xs, &ys, u_x)
    } else {
        let mean = (n * m) as f64 / 2.0;
        // Tie correction over pooled tie group sizes.
        let mut pooled = xs.clone();
        pooled.extend_from_slice(&ys);
        pooled.sort_by(f64::total_cmp);
        let big_n = (n + m) as f64;
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < pooled.len() {
            let mut j = i + 1;
            while j < pooled.len() && pooled[j] == pooled[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie_term += t * t * t - t;
            i = j;
        }
        let sigma_sq =
            (n * m) as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        if sigma_sq <= 0.0 {
            1.0
        } else {
            let z = ((u_x - mean).abs() - 0.5).max(0.0) / sigma_sq.sqrt();
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
        }
    };
    Ok((u_x, p))
}

/// Exact two-sided Mann-Whitney p: U is computed for every way of assigning
/// the pooled values to the two groups, conditioning on the observed values
/// (so ties are handled), and the smaller tail is doubled.
fn mwu_exact_p(xs: &[f64], ys: &[f64], u_obs: f64) -> f64 {
    let mut pooled = xs.to_vec();
    pooled.extend_from_slice(ys);
    let big_n = pooled.len();
    let n = xs.len();
    let (mut count_le, mut count_ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1u32 << big_n) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut u = 0.0;
        for i in 0..big_n {
            if mask & (1 << i) == 0 {
                continue;
            }
            for j in 0..big_n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                if pooled[i] > pooled[j] {
                    u += 1.0;
                } else if pooled[i] == pooled[j] {
                    u += 0.5;
                }
            }
        }
        total += 1;
        if u <= u_obs + 1e-9 {
            count_le += 1;
        }
        if u >= u_obs - 1e-9 {
            count_ge += 1;
        }
    }
    let tail = count_le.min(count_ge) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

/// Welch's unequal-variance t-test (two-sided, Welch-Satterthwaite df).
pub fn welch_t(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    validate_pair(x, y, 2, "welch-t")?;
    let n = x.len() as f64;
    let m = y.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / m;
    let vx = x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / (n - 1.0);
    let vy = y.iter().map(|v| (v - my) * (v - my)).sum::<f64>() / (m - 1.0);
    let se_sq = vx / n + vy / m;
    if se_sq == 0.0 {
        // Both samples constant: equal means are indistinguishable, unequal
        // means are maximal evidence.
        return Ok(if mx == my { (0.0, 1.0) } else { (f64::MAX.copysign(mx - my), 0.0) });
    }
    let t = (mx - my) / se_sq.sqrt();
    let df_denom = (vx / n) * (vx / n) / (n - 1.0) + (vy / m) * (vy / m) / (m - 1.0);
    let df = se_sq * se_sq / df_denom;
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidInput(format!("welch-t degrees of freedom: {e}")))?;
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok((t, p))
}

/// Chi-square homogeneity test on the PSI binning (quantile bins of `x`);
/// bins empty in both samples are dropped.
pub fn chi_square(x: &[f64], y: &[f64], num_bins: usize) -> Result<(f64, f64)> {
    validate_pair(x, y, 1, "chi-square")?;
    if num_bins < 2 {
        return Err(Error::Config(format!("num_bins must be at least 2, got {num_bins}")));
    }
    let edges = quantile_edges(x, num_bins);
    let mut counts_x = vec![0.0f64; num_bins];
    let mut counts_y = vec![0.0f64; num_bins];
    for &v in x {
        counts_x[bin_index(v, &edges)] += 1.0;
    }
    for &v in y {
        counts_y[bin_index(v, &edges)] += 1.0;
    }
    let n = x.len() as f64;
    let m = y.len() as f64;
    let total = n + m;
    let mut chi2 = 0.0;
    let mut kept = 0usize;
    for b in 0..num_bins {
        let col = counts_x[b] + counts_y[b];
        if col == 0.0 {
            continue;
        }
        kept += 1;
        let ex = col * n / total;
        let ey = col * m / total;
        chi2 += (counts_x[b] - ex) * (counts_x[b] - ex) / ex
            + (counts_y[b] - ey) * (counts_y[b] - ey) / ey;
    }
    if kept < 2 {
        return Ok((0.0, 1.0));
    }
    let df = (kept - 1) as f64;
    let dist = ChiSquared::new(df)
        .map_err(|e| Error::InvalidInput(format!("chi-square degrees of freedom: {e}")))?;
    let p = (1.0 - dist.cdf(chi2)).clamp(0.0, 1.0);
    Ok((chi2, p))
}

/// Pools two samples into one value-sorted array plus a membership mask
/// (`true` = from `x`).
fn pooled_with_mask(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<bool>, usize, usize)> {
    validate_pair(x, y, 1, "distance test")?;
    let mut tagged: Vec<(f64, bool)> = x
        .iter()
        .map(|&v| (v, true))
        .chain(y.iter().map(|&v| (v, false)))
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = tagged.iter().map(|t| t.0).collect();
    let mask: Vec<bool> = tagged.iter().map(|t| t.1).collect();
    Ok((values, mask, x.len(), y.len()))
}

/// Energy distance `2A - B - C` over a value-sorted pooled array with a group
/// mask; single pass using running cross/within sums.
fn energy_masked(values: &[f64], mask: &[bool], n: usize, m: usize) -> f64 {
    let (mut cnt_x, mut cnt_y) = (0.0f64, 0.0f64);
    let (mut sum_x, mut sum_y) = (0.0f64, 0.0f64);
    let mut cross = 0.0;
    let mut within_x = 0.0;
    let mut within_y = 0.0;
    for (&v, &is_x) in values.iter().zip(mask) {
        if is_x {
            cross += v * cnt_y - sum_y;
            within_x += v * cnt_x - sum_x;
            cnt_x += 1.0;
            sum_x += v;
        } else {
            cross += v * cnt_x - sum_x;
            within_y += v * cnt_y - sum_y;
            cnt_y += 1.0;
            sum_y += v;
        }
    }
    let nf = n as f64;
    let mf = m as f64;
    2.0 * cross / (nf * mf) - 2.0 * within_x / (nf * nf) - 2.0 * within_y / (mf * mf)
}

/// 1-D earth mover's distance (Wasserstein-1) between the two empirical
/// distributions: `∫ |F_x - F_y| dt` over the value-sorted pooled array.
fn emd_masked(values: &[f64], mask: &[bool], n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    let (mut cnt_x, mut cnt_y) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    for i in 0..values.len() {
        if mask[i] {
            cnt_x += 1.0;
        } else {
            cnt_y += 1.0;
        }
        if i + 1 < values.len() {
            total += (cnt_x / nf - cnt_y / mf).abs() * (values[i + 1] - values[i]);
        }
    }
    total
}

/// Energy distance between two samples (V-statistic form: zero iff the
/// empirical distributions coincide).
pub fn energy_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    let (values, mask, n, m) = pooled_with_mask(x, y)?;
    Ok(energy_masked(&values, &mask, n, m))
}

/// Earth mover's distance between two samples.
pub fn emd(x: &[f64], y: &[f64]) -> Result<f64> {
    let (values, mask, n, m) = pooled_with_mask(x, y)?;
    Ok(emd_masked(&values, &mask, n, m))
}

/// Observed distance statistic and its permutation-calibrated drift
/// threshold, for the two distance tests.
pub fn distance_calibration(
    test: BaselineTest,
    x: &[f64],
    y: &[f64],
    cfg: &BaselineConfig,
) -> Result<(f64, f64)> {
    let stat: fn(&[f64], &[bool], usize, usize) -> f64 = match test {
        BaselineTest::EnergyDistance => energy_masked,
        BaselineTest::Emd => emd_masked,
        other => {
            return Err(Error::InvalidInput(format!(
                "{other} has a p-value; permutation calibration only applies to distance tests"
            )));
        }
    };
    let (values, mask, n, m) = pooled_with_mask(x, y)?;
    let observed = stat(&values, &mask, n, m);
    let threshold = permutation_threshold(&values, &mask, n, m, cfg, stat);
    Ok((observed, threshold))
}

/// Seeded permutation calibration: reshuffles the group mask, recomputes the
/// statistic, and returns the configured quantile (nearest-rank) of the
/// permutation distribution as the drift threshold.
fn permutation_threshold(
    values: &[f64],
    mask: &[bool],
    n: usize,
    m: usize,
    cfg: &BaselineConfig,
    stat: fn(&[f64], &[bool], usize, usize) -> f64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.permutation_seed);
    let mut perm = mask.to_vec();
    let mut stats = Vec::with_capacity(cfg.permutations);
    for _ in 0..cfg.permutations {
        perm.shuffle(&mut rng);
        stats.push(stat(values, &perm, n, m));
    }
    stats.sort_by(f64::total_cmp);
    let rank = ((cfg.permutation_quantile * cfg.permutations as f64).ceil() as usize)
        .clamp(1, cfg.permutations);
    stats[rank - 1]
}

fn permutation_exceeds(
    observed: f64,
    values: &[f64],
    mask: &[bool],
    n: usize,
    m: usize,
    cfg: &BaselineConfig,
    stat: fn(&[f64], &[bool], usize, usize) -> f64,
) -> bool {
    observed > permutation_threshold(values, mask, n, m, cfg, stat)
}
