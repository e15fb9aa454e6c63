//! Finite-sample estimators of Hilberg exponents.
//!
//! Block lengths live on the dyadic grid `n = 2^k`, which is enough to
//! recover the limits. Limits superior and inferior are replaced by the
//! maximum and minimum of the normalized sequence over a tail window
//! `k ∈ [k0, k_max]`; `k0` defaults to `⌈k_max/2⌉` and is recorded in every
//! report.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::pmi::log_plus;
use crate::{Error, Result};

/// Aggregate of pointwise MI over replicates at one block length.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveRecord {
    pub n: u64,
    pub replicates: u64,
    pub mean_mi: f64,
    pub var_mi: f64,
    /// Mean of `(I + B)^{-1}` over replicates.
    pub harmonic_mean_shifted: f64,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub b: f64,
    pub analytic_mi: Option<f64>,
}

impl CurveRecord {
    /// Aggregate raw samples. `b` must satisfy `I + b ≥ 1` for every sample.
    pub fn from_samples(n: u64, samples: &[f64], b: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("at least one replicate is required"));
        }
        if samples.iter().any(|&x| x + b < 1.0) {
            return Err(Error::Parameter("shift B too small: some sample has I + B < 1"));
        }
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0)
        } else {
            0.0
        };
        let harmonic = samples.iter().map(|x| 1.0 / (x + b)).sum::<f64>() / count;
        Ok(CurveRecord {
            n,
            replicates: samples.len() as u64,
            mean_mi: mean,
            var_mi: var,
            harmonic_mean_shifted: harmonic,
            b,
            analytic_mi: None,
        })
    }

    /// A dispersion-free record carrying an exact expected value.
    pub fn exact(n: u64, value: f64, b: f64) -> Self {
        CurveRecord {
            n,
            replicates: 1,
            mean_mi: value,
            var_mi: 0.0,
            harmonic_mean_shifted: 1.0 / (value + b),
            b,
            analytic_mi: Some(value),
        }
    }

    /// `k` with `n = 2^k`, or an error for non-dyadic lengths.
    pub fn log2_n(&self) -> Result<u32> {
        dyadic_exponent(self.n)
    }
}

fn dyadic_exponent(n: u64) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::Parameter("block lengths must be powers of two"))
    }
}

/// Normalized sequence `(k, log⁺ I(2^k) / k)`.
pub fn exponent_sequence(values: &BTreeMap<u64, f64>) -> Result<Vec<(u32, f64)>> {
    values
        .iter()
        .map(|(&n, &v)| {
            let k = dyadic_exponent(n)?;
            if k < 2 {
                return Err(Error::Parameter("dyadic grid starts at n = 4"));
            }
            Ok((k, log_plus(v) / k as f64))
        })
        .collect()
}

/// Default tail-window start `⌈k_max/2⌉`.
pub fn default_k0(k_max: u32) -> u32 {
    k_max.div_ceil(2)
}

/// Tail window `[k0, k_max]` of a normalized sequence, checked for
/// length and gaps.
fn tail_window(seq: &[(u32, f64)], k0: Option<u32>) -> Result<(u32, u32, Vec<f64>)> {
    let k_max = seq.iter().map(|&(k, _)| k).max().ok_or(Error::Parameter("empty sequence"))?;
    let k0 = k0.unwrap_or_else(|| default_k0(k_max));
    if k_max < k0 + 4 {
        return Err(Error::Parameter("tail window needs k_max >= k0 + 4"));
    }
    let mut values = Vec::new();
    for k in k0..=k_max {
        let v = seq
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map(|&(_, v)| v)
            .ok_or(Error::Parameter("sequence has a gap inside the tail window"))?;
        values.push(v);
    }
    Ok((k0, k_max, values))
}

fn max_min(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &v| (hi.max(v), lo.min(v)))
}

/// Tail-window stand-ins for limsup and liminf: `(max, min)` over
/// `k ∈ [k0, k_max]`.
pub fn estimate_limsup_liminf(seq: &[(u32, f64)], k0: Option<u32>) -> Result<(f64, f64)> {
    let (_, _, values) = tail_window(seq, k0)?;
    Ok(max_min(&values))
}

fn curve_sequence(curve: &[CurveRecord], f: impl Fn(&CurveRecord) -> Result<f64>) -> Result<Vec<(u32, f64)>> {
    curve
        .iter()
        .map(|r| {
            let k = r.log2_n()?;
            if k == 0 {
                return Err(Error::Parameter("block length 1 has log n = 0"));
            }
            Ok((k, f(r)? / k as f64))
        })
        .collect()
}

/// Upper and lower expected exponents `δ̂±` from the mean curve.
pub fn estimate_expected_exponents(curve: &[CurveRecord], k0: Option<u32>) -> Result<(f64, f64)> {
    let seq = curve_sequence(curve, |r| Ok(log_plus(r.mean_mi)))?;
    estimate_limsup_liminf(&seq, k0)
}

/// Gap parameter `ε̂ = max_k log⁺(Var/E) / k` over the tail window.
pub fn estimate_epsilon(curve: &[CurveRecord], k0: Option<u32>) -> Result<f64> {
    let seq = curve_sequence(curve, |r| Ok(r.var_mi / r.mean_mi))?;
    let (k0, k_max, _) = tail_window(&seq, k0)?;
    let mut worst = f64::NEG_INFINITY;
    for r in curve {
        let k = r.log2_n()?;
        if k < k0 || k > k_max {
            continue;
        }
        if !(r.mean_mi > 0.0) {
            return Err(Error::Parameter("gap parameter needs positive means on the tail window"));
        }
        worst = worst.max(log_plus(r.var_mi / r.mean_mi) / k as f64);
    }
    Ok(worst)
}

/// Inverse exponents `ζ̂±` from `h = E (I + B)^{-1}`.
///
/// The estimator uses `log⁺(1/h - B)`: `1/h - B` is the shifted harmonic
/// mean of `I`, which never exceeds `E I`, so `ζ̂± ≤ δ̂±` holds at every
/// finite length and not only in the limit. Removing the constant shift
/// leaves the limits unchanged.
pub fn estimate_inverse_exponents(curve: &[CurveRecord], k0: Option<u32>) -> Result<(f64, f64)> {
    let seq = curve_sequence(curve, |r| {
        if !(r.harmonic_mean_shifted > 0.0 && r.harmonic_mean_shifted <= 1.0 + 1e-12) {
            return Err(Error::Parameter("shift B too small: E(I+B)^-1 must lie in (0, 1]"));
        }
        Ok(log_plus(1.0 / r.harmonic_mean_shifted - r.b))
    })?;
    estimate_limsup_liminf(&seq, k0)
}

/// Per-realization random exponents `γ̂±` from one realization's
/// `I(2^k)` values.
pub fn estimate_random_exponents(values: &BTreeMap<u64, f64>, k0: Option<u32>) -> Result<(f64, f64)> {
    estimate_limsup_liminf(&exponent_sequence(values)?, k0)
}

/// Which growth law fits the mean curve better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GrowthModel {
    /// `I ∝ n^a`
    Power,
    /// `I ∝ log n`
    Logarithmic,
    Ambiguous,
}

/// R² margin required to prefer one model.
pub const MODEL_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitDiagnostics {
    /// Slope of `log₂ E I` on `log₂ n`.
    pub power_slope: f64,
    pub power_r2: f64,
    /// Slope of `E I` on `log₂ n`.
    pub log_slope: f64,
    pub log_r2: f64,
    pub model: GrowthModel,
}

/// Ordinary least squares `y = a + b x`; returns `(b, R²)`. A flat `y`
/// has R² = 0.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 0.0 };
    (slope, r2)
}

/// Fit power-law and logarithmic growth to the mean curve.
pub fn fit_growth_models(curve: &[CurveRecord]) -> Result<FitDiagnostics> {
    if curve.len() < 6 {
        return Err(Error::Parameter("growth fit needs at least 6 dyadic points"));
    }
    let mut x = Vec::with_capacity(curve.len());
    let mut y = Vec::with_capacity(curve.len());
    for r in curve {
        if !(r.mean_mi > 0.0) {
            return Err(Error::Parameter("growth fit needs positive means"));
        }
        x.push(f64::from(r.log2_n()?));
        y.push(r.mean_mi);
    }
    let log_y: Vec<f64> = y.iter().map(|v| libm::log2(*v)).collect();
    let (power_slope, power_r2) = least_squares(&x, &log_y);
    let (log_slope, log_r2) = least_squares(&x, &y);
    let model = if power_r2 > log_r2 + MODEL_MARGIN {
        GrowthModel::Power
    } else if log_r2 > power_r2 + MODEL_MARGIN {
        GrowthModel::Logarithmic
    } else {
        GrowthModel::Ambiguous
    };
    Ok(FitDiagnostics { power_slope, power_r2, log_slope, log_r2, model })
}

/// Summary of random exponents over many realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomExponents {
    /// Mean over realizations of the per-realization `γ̂⁺`.
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Standard deviations across realizations.
    pub gamma_plus_sd: f64,
    pub gamma_minus_sd: f64,
    pub realizations: u64,
}

impl RandomExponents {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Parameter("no realizations"));
        }
        let n = pairs.len() as f64;
        let stats = |f: fn(&(f64, f64)) -> f64| {
            let mean = pairs.iter().map(f).sum::<f64>() / n;
            let var = pairs.iter().map(|p| (f(p) - mean) * (f(p) - mean)).sum::<f64>() / n;
            (mean, libm::sqrt(var))
        };
        let (gamma_plus, gamma_plus_sd) = stats(|p| p.0);
        let (gamma_minus, gamma_minus_sd) = stats(|p| p.1);
        Ok(RandomExponents { gamma_plus, gamma_minus, gamma_plus_sd, gamma_minus_sd, realizations: pairs.len() as u64 })
    }
}

/// All exponent estimates for one curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentReport {
    /// Absent when no per-realization samples were supplied.
    #[cfg_attr(feature = "serde", serde(flatten, default, skip_serializing_if = "Option::is_none"))]
    pub random: Option<RandomExponents>,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    /// Absent when some mean on the tail window is not positive.
    pub epsilon_hat: Option<f64>,
    /// Absent when some mean is not positive.
    pub fit: Option<FitDiagnostics>,
    pub grid: (u32, u32),
    pub k0: u32,
    /// Largest shift `B` used by any record.
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub b: f64,
}

/// Slack for floating-point ties in the ordering checks.
const ORDER_SLACK: f64 = 1e-12;

impl ExponentReport {
    /// Estimate everything from a curve and, optionally, per-realization
    /// `I(2^k)` values.
    pub fn estimate(
        curve: &[CurveRecord],
        realizations: Option<&[BTreeMap<u64, f64>]>,
        k0: Option<u32>,
    ) -> Result<Self> {
        let mut curve = curve.to_vec();
        curve.sort_by_key(|r| r.n);
        let ks: Vec<u32> = curve.iter().map(CurveRecord::log2_n).collect::<Result<_>>()?;
        let (k_min, k_max) = match (ks.first(), ks.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::Parameter("empty curve")),
        };
        if ks.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("curve has duplicate block lengths"));
        }
        let k0 = k0.unwrap_or_else(|| default_k0(k_max));
        let (delta_plus, delta_minus) = estimate_expected_exponents(&curve, Some(k0))?;
        let (zeta_plus, zeta_minus) = estimate_inverse_exponents(&curve, Some(k0))?;
        let epsilon_hat = estimate_epsilon(&curve, Some(k0)).ok();
        let fit = fit_growth_models(&curve).ok();
        let random = match realizations {
            Some(rs) => {
                let pairs: Vec<(f64, f64)> =
                    rs.iter().map(|r| estimate_random_exponents(r, Some(k0))).collect::<Result<_>>()?;
                Some(RandomExponents::from_pairs(&pairs)?)
            }
            None => None,
        };
        let b = curve.iter().map(|r| r.b).fold(f64::NEG_INFINITY, f64::max);
        let report = ExponentReport {
            random,
            delta_plus,
            delta_minus,
            zeta_plus,
            zeta_minus,
            epsilon_hat,
            fit,
            grid: (k_min, k_max),
            k0,
            b,
        };
        report.check_invariants()?;
        Ok(report)
    }

    /// The orderings `γ⁺ ≥ γ⁻`, `δ⁺ ≥ δ⁻`, `ζ⁺ ≥ ζ⁻`, `δ± ≥ ζ±`.
    pub fn check_invariants(&self) -> Result<()> {
        let ge = |a: f64, b: f64| a + ORDER_SLACK >= b;
        if let Some(r) = &self.random {
            if !ge(r.gamma_plus, r.gamma_minus) {
                return Err(Error::Parameter("report violates gamma+ >= gamma-"));
            }
        }
        if !ge(self.delta_plus, self.delta_minus) {
            return Err(Error::Parameter("report violates delta+ >= delta-"));
        }
        if !ge(self.zeta_plus, self.zeta_minus) {
            return Err(Error::Parameter("report violates zeta+ >= zeta-"));
        }
        if !ge(self.delta_plus, self.zeta_plus) || !ge(self.delta_minus, self.zeta_minus) {
            return Err(Error::Parameter("report violates delta >= zeta"));
        }
        Ok(())
    }
}

/// Smallest `n` with `2n ≤ n_max` and `2G(n) - G(2n) ≥ 0`.
pub fn find_excess_witness(g: impl Fn(u64) -> f64, n_max: u64) -> Result<Option<u64>> {
    if n_max < 4 {
        return Err(Error::Parameter("witness search needs n_max >= 4"));
    }
    Ok((1..=n_max / 2).find(|&n| 2.0 * g(n) - g(2 * n) >= 0.0))
}
