//! Pointwise mutual information between adjacent blocks.

use crate::measures::{distinct_weighted, log_prob_mixture_counts, santa_fe_log_prob_parts};
use crate::sampling::{ProcessSpec, Symbol, Window};
use crate::special::log2_choose;
use crate::{Error, Result};

/// Where a pointwise MI value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PmiSource {
    ExactMeasure,
    Code(crate::codes::CodecId),
}

/// `I^P(n)` for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiSample {
    pub n: usize,
    pub value: f64,
    pub process: ProcessSpec,
    pub source: PmiSource,
}

/// `log⁺ x = log₂(x + 1)` for `x ≥ 0`, else 0.
pub fn log_plus(x: f64) -> f64 {
    if x >= 0.0 {
        libm::log2(x + 1.0)
    } else {
        0.0
    }
}

fn count_ones(symbols: &[Symbol]) -> Result<u64> {
    symbols.iter().try_fold(0u64, |acc, s| match s {
        Symbol::Bit(b) => Ok(acc + u64::from(*b)),
        Symbol::Indexed { .. } => Err(Error::Parameter("mixture measure needs bit symbols")),
    })
}

/// `I^P(n) = -log P(left) - log P(right) + log P(left, right)` under the
/// exact measure of `spec`.
///
/// For the Santa Fe kinds the index parts cancel and the value is the
/// number of weighted indices seen on both sides.
pub fn pmi_exact(window: &Window, spec: &ProcessSpec) -> Result<PmiSample> {
    let n = window.n();
    let value = match spec {
        ProcessSpec::MixtureBernoulli => {
            let t = count_ones(window.left())?;
            let s = count_ones(window.right())?;
            let nn = n as u64;
            -log_prob_mixture_counts(nn, t)? - log_prob_mixture_counts(nn, s)? + log_prob_mixture_counts(2 * nn, t + s)?
        }
        _ => {
            let joined = window.joined();
            let parts = |syms: &[Symbol]| santa_fe_log_prob_parts(spec, syms)?.ok_or(Error::ImpossibleEvent);
            let left = parts(window.left())?;
            let right = parts(window.right())?;
            let joint = parts(&joined)?;
            let index_part = joint.index_log2 - left.index_log2 - right.index_log2;
            let shared = (left.free_bits + right.free_bits - joint.free_bits) as f64;
            debug_assert_eq!(
                left.free_bits + right.free_bits - joint.free_bits,
                shared_weighted_indices(window, spec)?,
            );
            index_part + shared
        }
    };
    Ok(PmiSample { n, value, process: spec.clone(), source: PmiSource::ExactMeasure })
}

/// `|V_eff(left) ∩ V_eff(right)|` computed directly from the index sets.
pub fn shared_weighted_indices(window: &Window, spec: &ProcessSpec) -> Result<u64> {
    let left = distinct_weighted(spec, window.left())?.ok_or(Error::ImpossibleEvent)?;
    let right = distinct_weighted(spec, window.right())?.ok_or(Error::ImpossibleEvent)?;
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        match left[i].cmp(&right[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(shared)
}

/// Mixture PMI from the block sums `t` (left) and `s` (right):
/// `log₂((n+1)²/(2n+1)) + log₂(C(n,t) C(n,s) / C(2n,t+s))`.
pub fn pmi_mixture_closed_form(t: u64, s: u64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("block length must be at least 1"));
    }
    if t > n || s > n {
        return Err(Error::Parameter("block sums must lie in 0..=n"));
    }
    let nf = n as f64;
    Ok(libm::log2((nf + 1.0) * (nf + 1.0) / (2.0 * nf + 1.0)) + log2_choose(n, t) + log2_choose(n, s)
        - log2_choose(2 * n, t + s))
}
