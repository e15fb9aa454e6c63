//! Exact log-probabilities and expected block mutual information.

mod schedule;

pub use schedule::{build_schedule, BlockCheck, BlockRange, Schedule, ScheduleBlock};

use alloc::vec::Vec;

use crate::sampling::{Beta, ProcessSpec, Symbol};
use crate::special::{hurwitz_scaled, ln_choose, log2_choose, zeta, CompensatedSum, LN_2};
use crate::{Error, Result};

/// Largest block length accepted by [`expected_mi_mixture`].
pub const MIXTURE_EXACT_MAX_N: u64 = 1 << 14;

/// Default truncation tolerance of the Santa Fe series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-8;

/// A base-2 log-probability; `Impossible` stands for `-∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogProb {
    Finite(f64),
    Impossible,
}

impl LogProb {
    pub fn value(self) -> f64 {
        match self {
            LogProb::Finite(v) => v,
            LogProb::Impossible => f64::NEG_INFINITY,
        }
    }

    pub fn is_impossible(self) -> bool {
        matches!(self, LogProb::Impossible)
    }
}

/// `log₂ Q(x_1^n) = -log₂(n+1) - log₂ C(n, Σx)` from the count of ones.
pub fn log_prob_mixture_counts(n: u64, ones: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("mixture block must be nonempty"));
    }
    if ones > n {
        return Err(Error::Parameter("more ones than symbols"));
    }
    Ok(-libm::log2((n + 1) as f64) - log2_choose(n, ones))
}

/// Log-probability of a bit string under the uniform Bernoulli mixture.
pub fn log_prob_mixture_bernoulli(bits: &[bool]) -> Result<f64> {
    let ones = bits.iter().filter(|&&b| b).count() as u64;
    log_prob_mixture_counts(bits.len() as u64, ones)
}

/// A Santa Fe log-probability split into its index part `Σ log₂ Q(K = k_i)`
/// and the number of distinct weighted indices, each costing one bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SantaFeLogProb {
    pub index_log2: f64,
    pub free_bits: u64,
}

impl SantaFeLogProb {
    pub fn total(self) -> f64 {
        self.index_log2 - self.free_bits as f64
    }
}

/// `log₂ Q(K = k)` for the Zipf law with exponent `1/β`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZipfLog {
    exponent: f64,
    log2_zeta: f64,
}

impl ZipfLog {
    pub(crate) fn new(beta: Beta) -> Result<Self> {
        let exponent = beta.zipf_exponent();
        Ok(ZipfLog { exponent, log2_zeta: libm::log2(zeta(exponent)?.value) })
    }

    pub(crate) fn log2_pmf(&self, k: u64) -> f64 {
        -self.exponent * libm::log2(k as f64) - self.log2_zeta
    }
}

/// Distinct weighted indices of a consistent Santa Fe sequence, sorted;
/// `None` if the sequence has probability zero.
pub(crate) fn distinct_weighted(spec: &ProcessSpec, symbols: &[Symbol]) -> Result<Option<Vec<u64>>> {
    let mut pairs = Vec::with_capacity(symbols.len());
    for sym in symbols {
        match *sym {
            Symbol::Indexed { index: 0, .. } => return Err(Error::Parameter("symbol indices start at 1")),
            Symbol::Indexed { index, value } => pairs.push((index, value)),
            Symbol::Bit(_) => return Err(Error::Parameter("Santa Fe measure needs indexed symbols")),
        }
    }
    pairs.sort_unstable();
    let mut distinct = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (index, value) = pairs[i];
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].0 == index {
            if pairs[j].1 != value {
                return Ok(None);
            }
            j += 1;
        }
        if spec.index_weight(index) {
            distinct.push(index);
        } else if value {
            return Ok(None);
        }
        i = j;
    }
    Ok(Some(distinct))
}

/// Santa Fe log-probability parts; `None` for an impossible sequence.
pub fn santa_fe_log_prob_parts(spec: &ProcessSpec, symbols: &[Symbol]) -> Result<Option<SantaFeLogProb>> {
    let beta = spec.beta().ok_or(Error::Parameter("Santa Fe measure needs a Santa Fe process"))?;
    if symbols.is_empty() {
        return Err(Error::Parameter("block must be nonempty"));
    }
    let Some(distinct) = distinct_weighted(spec, symbols)? else {
        return Ok(None);
    };
    let zipf = ZipfLog::new(beta)?;
    let mut sum = CompensatedSum::default();
    sum.extend(symbols.iter().filter_map(|s| s.index()).map(|k| zipf.log2_pmf(k)));
    Ok(Some(SantaFeLogProb { index_log2: sum.value(), free_bits: distinct.len() as u64 }))
}

/// `log₂ Q(x_1^n) = Σ log₂ Q(K = k_i) - |V_eff|`.
pub fn log_prob_santa_fe(spec: &ProcessSpec, symbols: &[Symbol]) -> Result<LogProb> {
    Ok(match santa_fe_log_prob_parts(spec, symbols)? {
        Some(parts) => LogProb::Finite(parts.total()),
        None => LogProb::Impossible,
    })
}

/// Log-probability of `symbols` under `spec`.
pub fn log_prob(spec: &ProcessSpec, symbols: &[Symbol]) -> Result<LogProb> {
    match spec {
        ProcessSpec::MixtureBernoulli => {
            let mut bits = Vec::with_capacity(symbols.len());
            for s in symbols {
                match s {
                    Symbol::Bit(b) => bits.push(*b),
                    Symbol::Indexed { .. } => return Err(Error::Parameter("mixture measure needs bit symbols")),
                }
            }
            log_prob_mixture_bernoulli(&bits).map(LogProb::Finite)
        }
        _ => log_prob_santa_fe(spec, symbols),
    }
}

/// Exact `I_Q(T_n; S_n)` for the Bernoulli mixture, in bits.
///
/// The joint law of the two block sums is
/// `P(t, s) = C(n,t) C(n,s) / ((2n+1) C(2n, t+s))` and both marginals are
/// uniform on `0..=n`. Cost is `O(n²)`.
pub fn expected_mi_mixture(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("block length must be at least 1"));
    }
    if n > MIXTURE_EXACT_MAX_N {
        return Err(Error::Resource {
            what: "exact mixture MI is O(n^2); use Monte Carlo for longer blocks",
            limit: Some(MIXTURE_EXACT_MAX_N),
        });
    }
    let ln_half: Vec<f64> = (0..=n).map(|t| ln_choose(n, t)).collect();
    let ln_full: Vec<f64> = (0..=2 * n).map(|u| ln_choose(2 * n, u)).collect();
    let ln_norm = libm::log((2 * n + 1) as f64);
    let ln_uniform2 = 2.0 * libm::log((n + 1) as f64);
    let mut total = CompensatedSum::default();
    for t in 0..=n as usize {
        let mut row = 0.0;
        for s in t..=n as usize {
            let ln_p = ln_half[t] + ln_half[s] - ln_norm - ln_full[t + s];
            let term = libm::exp(ln_p) * (ln_p + ln_uniform2);
            row += if s == t { term } else { 2.0 * term };
        }
        total.add(row);
    }
    Ok(total.value() / LN_2)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 1e-12 && tol < 1e-2 {
        Ok(())
    } else {
        Err(Error::Parameter("series tolerance must lie in (1e-12, 1e-2)"))
    }
}

/// Terms `f(k) = (1 - (1 - A k^{-1/β})^n)²` of the Santa Fe series.
struct SeriesTerms {
    n: f64,
    a: f64,
    s: f64,
}

/// Ranges shorter than this are always summed term by term.
const DIRECT_RANGE: u64 = 1 << 20;
/// Expansion order cap for the tail series.
const MAX_ORDER: usize = 80;

impl SeriesTerms {
    fn new(beta: Beta, n: u64) -> Result<Self> {
        let s = beta.zipf_exponent();
        Ok(SeriesTerms { n: n as f64, a: 1.0 / zeta(s)?.value, s })
    }

    fn term(&self, k: u64) -> f64 {
        let p = self.a * libm::pow(k as f64, -self.s);
        let miss = libm::expm1(self.n * libm::log1p(-p));
        miss * miss
    }

    fn direct(&self, lo: u64, hi: u64) -> f64 {
        let mut sum = CompensatedSum::default();
        sum.extend((lo + 1..=hi).map(|k| self.term(k)));
        sum.value()
    }

    /// Smallest `k` with `n A k^{-1/β} ≤ 1/2`.
    fn expansion_start(&self) -> u64 {
        let beta = 1.0 / self.s;
        let mut k = libm::ceil(libm::pow(2.0 * self.n * self.a, beta)).max(1.0) as u64;
        while self.n * self.a * libm::pow(k as f64, -self.s) > 0.5 {
            k += 1;
        }
        k
    }

    /// `Σ_{k ∈ (lo, hi]} f(k)`; `hi = None` is an infinite range.
    fn range_sum(&self, lo: u64, hi: Option<u64>, tol: f64) -> f64 {
        let split = lo.max(self.expansion_start() - 1);
        let head_end = hi.map_or(split, |h| h.min(split));
        let head = if head_end > lo { self.direct(lo, head_end) } else { 0.0 };
        match hi {
            Some(h) if h <= split => head,
            Some(h) if h - split <= DIRECT_RANGE => head + self.direct(split, h),
            _ => head + self.expanded_tail(split + 1, hi, tol),
        }
    }

    /// Tail `Σ_{k=q}^{hi} f(k)` with `n p_q ≤ 1/2`.
    ///
    /// Expands `(1 - (1-p)^n)² = Σ_{j≥2} (-1)^j c_j p^j` with
    /// `c_j = Σ_i C(n,i) C(n,j-i)`, writes `p_k = p_q (q/k)^{1/β}` and sums
    /// each power over `k` with a scaled Hurwitz zeta. Since
    /// `C(n,i) p^i ≤ (np)^i / i!`, the terms past order `J` are bounded by
    /// `e (2 n p_q)^{J+1} / (J+1)!` times `Σ_k (q/k)^{(J+1)/β}`.
    fn expanded_tail(&self, q: u64, hi: Option<u64>, tol: f64) -> f64 {
        let qf = q as f64;
        let p_q = self.a * libm::pow(qf, -self.s);
        let x = 2.0 * self.n * p_q;
        let mut order = 2;
        let mut bound_factor = x * x / 2.0; // x^{J+1}/(J+1)! at J = 1
        loop {
            bound_factor *= x / (order as f64 + 1.0);
            let width = 1.0 + qf / ((order as f64 + 1.0) * self.s - 1.0);
            if core::f64::consts::E * bound_factor * width < 0.5 * tol || order >= MAX_ORDER {
                break;
            }
            order += 1;
        }
        // binomial terms C(n,i) p_q^i, i = 1..order
        let mut binom = alloc::vec![0.0; order + 1];
        binom[1] = self.n * p_q;
        for i in 1..order {
            binom[i + 1] = binom[i] * (self.n - i as f64).max(0.0) / (i as f64 + 1.0) * p_q;
        }
        let mut sum = CompensatedSum::default();
        for j in 2..=order {
            let c: f64 = (1..j).map(|i| binom[i] * binom[j - i]).sum();
            let power = j as f64 * self.s;
            let mut weight = hurwitz_scaled(power, qf).0;
            if let Some(h) = hi {
                let end = (h + 1) as f64;
                weight -= libm::pow(qf / end, power) * hurwitz_scaled(power, end).0;
            }
            let signed = if j % 2 == 0 { c } else { -c };
            sum.add(signed * weight);
        }
        sum.value()
    }
}

fn santa_fe_beta(spec: &ProcessSpec) -> Result<Beta> {
    spec.beta().ok_or(Error::Parameter("expected MI series needs a Santa Fe process"))
}

/// `E I^Q(n) = Σ_k a_k (1 - (1 - A k^{-1/β})^n)²`, `A = 1/ζ(1/β)`, with
/// absolute error below `2·tol`.
pub fn expected_mi_santa_fe(spec: &ProcessSpec, n: u64, tol: f64) -> Result<f64> {
    let beta = santa_fe_beta(spec)?;
    check_tol(tol)?;
    if n == 0 {
        return Err(Error::Parameter("block length must be at least 1"));
    }
    let terms = SeriesTerms::new(beta, n)?;
    Ok(match spec {
        ProcessSpec::ModifiedSantaFe { schedule } => {
            let blocks = schedule.ranges().len().max(1) as f64;
            let mut sum = CompensatedSum::default();
            for r in schedule.ranges() {
                sum.add(terms.range_sum(r.on_from, Some(r.on_to), tol / blocks));
            }
            sum.value()
        }
        _ => terms.range_sum(0, None, tol),
    })
}

/// Largest truncation point accepted by [`expected_mi_santa_fe_truncated`].
pub const TRUNCATED_MAX_TERMS: u64 = 200_000_000;

/// The same series summed term by term up to the `K` at which the bound
/// `(nA)² β/(2-β) K^{1-2/β}` on the remainder drops below `tol`.
///
/// Independent of the tail expansion in [`expected_mi_santa_fe`]; feasible
/// only while `K` stays below [`TRUNCATED_MAX_TERMS`].
pub fn expected_mi_santa_fe_truncated(spec: &ProcessSpec, n: u64, tol: f64) -> Result<f64> {
    let beta = santa_fe_beta(spec)?;
    check_tol(tol)?;
    if n == 0 {
        return Err(Error::Parameter("block length must be at least 1"));
    }
    let terms = SeriesTerms::new(beta, n)?;
    let b = beta.get();
    let na = terms.n * terms.a;
    let k = libm::ceil(libm::pow(na * na * b / ((2.0 - b) * tol), b / (2.0 - b)));
    if k > TRUNCATED_MAX_TERMS as f64 {
        return Err(Error::Resource {
            what: "truncated series needs too many terms",
            limit: Some(TRUNCATED_MAX_TERMS),
        });
    }
    let k = k as u64;
    let mut sum = CompensatedSum::default();
    sum.extend((1..=k).filter(|&i| spec.index_weight(i)).map(|i| terms.term(i)));
    Ok(sum.value())
}

/// Expected block mutual information of any supported process.
pub fn expected_mi(spec: &ProcessSpec, n: u64, tol: f64) -> Result<f64> {
    match spec {
        ProcessSpec::MixtureBernoulli => expected_mi_mixture(n),
        _ => expected_mi_santa_fe(spec, n, tol),
    }
}
