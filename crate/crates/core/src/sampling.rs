//! Seeded samplers for two-sided windows of the three processes.

use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::measures::Schedule;
use crate::special::{hurwitz_scaled, zeta};
use crate::{Error, Result};

/// Power-law exponent parameter `β ∈ (0, 1)` of the Santa Fe processes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Beta(f64);

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Beta(beta))
        } else {
            Err(Error::Parameter("beta must lie strictly inside (0, 1)"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The Zipf exponent `1/β`.
    pub fn zipf_exponent(self) -> f64 {
        1.0 / self.0
    }
}

impl TryFrom<f64> for Beta {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Beta::new(value)
    }
}

impl From<Beta> for f64 {
    fn from(beta: Beta) -> f64 {
        beta.0
    }
}

/// Which process to sample or measure.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    /// IID bits with a bias drawn uniformly from (0, 1).
    MixtureBernoulli,
    /// Pairs `(K_i, Z_{K_i})` with Zipf(1/β) indices and fair bits.
    SantaFe { beta: Beta },
    /// Pairs `(K_i, a_K Z_{K_i})` with the 0/1 weights of a [`Schedule`].
    ModifiedSantaFe { schedule: Arc<Schedule> },
}

impl ProcessSpec {
    pub fn santa_fe(beta: f64) -> Result<Self> {
        Ok(ProcessSpec::SantaFe { beta: Beta::new(beta)? })
    }

    pub fn modified(schedule: Schedule) -> Self {
        ProcessSpec::ModifiedSantaFe { schedule: Arc::new(schedule) }
    }

    pub fn beta(&self) -> Option<Beta> {
        match self {
            ProcessSpec::MixtureBernoulli => None,
            ProcessSpec::SantaFe { beta } => Some(*beta),
            ProcessSpec::ModifiedSantaFe { schedule } => Some(schedule.beta()),
        }
    }

    /// Weight `a_k ∈ {0, 1}` of index `k`; always 1 for the original process.
    pub fn index_weight(&self, k: u64) -> bool {
        match self {
            ProcessSpec::ModifiedSantaFe { schedule } => schedule.weight(k),
            _ => true,
        }
    }

    pub fn is_santa_fe(&self) -> bool {
        !matches!(self, ProcessSpec::MixtureBernoulli)
    }
}

/// One symbol of a sampled process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Bit(bool),
    /// `index ≥ 1` together with the bit attached to that index.
    Indexed {
        index: u64,
        value: bool,
    },
}

impl Symbol {
    pub fn index(self) -> Option<u64> {
        match self {
            Symbol::Bit(_) => None,
            Symbol::Indexed { index, .. } => Some(index),
        }
    }

    pub fn value(self) -> bool {
        match self {
            Symbol::Bit(b) => b,
            Symbol::Indexed { value, .. } => value,
        }
    }
}

/// A two-sided block `X_{-n+1} .. X_n`.
///
/// `left[0]` is position `-n+1` and `left[n-1]` position 0; `right[0]` is
/// position 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    n: usize,
    left: Vec<Symbol>,
    right: Vec<Symbol>,
}

impl Window {
    pub fn new(left: Vec<Symbol>, right: Vec<Symbol>) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::Parameter("window halves must be nonempty and of equal length"));
        }
        if left.iter().chain(&right).any(|s| s.index() == Some(0)) {
            return Err(Error::Parameter("symbol indices start at 1"));
        }
        Ok(Window { n: left.len(), left, right })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn left(&self) -> &[Symbol] {
        &self.left
    }

    pub fn right(&self) -> &[Symbol] {
        &self.right
    }

    /// Both halves as one sequence `X_{-n+1} .. X_n`.
    pub fn joined(&self) -> Vec<Symbol> {
        let mut all = Vec::with_capacity(2 * self.n);
        all.extend_from_slice(&self.left);
        all.extend_from_slice(&self.right);
        all
    }

    /// The centred sub-window of half-length `m` from the same realization.
    pub fn nested(&self, m: usize) -> Result<Window> {
        if m == 0 || m > self.n {
            return Err(Error::Parameter("nested half-length must lie in 1..=n"));
        }
        Ok(Window { n: m, left: self.left[self.n - m..].to_vec(), right: self.right[..m].to_vec() })
    }

    /// True when no index appears with two different bits.
    pub fn is_consistent(&self) -> bool {
        let mut seen: HashMap<u64, bool> = HashMap::new();
        for sym in self.left.iter().chain(&self.right) {
            if let Symbol::Indexed { index, value } = *sym {
                if *seen.entry(index).or_insert(value) != value {
                    return false;
                }
            }
        }
        true
    }
}

/// RNG stream for replicate `replicate` of an experiment seeded with `seed`.
///
/// Streams are independent ChaCha8 streams under one key, so a replicate's
/// draws do not depend on which thread runs it or in what order.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Uniform draw from `(0, 1]` with 53 random bits.
pub(crate) fn uniform_open_closed<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn fair_bit<R: RngCore + ?Sized>(rng: &mut R) -> bool {
    rng.next_u64() >> 63 == 1
}

/// Size of the precomputed survival table.
const ZIPF_TABLE: usize = 4096;

/// Exact inversion sampler for `P(K = k) = k^{-1/β} / ζ(1/β)`, `k ≥ 1`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    exponent: f64,
    zeta: f64,
    /// `survival[k] = P(K > k)` for `k = 0..=ZIPF_TABLE`.
    survival: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(beta: Beta) -> Result<Self> {
        let s = beta.zipf_exponent();
        let zeta = zeta(s)?.value;
        let mut survival = alloc::vec![0.0; ZIPF_TABLE + 1];
        let tail = hurwitz_scaled(s, (ZIPF_TABLE + 1) as f64).0 * libm::pow((ZIPF_TABLE + 1) as f64, -s) / zeta;
        survival[ZIPF_TABLE] = tail;
        // accumulate from the tail upwards so small survival values keep full precision
        for k in (1..=ZIPF_TABLE).rev() {
            survival[k - 1] = survival[k] + libm::pow(k as f64, -s) / zeta;
        }
        survival[0] = 1.0;
        Ok(ZipfSampler { exponent: s, zeta, survival })
    }

    /// `P(K = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        libm::pow(k as f64, -self.exponent) / self.zeta
    }

    /// `P(K > k)`.
    pub fn survival(&self, k: u64) -> f64 {
        if (k as usize) <= ZIPF_TABLE {
            return self.survival[k as usize];
        }
        let q = k as f64 + 1.0;
        hurwitz_scaled(self.exponent, q).0 * libm::pow(q, -self.exponent) / self.zeta
    }

    /// Probability mass beyond the largest representable index.
    pub fn truncated_mass(&self) -> f64 {
        self.survival(u64::MAX - 1)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let u = uniform_open_closed(rng);
            if let Some(k) = self.invert(u) {
                return k;
            }
        }
    }

    /// Smallest `k ≥ 1` with `P(K > k) < u`; `None` past `u64::MAX - 1`.
    fn invert(&self, u: f64) -> Option<u64> {
        if u > self.survival[ZIPF_TABLE] {
            let pos = self.survival[1..].partition_point(|&s| s >= u);
            return Some(pos as u64 + 1);
        }
        let mut lo = ZIPF_TABLE as u64;
        let mut hi = lo;
        loop {
            lo = hi;
            if hi == u64::MAX - 1 {
                return None;
            }
            hi = hi.checked_mul(2).unwrap_or(u64::MAX - 1).min(u64::MAX - 1);
            if self.survival(hi) < u {
                break;
            }
        }
        // survival(lo) >= u > survival(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.survival(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

/// Draw one Zipf(1/β) index.
///
/// Builds the survival table on every call; reuse a [`ZipfSampler`] for
/// repeated draws.
pub fn sample_zipf<R: RngCore + ?Sized>(beta: f64, rng: &mut R) -> Result<u64> {
    Ok(ZipfSampler::new(Beta::new(beta)?)?.sample(rng))
}

/// Reusable window sampler for one process.
#[derive(Debug, Clone)]
pub struct WindowSampler {
    spec: ProcessSpec,
    zipf: Option<ZipfSampler>,
}

impl WindowSampler {
    pub fn new(spec: ProcessSpec) -> Result<Self> {
        let zipf = spec.beta().map(ZipfSampler::new).transpose()?;
        Ok(WindowSampler { spec, zipf })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// Sample `X_{-n+1} .. X_n`.
    ///
    /// The mixture draws its bias once per window. The Santa Fe kinds
    /// realize the bit of an index on first use and reuse it for the rest
    /// of the window.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Window> {
        if n == 0 {
            return Err(Error::Parameter("window half-length must be at least 1"));
        }
        let symbols: Vec<Symbol> = match &self.zipf {
            None => {
                let theta = uniform_open_closed(rng);
                (0..2 * n).map(|_| Symbol::Bit(uniform_open_closed(rng) <= theta)).collect()
            }
            Some(zipf) => {
                let mut bits: HashMap<u64, bool> = HashMap::new();
                (0..2 * n)
                    .map(|_| {
                        let index = zipf.sample(rng);
                        let z = *bits.entry(index).or_insert_with(|| fair_bit(rng));
                        Symbol::Indexed { index, value: z && self.spec.index_weight(index) }
                    })
                    .collect()
            }
        };
        let mut left = symbols;
        let right = left.split_off(n);
        Ok(Window { n, left, right })
    }
}

/// Sample one window of half-length `n`.
pub fn sample_window<R: RngCore + ?Sized>(spec: &ProcessSpec, n: usize, rng: &mut R) -> Result<Window> {
    WindowSampler::new(spec.clone())?.sample(n, rng)
}
