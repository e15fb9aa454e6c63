//! Block schedule of index weights for the modified Santa Fe process.
//!
//! Block `m` switches weights off on `(⌊c_{m-1}^β⌋, ⌊b_m^{2β}⌋]` and on on
//! `(⌊b_m^{2β}⌋, ⌊c_m^β⌋]`. Choosing `b_m` and `c_m` far apart makes the
//! expected mutual information alternate between `≤ b_m^{ε_m}` at length
//! `b_m` and `≥ c_m^{β-ε_m}` at length `c_m`, with `ε_m = β/m`.

use alloc::vec::Vec;

use crate::sampling::Beta;
use crate::special::zeta;
use crate::{Error, Result};

/// One `(b_m, c_m, ε_m)` block.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleBlock {
    pub m: u32,
    pub b: u64,
    pub c: u64,
    pub eps: f64,
}

/// The outcome of the four block constraints for one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCheck {
    pub m: u32,
    /// `⌊c_{m-1}^β⌋ < ⌊b_m^{2β}⌋ < ⌊c_m^β⌋`
    pub ordering: bool,
    /// `ε_m = β/m`
    pub epsilon: bool,
    /// `⌊c_{m-1}^β⌋ + 1 + A²β/(2-β) ≤ b_m^{ε_m}`
    pub upper_gap: bool,
    /// `(⌊c_m^β⌋ - ⌊b_m^{2β}⌋)(1 - e^{-A}) ≥ c_m^{β-ε_m}`
    pub lower_gap: bool,
    /// The lower gap with `(1 - e^{-A})²`, which is what the expected
    /// mutual information actually dominates.
    pub lower_gap_squared: bool,
}

impl BlockCheck {
    pub fn holds(&self) -> bool {
        self.ordering && self.epsilon && self.upper_gap && self.lower_gap
    }
}

/// Thresholds `⌊c_{m-1}^β⌋`, `⌊b_m^{2β}⌋`, `⌊c_m^β⌋` of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRange {
    pub off_from: u64,
    pub on_from: u64,
    pub on_to: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "ScheduleDoc", into = "ScheduleDoc"))]
pub struct Schedule {
    beta: Beta,
    blocks: Vec<ScheduleBlock>,
    ranges: Vec<BlockRange>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct ScheduleDoc {
    beta: f64,
    blocks: Vec<ScheduleBlock>,
}

#[cfg(feature = "serde")]
impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        Schedule::from_blocks(Beta::new(doc.beta)?, doc.blocks)
    }
}

#[cfg(feature = "serde")]
impl From<Schedule> for ScheduleDoc {
    fn from(s: Schedule) -> Self {
        ScheduleDoc { beta: s.beta.get(), blocks: s.blocks }
    }
}

/// Constants of the block constraints for a given `β`.
#[derive(Debug, Clone, Copy)]
struct GapConstants {
    /// `1 + A²β/(2-β)`
    upper: f64,
    /// `1 - e^{-A}`
    lower: f64,
}

impl GapConstants {
    fn new(beta: Beta) -> Result<Self> {
        let b = beta.get();
        let a = 1.0 / zeta(beta.zipf_exponent())?.value;
        Ok(GapConstants { upper: 1.0 + a * a * b / (2.0 - b), lower: -libm::expm1(-a) })
    }
}

/// `⌊x^p⌋` for `p > 0`, corrected by one step against the inverse power.
pub(crate) fn floor_pow(x: u64, p: f64) -> u64 {
    if x == 0 {
        return 0;
    }
    if p == 1.0 {
        return x;
    }
    let xf = x as f64;
    let mut r = libm::floor(libm::pow(xf, p));
    let inv = 1.0 / p;
    if r >= 1.0 && libm::pow(r, inv) > xf {
        r -= 1.0;
    } else if libm::pow(r + 1.0, inv) <= xf {
        r += 1.0;
    }
    r as u64
}

fn pow_u(x: u64, p: f64) -> f64 {
    libm::pow(x as f64, p)
}

impl Schedule {
    /// Validates the block constraints and builds the weight lookup.
    pub fn from_blocks(beta: Beta, blocks: Vec<ScheduleBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Parameter("schedule needs at least one block"));
        }
        if blocks.iter().enumerate().any(|(i, blk)| blk.m as usize != i + 1) {
            return Err(Error::Parameter("schedule blocks must be numbered 1..=M in order"));
        }
        let schedule = Schedule::unchecked(beta, blocks);
        if schedule.check()?.iter().all(BlockCheck::holds) {
            Ok(schedule)
        } else {
            Err(Error::Parameter("schedule violates its block constraints"))
        }
    }

    fn unchecked(beta: Beta, blocks: Vec<ScheduleBlock>) -> Self {
        let b = beta.get();
        let mut prev = 0;
        let ranges = blocks
            .iter()
            .map(|blk| {
                let range =
                    BlockRange { off_from: prev, on_from: floor_pow(blk.b, 2.0 * b), on_to: floor_pow(blk.c, b) };
                prev = range.on_to;
                range
            })
            .collect();
        Schedule { beta, blocks, ranges }
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn blocks(&self) -> &[ScheduleBlock] {
        &self.blocks
    }

    pub fn ranges(&self) -> &[BlockRange] {
        &self.ranges
    }

    /// Evaluate every block constraint.
    pub fn check(&self) -> Result<Vec<BlockCheck>> {
        let consts = GapConstants::new(self.beta)?;
        let beta = self.beta.get();
        Ok(self
            .blocks
            .iter()
            .zip(&self.ranges)
            .map(|(blk, r)| {
                let expected_eps = beta / blk.m as f64;
                let on_count = r.on_to.saturating_sub(r.on_from) as f64;
                let target = pow_u(blk.c, beta - blk.eps);
                BlockCheck {
                    m: blk.m,
                    ordering: r.off_from < r.on_from && r.on_from < r.on_to,
                    epsilon: libm::fabs(blk.eps - expected_eps) <= 1e-15 * expected_eps,
                    upper_gap: r.off_from as f64 + consts.upper <= pow_u(blk.b, blk.eps),
                    lower_gap: on_count * consts.lower >= target,
                    lower_gap_squared: on_count * consts.lower * consts.lower >= target,
                }
            })
            .collect())
    }

    /// Weight `a_k`; zero past the last block.
    pub fn weight(&self, k: u64) -> bool {
        let pos = self.ranges.partition_point(|r| r.on_to < k);
        match self.ranges.get(pos) {
            Some(r) => k > r.on_from,
            None => false,
        }
    }

    /// Largest index with a nonzero weight.
    pub fn support_end(&self) -> u64 {
        self.ranges.last().map_or(0, |r| r.on_to)
    }
}

/// Smallest `x ≥ start` with `pred(x)`, by doubling then bisection.
/// `pred` must be monotone on `[start, ∞)`. `None` if no such `x` fits in
/// a `u64`.
fn smallest_satisfying(start: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    let start = start.max(1);
    if pred(start) {
        return Some(start);
    }
    let mut lo = start;
    let mut step = 1u64;
    let hi = loop {
        let candidate = lo.checked_add(step)?;
        if pred(candidate) {
            break candidate;
        }
        lo = candidate;
        step = step.checked_mul(2)?;
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Build the minimal schedule of `blocks` blocks.
///
/// For each block the smallest `b_m`, then the smallest `c_m`, are chosen.
/// `c_m` is sized with the squared factor `(1 - e^{-A})²`, so the expected
/// mutual information at `c_m` provably reaches `c_m^{β-ε_m}`; the
/// unsquared constraint then holds as well.
pub fn build_schedule(beta: f64, blocks: u32) -> Result<Schedule> {
    let beta = Beta::new(beta)?;
    if blocks == 0 {
        return Err(Error::Parameter("schedule needs at least one block"));
    }
    let consts = GapConstants::new(beta)?;
    let bt = beta.get();
    let overflow = |m: u32| Error::Resource {
        what: "schedule block exceeds the 64-bit integer range",
        limit: Some(u64::from(m - 1)),
    };
    let mut out = Vec::with_capacity(blocks as usize);
    let mut prev_on_to = 0u64;
    for m in 1..=blocks {
        let eps = bt / m as f64;
        let b_target = prev_on_to as f64 + consts.upper;
        let b = smallest_satisfying(1, |b| pow_u(b, eps) >= b_target && floor_pow(b, 2.0 * bt) > prev_on_to)
            .ok_or_else(|| overflow(m))?;
        let on_from = floor_pow(b, 2.0 * bt);
        let gap = consts.lower * consts.lower;
        // smallest c with ⌊c^β⌋ ≥ f
        let c_for = |f: u64| smallest_satisfying(1, |c| floor_pow(c, bt) >= f);
        let f = smallest_satisfying(on_from + 1, |f| match c_for(f) {
            Some(c) => (f - on_from) as f64 * gap >= pow_u(c, bt - eps),
            None => true,
        })
        .ok_or_else(|| overflow(m))?;
        let c = c_for(f).ok_or_else(|| overflow(m))?;
        prev_on_to = floor_pow(c, bt);
        out.push(ScheduleBlock { m, b, c, eps });
    }
    let schedule = Schedule::unchecked(beta, out);
    debug_assert!(schedule.check().map(|c| c.iter().all(|b| b.holds() && b.lower_gap_squared)).unwrap_or(false));
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_pow_exact_cases() {
        assert_eq!(floor_pow(25, 0.5), 5);
        assert_eq!(floor_pow(24, 0.5), 4);
        assert_eq!(floor_pow(1406, 1.0), 1406);
        assert_eq!(floor_pow(1000, 1.0 / 3.0), 10);
        assert_eq!(floor_pow(999, 1.0 / 3.0), 9);
        assert_eq!(floor_pow(0, 0.5), 0);
    }

    #[test]
    fn first_block_meets_the_b_bound() {
        // β = 0.5, c_0 = 0, ε_1 = β: b_1 ≥ ⌈(1 + A²/3)²⌉
        let s = build_schedule(0.5, 1).unwrap();
        let a = 6.0 / core::f64::consts::PI.powi(2);
        let bound = libm::ceil((1.0 + a * a / 3.0).powi(2)) as u64;
        assert_eq!(s.blocks()[0].b, bound);
        assert!(s.check().unwrap().iter().all(BlockCheck::holds));
    }

    #[test]
    fn two_blocks_are_ordered() {
        let s = build_schedule(0.5, 2).unwrap();
        let r = s.ranges();
        assert!(r[0].on_to < r[1].on_from);
        assert_eq!(r[1].off_from, r[0].on_to);
        for check in s.check().unwrap() {
            assert!(check.holds() && check.lower_gap_squared, "{check:?}");
        }
        assert_eq!(s.blocks()[1].eps, 0.25);
    }

    #[test]
    fn weights_follow_ranges() {
        let s = build_schedule(0.5, 2).unwrap();
        let r = s.ranges()[0];
        assert!(!s.weight(1));
        assert!(!s.weight(r.on_from));
        assert!(s.weight(r.on_from + 1));
        assert!(s.weight(r.on_to));
        assert!(!s.weight(r.on_to + 1));
        assert!(s.weight(s.support_end()));
        assert!(!s.weight(s.support_end() + 1));
        assert!(!s.weight(u64::MAX));
    }

    #[test]
    fn overflow_reports_feasible_depth() {
        match build_schedule(0.5, 6) {
            Err(Error::Resource { limit: Some(limit), .. }) => {
                assert!((2..6).contains(&limit));
                assert!(build_schedule(0.5, limit as u32).is_ok());
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn from_blocks_rejects_bad_blocks() {
        let good = build_schedule(0.5, 2).unwrap();
        assert!(Schedule::from_blocks(good.beta(), good.blocks().to_vec()).is_ok());
        let mut bad = good.blocks().to_vec();
        bad[0].eps = 0.4;
        assert!(Schedule::from_blocks(good.beta(), bad).is_err());
        let mut bad = good.blocks().to_vec();
        bad[1].b = 2;
        assert!(Schedule::from_blocks(good.beta(), bad).is_err());
        assert!(Schedule::from_blocks(good.beta(), Vec::new()).is_err());
    }
}
