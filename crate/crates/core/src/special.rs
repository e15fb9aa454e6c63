//! Special functions: Riemann and Hurwitz zeta, log-binomials, compensated sums.

use crate::{Error, Result};

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

/// Bernoulli numbers B_2, B_4, ..., B_28.
const BERNOULLI_EVEN: [f64; 14] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
];

/// Number of Euler-Maclaurin correction terms kept; the next one bounds the error.
const EM_TERMS: usize = 12;

/// A zeta value together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub s: f64,
    pub value: f64,
    pub abs_error_bound: f64,
}

/// Riemann zeta function `ζ(s) = Σ_{k≥1} k^{-s}` for real `s > 1`.
pub fn zeta(s: f64) -> Result<ZetaValue> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain("zeta requires a finite s > 1"));
    }
    let (value, err) = hurwitz_scaled(s, 1.0);
    Ok(ZetaValue { s, value, abs_error_bound: err })
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` for `s > 1`, `q ≥ 1`.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain("hurwitz zeta requires a finite s > 1"));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain("hurwitz zeta requires a finite q >= 1"));
    }
    let (scaled, _) = hurwitz_scaled(s, q);
    Ok(scaled * libm::pow(q, -s))
}

/// `q^s ζ(s, q) = Σ_{k≥0} (q / (q + k))^s`, with an absolute error bound.
///
/// The first `N` terms are summed directly until `a = q + N` is large
/// enough for the Euler-Maclaurin tail to converge quickly; the remainder
/// of an alternating-derivative integrand is bounded by the first omitted
/// correction term. Scaling by `q^s` keeps the result representable for
/// large `s` and `q`.
pub(crate) fn hurwitz_scaled(s: f64, q: f64) -> (f64, f64) {
    let a_min = libm::fmax(20.0, 2.0 * s);
    let direct = if q >= a_min { 0 } else { libm::ceil(a_min - q) as u64 };
    let mut sum = CompensatedSum::default();
    for k in 0..direct {
        let x = q + k as f64;
        sum.add(libm::pow(q / x, s));
    }
    let a = q + direct as f64;
    let ratio_pow = libm::pow(q / a, s);
    sum.add(ratio_pow * a / (s - 1.0));
    sum.add(0.5 * ratio_pow);

    // term_j = B_2j / (2j)! * s (s+1) ... (s+2j-2) * a^{1-2j} * (q/a)^s
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut a_pow = 1.0 / a; // a^{1-2j}
    let mut omitted = 0.0;
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate().take(EM_TERMS + 1) {
        let term = b / factorial * rising * a_pow * ratio_pow;
        if j == EM_TERMS {
            omitted = libm::fabs(term);
            break;
        }
        sum.add(term);
        let m = 2.0 * j as f64 + 2.0; // current 2j
        rising *= (s + m - 1.0) * (s + m);
        factorial *= (m + 1.0) * (m + 2.0);
        a_pow /= a * a;
    }
    let value = sum.value();
    let rounding = (direct as f64 + EM_TERMS as f64 + 4.0) * f64::EPSILON * value;
    (value, omitted + rounding)
}

/// Natural logarithm of the binomial coefficient `C(n, k)` via log-gamma.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let n = n as f64;
    let k = k as f64;
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// Base-2 logarithm of `C(n, k)`.
pub fn log2_choose(n: u64, k: u64) -> f64 {
    ln_choose(n, k) / LN_2
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// Partial sum plus the integral bracket `∫_{K+1}^∞ ≤ tail ≤ ∫_K^∞`,
    /// returned as the bracket midpoint.
    fn zeta_oracle(s: f64, terms: u64) -> f64 {
        let mut sum = CompensatedSum::default();
        for k in 1..=terms {
            sum.add((k as f64).powf(-s));
        }
        let k = terms as f64;
        let lo = (k + 1.0).powf(1.0 - s) / (s - 1.0);
        let hi = k.powf(1.0 - s) / (s - 1.0);
        sum.value() + 0.5 * (lo + hi)
    }

    #[test]
    fn zeta_two_and_four() {
        let z2 = zeta(2.0).unwrap();
        assert!((z2.value - PI * PI / 6.0).abs() < 1e-14);
        assert!((z2.value - 1.644934066848).abs() < 1e-12);
        assert!(z2.abs_error_bound <= 1e-12);
        let z4 = zeta(4.0).unwrap();
        assert!((z4.value - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((z4.value - 1.082323233711).abs() < 1e-12);
    }

    #[test]
    fn zeta_matches_partial_sum_oracle() {
        for &s in &[1.5, 2.0, 3.0, 4.0 / 3.0, 4.0] {
            let oracle = zeta_oracle(s, 2_000_000);
            let got = zeta(s).unwrap();
            // oracle bracket half-width ~ K^{-s}/2
            let tol = 0.5 * 2_000_000f64.powf(-s) + 1e-11;
            assert!((got.value - oracle).abs() < tol, "s={s}: {} vs {oracle}", got.value);
            assert!(got.abs_error_bound <= 1e-12, "s={s}");
        }
    }

    #[test]
    fn zeta_near_pole() {
        let z = zeta(1.000001).unwrap();
        assert!(z.value.is_finite());
        assert!(z.value > 1e6 * (1.0 - 1e-3));
        // ζ(s) = 1/(s-1) + γ + O(s-1)
        assert!((z.value - (1e6 + 0.5772156649)).abs() < 1e-3);
    }

    #[test]
    fn zeta_rejects_pole_and_below() {
        assert!(matches!(zeta(1.0), Err(Error::Domain(_))));
        assert!(matches!(zeta(0.5), Err(Error::Domain(_))));
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn hurwitz_large_q_and_s() {
        // ζ(s, q) ~ q^{1-s}/(s-1) + q^{-s}/2
        let q = 1e12;
        let h = hurwitz_zeta(1.5, q).unwrap();
        let approx = q.powf(-0.5) / 0.5 + 0.5 * q.powf(-1.5);
        assert!((h / approx - 1.0).abs() < 1e-12);
        // ζ(2, 2) = π²/6 - 1
        let h = hurwitz_zeta(2.0, 2.0).unwrap();
        assert!((h - (PI * PI / 6.0 - 1.0)).abs() < 1e-14);
        let (scaled, _) = hurwitz_scaled(120.0, 7.0);
        // dominated by the first term, second term is (7/8)^120
        assert!((scaled - 1.0 - (7.0f64 / 8.0).powi(120)) < 1e-9 && scaled > 1.0);
    }

    #[test]
    fn log_binomials() {
        assert_eq!(log2_choose(5, 0), 0.0);
        assert!((log2_choose(4, 2) - 6f64.log2()).abs() < 1e-13);
        assert!((log2_choose(60, 30) - 118264581564861424f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
