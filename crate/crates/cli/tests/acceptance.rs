//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero when any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use hilberg::codes::{kraft_check, lz78_decode, lz78_encode, lz78_length, Codec, CodecId};
use hilberg::exponents::{
    estimate_expected_exponents, estimate_random_exponents, fit_growth_models, CurveRecord, ExponentReport,
};
use hilberg::measures::{build_schedule, expected_mi, expected_mi_mixture};
use hilberg::pmi::{log_plus, pmi_exact, shared_weighted_indices};
use hilberg::sampling::{replicate_rng, ProcessSpec, WindowSampler};
use hilberg_cli::run::{analytic_curve, simulate};
use hilberg_cli::{CurveRow, ExperimentConfig, ProcessConfig, Source};
use rand_core::RngCore;
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

fn records(rows: &[CurveRow], source: Source) -> Vec<CurveRecord> {
    rows.iter().filter(|r| r.source == source).map(|r| r.record.clone()).collect()
}

fn unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Magnitude log-uniform over 2^-10..2^30, negative one time in four.
fn wide_draw(rng: &mut impl RngCore) -> f64 {
    let magnitude = (unit(rng) * 40.0 - 10.0).exp2();
    if rng.next_u32().is_multiple_of(4) {
        -magnitude
    } else {
        magnitude
    }
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Santa Fe exponent equals β: analytic slope over 2^8..2^20 within 0.03,
/// Monte Carlo δ̂± (500 replicates, k_max = 14, k0 = 10) within 0.08.
fn criterion_1(reports: &mut Vec<ExponentReport>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for beta in [0.25, 0.5, 0.75] {
        let process = ProcessConfig::SantaFe { beta };
        let analytic =
            analytic_curve(&ExperimentConfig::new(process.clone(), 8, 20, 1, 0)).map_err(|e| e.to_string())?;
        let slope = fit_growth_models(&records(&analytic, Source::Analytic)).map_err(|e| e.to_string())?.power_slope;
        let cfg = ExperimentConfig::new(process, 2, 14, 500, 1);
        let sim = simulate(&cfg).map_err(|e| e.to_string())?;
        let exact = records(&sim.rows, Source::Exact);
        let (dp, dm) = estimate_expected_exponents(&exact, Some(10)).map_err(|e| e.to_string())?;
        reports.push(ExponentReport::estimate(&exact, None, Some(10)).map_err(|e| e.to_string())?);
        let ok = (slope - beta).abs() <= 0.03 && (dp - beta).abs() <= 0.08 && (dm - beta).abs() <= 0.08;
        pass &= ok;
        detail.push(format!("beta {beta}: slope {slope:.4}, delta+ {dp:.4}, delta- {dm:.4}"));
    }
    Ok((pass, detail.join("; ")))
}

/// Santa Fe PMI equals the shared distinct-index count on 10^4 windows.
fn criterion_2() -> Outcome {
    let mut rng = replicate_rng(2, 0);
    let mut worst: f64 = 0.0;
    for i in 0..10_000u64 {
        let beta = 0.05 + 0.9 * unit(&mut rng);
        let n = 1 + (rng.next_u64() % 64) as usize;
        let spec = ProcessSpec::santa_fe(beta).map_err(|e| e.to_string())?;
        let sampler = WindowSampler::new(spec.clone()).map_err(|e| e.to_string())?;
        let window = sampler.sample(n, &mut replicate_rng(20, i)).map_err(|e| e.to_string())?;
        let pmi = pmi_exact(&window, &spec).map_err(|e| e.to_string())?.value;
        let shared = shared_weighted_indices(&window, &spec).map_err(|e| e.to_string())? as f64;
        worst = worst.max((pmi - shared).abs());
    }
    Ok((worst <= 1e-9, format!("max |pmi - shared| = {worst:.3e} over 10000 windows")))
}

/// Mixture exponents vanish: E I ≤ log₂(n+1), log model wins by 0.01 in
/// R², power slope ≤ 0.15.
fn criterion_3() -> Outcome {
    let values: Vec<(u64, f64)> = (2..=13u32)
        .into_par_iter()
        .map(|k| expected_mi_mixture(1 << k).map(|v| (1u64 << k, v)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let bounded = values.iter().all(|&(n, v)| v <= ((n + 1) as f64).log2());
    let curve: Vec<CurveRecord> = values.iter().map(|&(n, v)| CurveRecord::exact(n, v, 1.0)).collect();
    let fit = fit_growth_models(&curve).map_err(|e| e.to_string())?;
    let margin = fit.log_r2 - fit.power_r2;
    let pass = bounded && margin >= 0.01 && fit.power_slope <= 0.15;
    Ok((
        pass,
        format!(
            "bounded {bounded}, log R2 {:.4}, power R2 {:.4}, margin {margin:.4}, power slope {:.4}, log slope {:.4}",
            fit.log_r2, fit.power_r2, fit.power_slope, fit.log_slope
        ),
    ))
}

/// Simulated means within 3 standard errors of the analytic value in at
/// least 95% of rows, per process, over 20 seeds.
fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, process) in
        [("mixture", ProcessConfig::MixtureBernoulli), ("santa-fe 0.5", ProcessConfig::SantaFe { beta: 0.5 })]
    {
        let analytic =
            analytic_curve(&ExperimentConfig::new(process.clone(), 4, 12, 1, 0)).map_err(|e| e.to_string())?;
        let truth: BTreeMap<u64, f64> = analytic.iter().map(|r| (r.record.n, r.record.mean_mi)).collect();
        let (mut within, mut total) = (0, 0);
        for seed in 0..20 {
            let sim = simulate(&ExperimentConfig::new(process.clone(), 4, 12, 200, seed)).map_err(|e| e.to_string())?;
            for r in records(&sim.rows, Source::Exact) {
                let se = (r.var_mi / r.replicates as f64).sqrt();
                total += 1;
                if (r.mean_mi - truth[&r.n]).abs() <= 3.0 * se {
                    within += 1;
                }
            }
        }
        let frac = within as f64 / total as f64;
        pass &= frac >= 0.95;
        detail.push(format!("{name}: {within}/{total} = {frac:.3}"));
    }
    Ok((pass, detail.join("; ")))
}

/// Kraft sums ≤ 1 and lossless LZ78 round trips.
fn criterion_5() -> Outcome {
    let mut worst_lz: f64 = 0.0;
    for n in 1..=10 {
        worst_lz = worst_lz.max(kraft_check(&Codec::Lz78, n, 2).map_err(|e| e.to_string())?);
    }
    let mut worst_sf: f64 = 0.0;
    let sf = Codec::ShannonFano(ProcessSpec::MixtureBernoulli);
    for n in 1..=8 {
        worst_sf = worst_sf.max(kraft_check(&sf, n, 2).map_err(|e| e.to_string())?);
    }
    let mut rng = replicate_rng(5, 0);
    let mut failures = 0;
    for _ in 0..10_000 {
        let m = 2 + (rng.next_u32() % 7);
        let len = 1 + (rng.next_u32() % 300) as usize;
        let data: Vec<u32> = (0..len).map(|_| rng.next_u32() % m).collect();
        let decoded = lz78_encode(&data, m).and_then(|bits| lz78_decode(&bits, m));
        if decoded.as_deref() != Ok(data.as_slice()) {
            failures += 1;
        }
    }
    let pass = worst_lz <= 1.0 && worst_sf <= 1.0 && failures == 0;
    Ok((
        pass,
        format!("max Kraft sum lz78 {worst_lz:.6}, shannon-fano {worst_sf:.6}; round-trip failures {failures}/10000"),
    ))
}

/// LZ78 rate on IID Bernoulli(p) at n = 2^16 within 0.2 bits of H(p).
fn criterion_6() -> Outcome {
    let n = 1usize << 16;
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, p) in [0.1, 0.3, 0.5].into_iter().enumerate() {
        let mut rng = replicate_rng(6, i as u64);
        let bits: Vec<u32> = (0..n).map(|_| u32::from(unit(&mut rng) < p)).collect();
        let rate = lz78_length(&bits, 2).map_err(|e| e.to_string())?.bits as f64 / n as f64;
        let h = binary_entropy(p);
        pass &= (rate - h).abs() <= 0.2;
        detail.push(format!("p {p}: rate {rate:.4}, H {h:.4}"));
    }
    Ok((pass, detail.join("; ")))
}

/// δ̂⁺ of LZ78 code PMI ≥ δ̂⁻ of exact PMI − 0.05 on Santa Fe β = 0.5, 10
/// seeds.
fn criterion_7(reports: &mut Vec<ExponentReport>) -> Outcome {
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for seed in 0..10 {
        let mut cfg = ExperimentConfig::new(ProcessConfig::SantaFe { beta: 0.5 }, 2, 14, 50, 100 + seed);
        cfg.codec = Some(CodecId::Lz78);
        let sim = simulate(&cfg).map_err(|e| e.to_string())?;
        let code = records(&sim.rows, Source::Code(CodecId::Lz78));
        let exact = records(&sim.rows, Source::Exact);
        let (code_plus, _) = estimate_expected_exponents(&code, Some(10)).map_err(|e| e.to_string())?;
        let (_, exact_minus) = estimate_expected_exponents(&exact, Some(10)).map_err(|e| e.to_string())?;
        reports.push(ExponentReport::estimate(&code, None, Some(10)).map_err(|e| e.to_string())?);
        reports.push(ExponentReport::estimate(&exact, None, Some(10)).map_err(|e| e.to_string())?);
        let gap = code_plus - exact_minus;
        worst = worst.min(gap);
        pass &= gap >= -0.05;
    }
    Ok((pass, format!("min over seeds of delta+(lz78) - delta-(exact) = {worst:.4}")))
}

/// Modified Santa Fe schedule invariants and the block inequalities of the
/// expected-MI series.
fn criterion_8() -> Outcome {
    let beta = 0.5;
    let schedule = build_schedule(beta, 2).map_err(|e| e.to_string())?;
    let checks = schedule.check().map_err(|e| e.to_string())?;
    let mut pass = checks.iter().all(|c| c.holds());
    let spec = ProcessSpec::modified(schedule.clone());
    let mut detail = Vec::new();
    for block in schedule.blocks() {
        let at_b = expected_mi(&spec, block.b, 1e-8).map_err(|e| e.to_string())?;
        let at_c = expected_mi(&spec, block.c, 1e-8).map_err(|e| e.to_string())?;
        let upper = (block.b as f64).powf(block.eps);
        let lower = (block.c as f64).powf(beta - block.eps);
        pass &= at_b <= upper && at_c >= lower;
        detail.push(format!(
            "m {}: E I(b={}) = {at_b:.4} <= {upper:.4}, E I(c={}) = {at_c:.2} >= {lower:.2}",
            block.m, block.b, block.c
        ));
    }
    Ok((pass, format!("invariants {}; {}", checks.iter().all(|c| c.holds()), detail.join("; "))))
}

/// Synthetic ⌊n^β⌋ recovers γ̂± and δ̂± within 0.01 at k_max = 20 with the
/// default window; log⁺ is subadditive; every report satisfies its
/// orderings.
fn criterion_9(reports: &mut Vec<ExponentReport>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for beta in [0.2, 0.5, 0.8] {
        let values: BTreeMap<u64, f64> =
            (2..=20u32).map(|k| (1u64 << k, ((1u64 << k) as f64).powf(beta).floor())).collect();
        let (gp, gm) = estimate_random_exponents(&values, None).map_err(|e| e.to_string())?;
        let curve: Vec<CurveRecord> = values.iter().map(|(&n, &v)| CurveRecord::exact(n, v, 1.0)).collect();
        let (dp, dm) = estimate_expected_exponents(&curve, None).map_err(|e| e.to_string())?;
        reports.push(ExponentReport::estimate(&curve, Some(&[values]), None).map_err(|e| e.to_string())?);
        let ok = [gp, gm, dp, dm].iter().all(|v| (v - beta).abs() <= 0.01);
        pass &= ok;
        detail.push(format!("beta {beta}: gamma {gp:.4}/{gm:.4}, delta {dp:.4}/{dm:.4}"));
    }

    let mut rng = replicate_rng(9, 0);
    let mut violations = 0;
    for _ in 0..1_000_000 {
        let x = wide_draw(&mut rng);
        let y = wide_draw(&mut rng);
        if log_plus(x + y) > log_plus(x) + log_plus(y) + 1e-12 {
            violations += 1;
        }
    }
    pass &= violations == 0;
    detail.push(format!("subadditivity violations {violations}/1000000"));

    let bad = reports
        .iter()
        .filter(|r| {
            let gamma_ok = r.random.is_none_or(|g| g.gamma_plus >= g.gamma_minus);
            !(gamma_ok
                && r.delta_plus >= r.delta_minus
                && r.zeta_plus >= r.zeta_minus
                && r.delta_plus >= r.zeta_plus
                && r.delta_minus >= r.zeta_minus)
        })
        .count();
    pass &= bad == 0;
    detail.push(format!("reports violating orderings {bad}/{}", reports.len()));
    Ok((pass, detail.join("; ")))
}

fn main() {
    let mut reports = Vec::new();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok((true, d)) => ("PASS", d),
            Ok((false, d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {id} [{name}]: {status} ({detail}) [{secs:.1}s]");
    };
    report(1, "santa fe exponent", &mut || criterion_1(&mut reports));
    report(2, "santa fe pmi identity", &mut criterion_2);
    report(3, "mixture exponents vanish", &mut criterion_3);
    report(4, "monte carlo vs analytic", &mut criterion_4);
    report(5, "kraft and round trip", &mut criterion_5);
    report(6, "lz78 rate", &mut criterion_6);
    report(7, "code vs exact exponents", &mut || criterion_7(&mut reports));
    report(8, "modified santa fe gap", &mut criterion_8);
    report(9, "estimator soundness", &mut || criterion_9(&mut reports));
    println!("acceptance: {} of 9 criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
