//! Experiment drivers.
//!
//! Replicate `r` always draws from stream `r` of the seed, and results are
//! gathered in replicate order, so output is identical for any thread
//! count.

use std::collections::BTreeMap;

use hilberg::codes::{code_pmi, code_pmi_raw, Codec, CodecId};
use hilberg::exponents::{CurveRecord, ExponentReport};
use hilberg::measures::expected_mi;
use hilberg::pmi::pmi_exact;
use hilberg::sampling::{replicate_rng, ProcessSpec, WindowSampler};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{realizations, CurveRow, SampleRow, Source};
use crate::{CliError, ExperimentConfig, Result};

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// Rows ordered by source, then `n`.
    pub rows: Vec<CurveRow>,
    pub samples: Vec<SampleRow>,
}

pub fn codec_for(id: CodecId, spec: &ProcessSpec) -> Codec {
    match id {
        CodecId::Lz78 => Codec::Lz78,
        CodecId::ShannonFano => Codec::ShannonFano(spec.clone()),
    }
}

/// Smallest admissible shift: the configured floor, raised so that every
/// sample has `I + B ≥ 1`.
fn shift_for(values: &[f64], floor: f64) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    floor.max(1.0 - min)
}

/// Pointwise MI of `replicates` windows at every length of the grid.
///
/// Each replicate samples one window of half-length `2^k_max`; shorter
/// lengths use its centred sub-windows, so a replicate is one realization
/// across the whole grid.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate()?;
    let spec = cfg.process.to_spec()?;
    let sampler = WindowSampler::new(spec.clone())?;
    let codec = cfg.codec.map(|id| codec_for(id, &spec));
    let lengths: Vec<(u32, u64)> = cfg.lengths().collect();
    let n_max = 1usize << cfg.k_max;

    // per replicate: (exact, code) for each length
    let per_replicate: Vec<Vec<(f64, Option<f64>)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<(f64, Option<f64>)>> {
            let window = sampler.sample(n_max, &mut replicate_rng(cfg.seed, r))?;
            lengths
                .iter()
                .map(|&(_, n)| {
                    let sub = window.nested(n as usize)?;
                    let exact = pmi_exact(&sub, &spec)?.value;
                    let code = codec.as_ref().map(|c| code_pmi(c, &sub, &spec)).transpose()?.map(|s| s.value);
                    Ok((exact, code))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let analytic: Vec<Option<f64>> = if cfg.analytic {
        lengths.par_iter().map(|&(_, n)| expected_mi(&spec, n, cfg.tol).map(Some)).collect::<Result<_, _>>()?
    } else {
        vec![None; lengths.len()]
    };

    let mut sources = vec![Source::Exact];
    if let Some(id) = cfg.codec {
        sources.push(Source::Code(id));
    }
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &source in &sources {
        for (i, &(_, n)) in lengths.iter().enumerate() {
            let values: Vec<f64> = per_replicate
                .iter()
                .map(|rep| match source {
                    Source::Exact => rep[i].0,
                    _ => rep[i].1.expect("code values present when a codec is set"),
                })
                .collect();
            let mut record = CurveRecord::from_samples(n, &values, shift_for(&values, cfg.shift))?;
            record.analytic_mi = analytic[i];
            rows.push(CurveRow { record, source });
            if cfg.samples.is_some() {
                samples.extend(values.iter().enumerate().map(|(r, &value)| SampleRow {
                    replicate: r as u64,
                    n,
                    source,
                    value,
                }));
            }
        }
    }
    if cfg.samples.is_some() {
        samples.sort_by_key(|s| (s.source, s.replicate, s.n));
    }
    Ok(Simulation { rows, samples })
}

/// Expected MI at every length of the grid.
pub fn analytic_curve(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    cfg.validate()?;
    let spec = cfg.process.to_spec()?;
    let lengths: Vec<(u32, u64)> = cfg.lengths().collect();
    let values: Vec<f64> =
        lengths.par_iter().map(|&(_, n)| expected_mi(&spec, n, cfg.tol)).collect::<Result<_, _>>()?;
    Ok(lengths
        .iter()
        .zip(values)
        .map(|(&(_, n), v)| CurveRow { record: CurveRecord::exact(n, v, cfg.shift), source: Source::Analytic })
        .collect())
}

/// Minimum number of dyadic rows for an estimate.
pub const MIN_ESTIMATE_ROWS: usize = 5;

/// Pick the rows of one source: the requested one, or the only one present.
pub fn select_source(rows: &[CurveRow], source: Option<Source>) -> Result<(Source, Vec<CurveRecord>)> {
    let source = match source {
        Some(s) => s,
        None => {
            let mut present: Vec<Source> = rows.iter().map(|r| r.source).collect();
            present.sort();
            present.dedup();
            match present.as_slice() {
                [only] => *only,
                [] => return Err(CliError::parameter("curve has no rows")),
                many => {
                    let names: Vec<String> = many.iter().map(Source::to_string).collect();
                    return Err(CliError::parameter(format!(
                        "curve mixes sources {}; choose one with --source",
                        names.join(", ")
                    )));
                }
            }
        }
    };
    let records: Vec<CurveRecord> = rows.iter().filter(|r| r.source == source).map(|r| r.record.clone()).collect();
    if records.len() < MIN_ESTIMATE_ROWS {
        return Err(CliError::parameter(format!(
            "need at least {MIN_ESTIMATE_ROWS} rows for source {source}, found {}",
            records.len()
        )));
    }
    Ok((source, records))
}

/// Exponent report for one source of a curve, with per-realization
/// exponents when samples are given.
pub fn estimate(
    rows: &[CurveRow],
    source: Option<Source>,
    samples: Option<&[SampleRow]>,
    k0: Option<u32>,
) -> Result<(Source, ExponentReport)> {
    let (source, records) = select_source(rows, source)?;
    let reals = samples.map(|s| realizations(s, source));
    if let Some(r) = &reals {
        if r.is_empty() {
            return Err(CliError::parameter(format!("samples file has no values for source {source}")));
        }
    }
    let report = ExponentReport::estimate(&records, reals.as_deref(), k0)?;
    Ok((source, report))
}

/// Settings of a [`code_mi`] run; echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeMiConfig {
    pub input: std::path::PathBuf,
    pub codec: CodecId,
    pub k_min: u32,
    pub k_max: u32,
    pub k0: Option<u32>,
    pub shift: f64,
    pub seed: u64,
}

/// Alphabet of byte files.
pub const BYTE_ALPHABET: u32 = 256;

/// LZ78 pointwise MI over non-overlapping two-sided windows of a byte
/// string, for every length of the grid.
pub fn code_mi(data: &[u8], cfg: &CodeMiConfig) -> Result<(Vec<CurveRow>, ExponentReport)> {
    if !(2 <= cfg.k_min && cfg.k_min < cfg.k_max && cfg.k_max <= crate::config::MAX_K) {
        return Err(CliError::parameter("need 2 <= k_min < k_max <= 24"));
    }
    if cfg.codec != CodecId::Lz78 {
        return Err(CliError::parameter("files are coded with lz78; shannon-fano needs a process measure"));
    }
    let required = 1u64 << (cfg.k_max + 1);
    if (data.len() as u64) < required {
        return Err(CliError::parameter(format!(
            "input has {} bytes but k_max = {} needs at least {required}",
            data.len(),
            cfg.k_max
        )));
    }
    let symbols: Vec<u32> = data.iter().map(|&b| u32::from(b)).collect();
    let mut rows = Vec::new();
    for k in cfg.k_min..=cfg.k_max {
        let n = 1usize << k;
        let values: Vec<f64> = symbols
            .par_chunks_exact(2 * n)
            .map(|w| code_pmi_raw(&w[..n], &w[n..], BYTE_ALPHABET))
            .collect::<Result<_, _>>()?;
        let record = CurveRecord::from_samples(n as u64, &values, shift_for(&values, cfg.shift))?;
        rows.push(CurveRow { record, source: Source::Code(cfg.codec) });
    }
    let records: Vec<CurveRecord> = rows.iter().map(|r| r.record.clone()).collect();
    let report = ExponentReport::estimate(&records, None, cfg.k0)?;
    Ok((rows, report))
}

/// `n → I(n)` of one simulated replicate, for tests and diagnostics.
pub fn replicate_values(samples: &[SampleRow], source: Source, replicate: u64) -> BTreeMap<u64, f64> {
    samples.iter().filter(|s| s.source == source && s.replicate == replicate).map(|s| (s.n, s.value)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProcessConfig;

    fn santa_fe(k_min: u32, k_max: u32, reps: u64) -> ExperimentConfig {
        ExperimentConfig::new(ProcessConfig::SantaFe { beta: 0.5 }, k_min, k_max, reps, 7)
    }

    #[test]
    fn simulate_shape_and_determinism() {
        let mut cfg = santa_fe(4, 8, 20);
        cfg.codec = Some(CodecId::Lz78);
        cfg.samples = Some("unused".into());
        let a = simulate(&cfg).unwrap();
        assert_eq!(a.rows.len(), 10);
        assert!(a.rows.iter().all(|r| r.record.replicates == 20));
        assert_eq!(a.samples.len(), 2 * 5 * 20);
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate(&cfg)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn simulated_exact_rows_are_integral_and_monotone() {
        let mut cfg = santa_fe(2, 10, 5);
        cfg.samples = Some("unused".into());
        let sim = simulate(&cfg).unwrap();
        for r in 0..5 {
            let values = replicate_values(&sim.samples, Source::Exact, r);
            let v: Vec<f64> = values.values().copied().collect();
            assert!(v.windows(2).all(|w| w[0] <= w[1] + 1e-9));
            assert!(v.iter().all(|x| (x - x.round()).abs() < 1e-9));
        }
    }

    #[test]
    fn mixture_shift_covers_negative_pmi() {
        let cfg = ExperimentConfig::new(ProcessConfig::MixtureBernoulli, 2, 8, 50, 3);
        let sim = simulate(&cfg).unwrap();
        for row in &sim.rows {
            assert!(row.record.b >= 1.0);
            assert!(row.record.harmonic_mean_shifted <= 1.0);
        }
    }

    #[test]
    fn analytic_rows() {
        let rows = analytic_curve(&santa_fe(2, 12, 1)).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.windows(2).all(|w| w[0].record.mean_mi <= w[1].record.mean_mi));
        let mix = ExperimentConfig::new(ProcessConfig::MixtureBernoulli, 10, 15, 1, 0);
        assert_eq!(analytic_curve(&mix).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn estimate_needs_one_source() {
        let mut cfg = santa_fe(2, 10, 10);
        cfg.codec = Some(CodecId::Lz78);
        let sim = simulate(&cfg).unwrap();
        assert!(estimate(&sim.rows, None, None, None).is_err());
        let (source, report) = estimate(&sim.rows, Some(Source::Exact), None, None).unwrap();
        assert_eq!(source, Source::Exact);
        assert_eq!(report.grid, (2, 10));
        assert!(estimate(&sim.rows[..4], Some(Source::Exact), None, None).is_err());
    }

    #[test]
    fn code_mi_checks_size() {
        let cfg = CodeMiConfig {
            input: "mem".into(),
            codec: CodecId::Lz78,
            k_min: 2,
            k_max: 8,
            k0: None,
            shift: 1.0,
            seed: 0,
        };
        let err = code_mi(&[0u8; 511], &cfg).unwrap_err();
        assert!(err.to_string().contains("512"));
        let (rows, _) = code_mi(&[7u8; 512], &cfg).unwrap();
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| r.record.mean_mi > 0.0));
    }
}
