//! File formats.
//!
//! Curves are CSV with the fixed header [`CURVE_HEADER`]; an empty
//! `analytic_mi` field means no analytic value. Per-replicate samples are
//! CSV `replicate,n,source,value`. Reports and schedules are single JSON
//! documents.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use hilberg::codes::CodecId;
use hilberg::exponents::{CurveRecord, ExponentReport};
use hilberg::measures::Schedule;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const CURVE_HEADER: [&str; 8] =
    ["n", "replicates", "mean_mi", "var_mi", "harmonic_mean_shifted", "B", "analytic_mi", "source"];

pub const SAMPLES_HEADER: [&str; 4] = ["replicate", "n", "source", "value"];

/// Origin of the MI values in a curve row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Pointwise MI under the exact process measure.
    Exact,
    /// Expected MI from the closed-form series.
    Analytic,
    /// Code-based pointwise MI.
    Code(CodecId),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Exact => f.write_str("exact"),
            Source::Analytic => f.write_str("analytic"),
            Source::Code(id) => f.write_str(id.as_str()),
        }
    }
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Source::Exact),
            "analytic" => Ok(Source::Analytic),
            other => other
                .parse::<CodecId>()
                .map(Source::Code)
                .map_err(|_| CliError::parameter(format!("unknown source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub record: CurveRecord,
    pub source: Source,
}

#[derive(Serialize, Deserialize)]
struct CsvCurveRow {
    n: u64,
    replicates: u64,
    mean_mi: f64,
    var_mi: f64,
    harmonic_mean_shifted: f64,
    #[serde(rename = "B")]
    b: f64,
    analytic_mi: Option<f64>,
    source: String,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map_or(0, |p| p.record());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        kind => CliError::Parse { path: path.to_path_buf(), row, message: format!("{kind:?}") },
    }
}

pub fn write_curve<W: Write>(out: W, rows: &[CurveRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CURVE_HEADER)?;
    }
    for row in rows {
        let r = &row.record;
        w.serialize(CsvCurveRow {
            n: r.n,
            replicates: r.replicates,
            mean_mi: r.mean_mi,
            var_mi: r.var_mi,
            harmonic_mean_shifted: r.harmonic_mean_shifted,
            b: r.b,
            analytic_mi: r.analytic_mi,
            source: row.source.to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a curve. `path` only labels errors; data rows are numbered from 1.
pub fn read_curve<R: Read>(input: R, path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(CURVE_HEADER) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: format!("header must be {}", CURVE_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, raw) in reader.deserialize::<CsvCurveRow>().enumerate() {
        let row = i as u64 + 1;
        let parse = |message: String| CliError::Parse { path: path.to_path_buf(), row, message };
        let raw = raw.map_err(|e| parse(e.to_string()))?;
        if !raw.n.is_power_of_two() {
            return Err(parse(format!("n = {} is not a power of two", raw.n)));
        }
        if raw.replicates == 0 {
            return Err(parse("replicates must be positive".into()));
        }
        if !(raw.var_mi >= 0.0) {
            return Err(parse(format!("var_mi = {} is negative", raw.var_mi)));
        }
        let source = raw.source.parse().map_err(|e: CliError| parse(e.to_string()))?;
        rows.push(CurveRow {
            record: CurveRecord {
                n: raw.n,
                replicates: raw.replicates,
                mean_mi: raw.mean_mi,
                var_mi: raw.var_mi,
                harmonic_mean_shifted: raw.harmonic_mean_shifted,
                b: raw.b,
                analytic_mi: raw.analytic_mi,
            },
            source,
        });
    }
    Ok(rows)
}

pub fn save_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    write_curve(BufWriter::new(file), rows).map_err(|e| csv_error(path, e))
}

pub fn load_curve(path: &Path) -> Result<Vec<CurveRow>> {
    let file = File::open(path).map_err(io_error(path))?;
    read_curve(BufReader::new(file), path)
}

/// One pointwise MI value of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub replicate: u64,
    pub n: u64,
    pub source: Source,
    pub value: f64,
}

#[derive(Serialize, Deserialize)]
struct CsvSampleRow {
    replicate: u64,
    n: u64,
    source: String,
    value: f64,
}

pub fn save_samples(path: &Path, rows: &[SampleRow]) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut write = || -> csv::Result<()> {
        if rows.is_empty() {
            w.write_record(SAMPLES_HEADER)?;
        }
        for r in rows {
            w.serialize(CsvSampleRow { replicate: r.replicate, n: r.n, source: r.source.to_string(), value: r.value })?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| csv_error(path, e))
}

pub fn load_samples(path: &Path) -> Result<Vec<SampleRow>> {
    let file = File::open(path).map_err(io_error(path))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for (i, raw) in reader.deserialize::<CsvSampleRow>().enumerate() {
        let row = i as u64 + 1;
        let parse = |message: String| CliError::Parse { path: path.to_path_buf(), row, message };
        let raw = raw.map_err(|e| parse(e.to_string()))?;
        let source = raw.source.parse().map_err(|e: CliError| parse(e.to_string()))?;
        rows.push(SampleRow { replicate: raw.replicate, n: raw.n, source, value: raw.value });
    }
    Ok(rows)
}

/// Per-replicate `n → I(n)` maps for one source, in replicate order.
pub fn realizations(samples: &[SampleRow], source: Source) -> Vec<BTreeMap<u64, f64>> {
    let mut by_replicate: BTreeMap<u64, BTreeMap<u64, f64>> = BTreeMap::new();
    for s in samples.iter().filter(|s| s.source == source) {
        by_replicate.entry(s.replicate).or_default().insert(s.n, s.value);
    }
    by_replicate.into_values().collect()
}

/// An exponent report with the source it was estimated from and the
/// resolved configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<C> {
    #[serde(flatten)]
    pub report: ExponentReport,
    pub source: String,
    pub config: C,
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_error(path))
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_error(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        row: e.line() as u64,
        message: e.to_string(),
    })
}

pub fn save_report<C: Serialize>(path: &Path, doc: &ReportDocument<C>) -> Result<()> {
    save_json(path, doc)
}

pub fn load_report<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<ReportDocument<C>> {
    load_json(path)
}

pub fn save_schedule(path: &Path, schedule: &Schedule) -> Result<()> {
    save_json(path, schedule)
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    load_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: u64, analytic: Option<f64>, source: Source) -> CurveRow {
        CurveRow {
            record: CurveRecord {
                n,
                replicates: 3,
                mean_mi: 0.1 + 1.0 / 3.0,
                var_mi: 1e-17,
                harmonic_mean_shifted: 0.7,
                b: 1.0,
                analytic_mi: analytic,
            },
            source,
        }
    }

    #[test]
    fn curve_round_trip_is_exact() {
        let rows = vec![
            row(4, None, Source::Exact),
            row(8, Some(std::f64::consts::PI), Source::Analytic),
            row(16, None, Source::Code(CodecId::Lz78)),
        ];
        let mut buf = Vec::new();
        write_curve(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,replicates,mean_mi,var_mi,harmonic_mean_shifted,B,analytic_mi,source\n"));
        let back = read_curve(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn parse_errors_carry_row_numbers() {
        let text = "n,replicates,mean_mi,var_mi,harmonic_mean_shifted,B,analytic_mi,source\n\
                    4,1,0.5,0,0.6,1,,exact\n\
                    8,1,zzz,0,0.6,1,,exact\n";
        match read_curve(text.as_bytes(), Path::new("c.csv")) {
            Err(CliError::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        let text = "n,replicates,mean_mi,var_mi,harmonic_mean_shifted,B,analytic_mi,source\n6,1,0.5,0,0.6,1,,exact\n";
        assert!(matches!(read_curve(text.as_bytes(), Path::new("c")), Err(CliError::Parse { row: 1, .. })));
        let text = "n,mean\n4,1\n";
        assert!(matches!(read_curve(text.as_bytes(), Path::new("c")), Err(CliError::Parse { row: 0, .. })));
    }

    #[test]
    fn source_names() {
        for s in [Source::Exact, Source::Analytic, Source::Code(CodecId::Lz78), Source::Code(CodecId::ShannonFano)] {
            assert_eq!(s.to_string().parse::<Source>().unwrap(), s);
        }
        assert!("gzip".parse::<Source>().is_err());
    }
}
