use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilberg::codes::CodecId;
use hilberg::measures::{build_schedule, DEFAULT_SERIES_TOL};
use hilberg_cli::io::{self, ReportDocument, Source};
use hilberg_cli::run::{self, CodeMiConfig};
use hilberg_cli::{CliError, ExperimentConfig, ProcessConfig, Result};
use serde::Serialize;

/// Hilberg exponent experiments: simulate processes, evaluate expected
/// mutual information, and estimate exponents.
#[derive(Parser)]
#[command(name = "hilberg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample windows and write a curve of pointwise MI statistics.
    Simulate(SimulateArgs),
    /// Write a curve of expected MI from the closed-form series.
    Analytic(AnalyticArgs),
    /// Estimate exponents from a curve file.
    Estimate(EstimateArgs),
    /// Code-based MI of a byte file, with an exponent report.
    CodeMi(CodeMiArgs),
    /// Build a modified Santa Fe schedule.
    Schedule(ScheduleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessKind {
    Mixture,
    SantaFe,
    ModifiedSantaFe,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, value_enum, default_value = "santa-fe")]
    process: ProcessKind,
    /// Santa Fe parameter in (0, 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Schedule JSON for the modified process.
    #[arg(long, conflicts_with = "blocks")]
    schedule: Option<PathBuf>,
    /// Build a schedule with this many blocks for the modified process.
    #[arg(long)]
    blocks: Option<u32>,
}

impl ProcessArgs {
    fn resolve(&self) -> Result<ProcessConfig> {
        let beta = || self.beta.ok_or_else(|| CliError::Parameter("--beta is required for this process".into()));
        Ok(match self.process {
            ProcessKind::Mixture => ProcessConfig::MixtureBernoulli,
            ProcessKind::SantaFe => ProcessConfig::SantaFe { beta: beta()? },
            ProcessKind::ModifiedSantaFe => {
                let schedule = match (&self.schedule, self.blocks) {
                    (Some(path), _) => io::load_schedule(path)?,
                    (None, Some(m)) => build_schedule(beta()?, m)?,
                    (None, None) => {
                        return Err(CliError::Parameter("modified-santa-fe needs --schedule or --blocks".into()))
                    }
                };
                ProcessConfig::ModifiedSantaFe { schedule }
            }
        })
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 2)]
    k_min: u32,
    #[arg(long, default_value_t = 12)]
    k_max: u32,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 100)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compute code-based MI with this codec (lz78, shannon-fano).
    #[arg(long)]
    codec: Option<CodecId>,
    #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
    tol: f64,
    /// Lower bound for the harmonic-mean shift B.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Fill the analytic_mi column.
    #[arg(long)]
    analytic: bool,
    /// Per-replicate values, needed for random exponents.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Curve CSV.
    #[arg(long)]
    curve: PathBuf,
    /// Per-replicate samples CSV from `simulate --samples`.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Rows to use when the curve mixes sources (exact, analytic, lz78, shannon-fano).
    #[arg(long)]
    source: Option<String>,
    /// First k of the tail window; defaults to ceil(k_max / 2).
    #[arg(long)]
    k0: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CodeMiArgs {
    /// Byte file to analyse.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "lz78")]
    codec: CodecId,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    k0: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curve CSV output.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Report JSON output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 2)]
    blocks: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct EstimateConfig<'a> {
    curve: &'a PathBuf,
    samples: &'a Option<PathBuf>,
    source: String,
    k0: Option<u32>,
    seed: u64,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg =
        ExperimentConfig::new(args.process.resolve()?, args.grid.k_min, args.grid.k_max, args.replicates, args.seed);
    cfg.codec = args.codec;
    cfg.tol = args.tol;
    cfg.shift = args.shift;
    cfg.analytic = args.analytic;
    cfg.out = Some(args.out.clone());
    cfg.samples = args.samples.clone();
    let sim = run::simulate(&cfg)?;
    io::save_curve(&args.out, &sim.rows)?;
    if let Some(path) = &args.samples {
        io::save_samples(path, &sim.samples)?;
    }
    Ok(())
}

fn analytic(args: AnalyticArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(args.process.resolve()?, args.grid.k_min, args.grid.k_max, 1, args.seed);
    cfg.tol = args.tol;
    cfg.shift = args.shift;
    cfg.out = Some(args.out.clone());
    io::save_curve(&args.out, &run::analytic_curve(&cfg)?)
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let rows = io::load_curve(&args.curve)?;
    let samples = args.samples.as_deref().map(io::load_samples).transpose()?;
    let source = args.source.as_deref().map(str::parse::<Source>).transpose()?;
    let (source, report) = run::estimate(&rows, source, samples.as_deref(), args.k0)?;
    let config = EstimateConfig {
        curve: &args.curve,
        samples: &args.samples,
        source: source.to_string(),
        k0: args.k0,
        seed: args.seed,
    };
    io::save_report(&args.out, &ReportDocument { report, source: source.to_string(), config })
}

fn code_mi(args: CodeMiArgs) -> Result<()> {
    let data = std::fs::read(&args.input).map_err(|source| CliError::Io { path: args.input.clone(), source })?;
    let cfg = CodeMiConfig {
        input: args.input,
        codec: args.codec,
        k_min: args.grid.k_min,
        k_max: args.grid.k_max,
        k0: args.k0,
        shift: args.shift,
        seed: args.seed,
    };
    let (rows, report) = run::code_mi(&data, &cfg)?;
    if let Some(path) = &args.curve {
        io::save_curve(path, &rows)?;
    }
    io::save_report(&args.out, &ReportDocument { report, source: cfg.codec.as_str().to_string(), config: cfg })
}

fn schedule(args: ScheduleArgs) -> Result<()> {
    io::save_schedule(&args.out, &build_schedule(args.beta, args.blocks)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analytic(a) => analytic(a),
        Command::Estimate(a) => estimate(a),
        Command::CodeMi(a) => code_mi(a),
        Command::Schedule(a) => schedule(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
