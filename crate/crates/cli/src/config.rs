use std::path::PathBuf;

use hilberg::codes::CodecId;
use hilberg::measures::Schedule;
use hilberg::sampling::ProcessSpec;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Serializable form of a process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessConfig {
    MixtureBernoulli,
    SantaFe { beta: f64 },
    ModifiedSantaFe { schedule: Schedule },
}

impl ProcessConfig {
    pub fn to_spec(&self) -> Result<ProcessSpec> {
        Ok(match self {
            ProcessConfig::MixtureBernoulli => ProcessSpec::MixtureBernoulli,
            ProcessConfig::SantaFe { beta } => ProcessSpec::santa_fe(*beta)?,
            ProcessConfig::ModifiedSantaFe { schedule } => ProcessSpec::modified(schedule.clone()),
        })
    }
}

/// Everything that determines a simulated or analytic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub process: ProcessConfig,
    pub k_min: u32,
    pub k_max: u32,
    pub replicates: u64,
    pub seed: u64,
    pub codec: Option<CodecId>,
    /// Series tolerance for analytic values.
    pub tol: f64,
    /// Lower bound for the harmonic-mean shift `B`.
    pub shift: f64,
    /// Fill `analytic_mi` next to simulated means.
    pub analytic: bool,
    pub out: Option<PathBuf>,
    pub samples: Option<PathBuf>,
}

pub const MAX_K: u32 = 24;

impl ExperimentConfig {
    pub fn new(process: ProcessConfig, k_min: u32, k_max: u32, replicates: u64, seed: u64) -> Self {
        ExperimentConfig {
            process,
            k_min,
            k_max,
            replicates,
            seed,
            codec: None,
            tol: hilberg::measures::DEFAULT_SERIES_TOL,
            shift: 1.0,
            analytic: false,
            out: None,
            samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.k_min && self.k_min < self.k_max && self.k_max <= MAX_K) {
            return Err(CliError::parameter(format!(
                "need 2 <= k_min < k_max <= {MAX_K}, got k_min = {}, k_max = {}",
                self.k_min, self.k_max
            )));
        }
        if self.replicates == 0 {
            return Err(CliError::parameter("replicates must be at least 1"));
        }
        if !(self.shift.is_finite() && self.shift > 0.0) {
            return Err(CliError::parameter("shift must be positive and finite"));
        }
        self.process.to_spec()?;
        Ok(())
    }

    pub fn lengths(&self) -> impl Iterator<Item = (u32, u64)> {
        (self.k_min..=self.k_max).map(|k| (k, 1u64 << k))
    }
}
