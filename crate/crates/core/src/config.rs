//! Experiment configuration shared by the library pipeline and the CLI.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::primeset::PrimeSetSpec;
use crate::sieve::DEFAULT_SEGMENT_LENGTH;
use crate::sums::K_MAX_LIMIT;

pub const MIN_SEGMENT_LENGTH: usize = 1 << 16;
pub const MAX_SEGMENT_LENGTH: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyExact,
    VerifyBounds,
    Converge,
    Density,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyExact => "verify-exact",
            Command::VerifyBounds => "verify-bounds",
            Command::Converge => "converge",
            Command::Density => "density",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSelection {
    Min,
    Max,
    Both,
}

impl SideSelection {
    pub fn sides(self) -> Vec<crate::exact::Side> {
        use crate::exact::Side;
        match self {
            SideSelection::Min => vec![Side::Min],
            SideSelection::Max => vec![Side::Max],
            SideSelection::Both => vec![Side::Min, Side::Max],
        }
    }
}

impl FromStr for SideSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(SideSelection::Min),
            "max" => Ok(SideSelection::Max),
            "both" => Ok(SideSelection::Both),
            _ => Err(Error::validation("side", format!("expected min, max or both, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::validation("output", format!("expected csv or json, got '{s}'"))),
        }
    }
}

/// Where statistics are snapshotted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckpointSchedule {
    /// `round(10^(j / per_decade))` for `j = 0, 1, …`, deduplicated, plus `n_max`.
    Geometric { per_decade: u32 },
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule::Geometric { per_decade: 4 }
    }
}

impl CheckpointSchedule {
    /// Strictly increasing checkpoints in `2..=n_max`, always ending at `n_max`.
    pub fn points(&self, n_max: u64) -> Vec<u64> {
        let CheckpointSchedule::Geometric { per_decade } = *self;
        let q = per_decade.max(1);
        let mut out: Vec<u64> = Vec::new();
        for j in 0u32.. {
            let x = if j % q == 0 {
                10u64.checked_pow(j / q)
            } else {
                let v = 10f64.powf(j as f64 / q as f64).round();
                (v < u64::MAX as f64).then_some(v as u64)
            };
            match x {
                Some(x) if x <= n_max => {
                    if x >= 2 && out.last().map_or(true, |&last| x > last) {
                        out.push(x);
                    }
                }
                _ => break,
            }
        }
        if out.last() != Some(&n_max) && n_max >= 2 {
            out.push(n_max);
        }
        out
    }
}

impl fmt::Display for CheckpointSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let CheckpointSchedule::Geometric { per_decade } = self;
        write!(f, "geometric:{per_decade}")
    }
}

impl FromStr for CheckpointSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.strip_prefix("geometric:").ok_or_else(|| {
            Error::validation("checkpoints", format!("expected geometric:N, got '{s}'"))
        })?;
        let per_decade: u32 = body.parse().map_err(|_| {
            Error::validation("checkpoints", format!("'{body}' is not a positive integer"))
        })?;
        if per_decade == 0 || per_decade > 100 {
            return Err(Error::validation(
                "checkpoints",
                "points per decade must be in 1..=100",
            ));
        }
        Ok(CheckpointSchedule::Geometric { per_decade })
    }
}

/// A complete, validated description of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n_max: u64,
    pub k_max: usize,
    pub spec: PrimeSetSpec,
    pub side: SideSelection,
    pub segment_length: usize,
    pub checkpoints: CheckpointSchedule,
    pub output: OutputFormat,
    pub output_path: Option<PathBuf>,
    /// 0 selects the number of available cores.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            n_max: 1_000_000,
            k_max: 3,
            spec: PrimeSetSpec::All,
            side: SideSelection::Both,
            segment_length: DEFAULT_SEGMENT_LENGTH,
            checkpoints: CheckpointSchedule::default(),
            output: OutputFormat::Json,
            output_path: None,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::validation("n_max", format!("must be >= 2, got {}", self.n_max)));
        }
        if self.k_max > K_MAX_LIMIT {
            return Err(Error::validation(
                "k_max",
                format!("must be in 0..={K_MAX_LIMIT}, got {}", self.k_max),
            ));
        }
        self.spec.validate()?;
        let l = self.segment_length;
        if !l.is_power_of_two() || !(MIN_SEGMENT_LENGTH..=MAX_SEGMENT_LENGTH).contains(&l) {
            return Err(Error::validation(
                "segment_length",
                format!("must be a power of two between 2^16 and 2^24, got {l}"),
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the parameters that determine the output
    /// (thread count and output path excluded).
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 0;
        canonical.output_path = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
