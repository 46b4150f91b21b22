//! Workbench for Möbius-function partial sums restricted by the smallest or
//! largest prime factor.
//!
//! * [`sieve`]: prime tables, a segmented sieve producing μ, P⁻, P⁺ and ω,
//!   and divisor-function tables `d_k`.
//! * [`exact`]: rational oracles for the finite divisor-sum identities.
//! * [`primeset`]: prime sets `S` and their densities.
//! * [`sums`]: compensated moment accumulators, statistics and convergence runs.
//! * [`config`]: the experiment description shared with the CLI.

pub mod config;
pub mod error;
pub mod exact;
pub mod primeset;
pub mod sieve;
pub mod sums;

pub use config::{CheckpointSchedule, Command, ExperimentConfig, OutputFormat, SideSelection};
pub use error::{Error, Result};
pub use exact::{FSpec, Rational, Side};
pub use primeset::{DensityReport, PrimeSetSpec};
pub use sieve::{FactorRecord, FactorSegment, PrimeTable};
pub use sums::{ConvergenceTable, MomentAccumulators, StatRow};
