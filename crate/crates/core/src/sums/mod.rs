//! Compensated streaming statistics: Möbius moment sums, their prime-set
//! restrictions, checkpointed convergence tables and exhaustive bound sweeps.

mod accumulators;
mod bounds;
mod compensated;
mod convergence;
mod stats;

pub use accumulators::{
    ingest_segment, make_accumulators, merge_accumulators, MomentAccumulators, K_MAX_LIMIT,
};
pub use bounds::{
    bound_sweep, gamma_extrapolation, harmonic_envelope_sweep, BoundReport, BoundViolation,
    HarmonicReport,
};
pub use compensated::Compensated;
pub use convergence::{
    run_convergence, run_convergence_multi, work_units, ConvergenceTable, StatRecord, TableMeta,
    CSV_HEADER, VERSION,
};
pub use stats::{eval_statistics, StatRow};

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;
