//! Exhaustive sweeps of the unconditional Möbius bounds and the harmonic envelope.

use serde::Serialize;

use super::compensated::Compensated;
use super::EULER_GAMMA;
use crate::error::{Error, Result};
use crate::sieve::{prime_table_for, FactorSegment, SegmentSieve, DEFAULT_SEGMENT_LENGTH};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub x: u64,
    pub bound: &'static str,
    pub value: f64,
    pub limit: f64,
}

/// Result of checking `|M(x)| ≤ 1` and `|log x · M(x) − Σ_{n≤x} μ(n) log n/n| ≤ 3 + γ`
/// at every integer `1 ≤ x ≤ x_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub x_max: u64,
    pub mertens_max_abs: f64,
    pub mertens_argmax: u64,
    /// `1 − max |M(x)|`
    pub mertens_min_slack: f64,
    pub log_gap_max_abs: f64,
    pub log_gap_argmax: u64,
    pub log_gap_limit: f64,
    /// `3 + γ − max |log x · M(x) − Σ μ(n) log n/n|`
    pub log_gap_min_slack: f64,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Streams `x = 1..=x_max` through the segmented sieve on the calling thread.
pub fn bound_sweep(x_max: u64) -> Result<BoundReport> {
    if x_max < 1 {
        return Err(Error::InvalidArgument("x_max must be >= 1".into()));
    }
    let log_gap_limit = 3.0 + EULER_GAMMA;
    let table = prime_table_for(x_max.max(2))?;
    let mut siever = SegmentSieve::new(&table);
    let mut seg = FactorSegment::default();
    let mut m = Compensated::ZERO;
    let mut m_log = Compensated::ZERO;
    let mut rep = BoundReport {
        x_max,
        mertens_max_abs: 0.0,
        mertens_argmax: 1,
        mertens_min_slack: 0.0,
        log_gap_max_abs: 0.0,
        log_gap_argmax: 1,
        log_gap_limit,
        log_gap_min_slack: 0.0,
        violations: Vec::new(),
    };
    let mut lo = 1u64;
    while lo <= x_max {
        let hi = (lo + DEFAULT_SEGMENT_LENGTH as u64).min(x_max + 1);
        siever.sieve_into(lo, hi, &mut seg)?;
        for (i, &mu) in seg.mu().iter().enumerate() {
            let x = lo + i as u64;
            let xf = x as f64;
            let lx = xf.ln();
            if mu != 0 {
                let t = mu as f64 / xf;
                m.add(t);
                m_log.add(t * lx);
            }
            let mv = m.value();
            let gap = (lx * mv - m_log.value()).abs();
            if mv.abs() > rep.mertens_max_abs {
                rep.mertens_max_abs = mv.abs();
                rep.mertens_argmax = x;
            }
            if gap > rep.log_gap_max_abs {
                rep.log_gap_max_abs = gap;
                rep.log_gap_argmax = x;
            }
            if mv.abs() > 1.0 {
                rep.violations.push(BoundViolation {
                    x,
                    bound: "mertens",
                    value: mv,
                    limit: 1.0,
                });
            }
            if gap > log_gap_limit {
                rep.violations.push(BoundViolation {
                    x,
                    bound: "log_gap",
                    value: gap,
                    limit: log_gap_limit,
                });
            }
        }
        lo = hi;
    }
    rep.mertens_min_slack = 1.0 - rep.mertens_max_abs;
    rep.log_gap_min_slack = log_gap_limit - rep.log_gap_max_abs;
    Ok(rep)
}

/// `max x·|h(x) − log x − γ|` over `x_min ≤ x ≤ x_max`, and every `x` where
/// `|h(x) − log x − γ| > 1/x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicReport {
    pub x_min: u64,
    pub x_max: u64,
    pub max_scaled_error: f64,
    pub violations: Vec<u64>,
}

pub fn harmonic_envelope_sweep(x_min: u64, x_max: u64) -> HarmonicReport {
    let mut h = Compensated::ZERO;
    let mut rep = HarmonicReport {
        x_min,
        x_max,
        max_scaled_error: 0.0,
        violations: Vec::new(),
    };
    for x in 1..=x_max {
        let xf = x as f64;
        h.add(1.0 / xf);
        if x < x_min {
            continue;
        }
        let err = (h.value() - xf.ln() - EULER_GAMMA).abs();
        rep.max_scaled_error = rep.max_scaled_error.max(err * xf);
        if err > 1.0 / xf {
            rep.violations.push(x);
        }
    }
    rep
}

/// `h(N) − log N − 1/(2N)`, whose distance from γ is about `1/(12N²)`.
pub fn gamma_extrapolation(n: u64) -> f64 {
    let h: Compensated = (1..=n).map(|k| 1.0 / k as f64).collect();
    let nf = n as f64;
    h.value() - nf.ln() - 1.0 / (2.0 * nf)
}
