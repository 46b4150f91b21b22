//! Sharded sieve → ingest → ordered merge pipeline with checkpoint snapshots.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::accumulators::{make_accumulators, MomentAccumulators};
use super::stats::{eval_statistics, StatRow};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::primeset::PrimeSetSpec;
use crate::sieve::{prime_table_for, FactorSegment, SegmentSieve};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableMeta {
    pub config: ExperimentConfig,
    pub version: String,
    pub config_hash: String,
}

/// Statistic rows at every checkpoint of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub meta: TableMeta,
    pub spec: PrimeSetSpec,
    pub rows: Vec<StatRow>,
}

/// One `(checkpoint, statistic)` line of the long-format output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRecord {
    pub x: u64,
    pub stat: &'static str,
    pub k: Option<usize>,
    pub spec: String,
    pub value: f64,
    pub target: Option<f64>,
    pub abs_error: Option<f64>,
}

pub const CSV_HEADER: &str = "x,stat,k,spec,value,target,abs_error";

impl ConvergenceTable {
    pub fn row_at(&self, x: u64) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.x == x)
    }

    /// Rows with `lo ≤ x ≤ hi`.
    pub fn rows_between(&self, lo: u64, hi: u64) -> impl Iterator<Item = &StatRow> {
        self.rows.iter().filter(move |r| (lo..=hi).contains(&r.x))
    }

    pub fn records(&self) -> Vec<StatRecord> {
        let spec = self.spec.to_string();
        let delta = self.spec.expected_density_f64();
        let mut out = Vec::new();
        for row in &self.rows {
            let mut push = |stat: &'static str, k: Option<usize>, value: f64, target: Option<f64>| {
                out.push(StatRecord {
                    x: row.x,
                    stat,
                    k,
                    spec: spec.clone(),
                    value,
                    target,
                    abs_error: target.map(|t| (value - t).abs()),
                });
            };
            push("M", None, row.m, Some(0.0));
            push("alladi_sum", None, row.alladi_sum, Some(delta));
            push("aj", None, row.aj, Some(0.0));
            push("cesaro_max", None, row.cesaro_max, Some(delta));
            push("cesaro_min", None, row.cesaro_min, None);
            for k in 1..=row.k_max() {
                let i = k - 1;
                push("L", Some(k), row.l[i], Some(0.0));
                push("L_min", Some(k), row.l_min[i], Some(0.0));
                push("L_max", Some(k), row.l_max[i], Some(0.0));
                push("logavg_max", Some(k), row.logavg_max[i], Some(delta));
                push("logavg_min", Some(k), row.logavg_min[i], None);
                push("mangoldt_stat", Some(k), row.mangoldt_stat[i], None);
                push("landau_resid", Some(k), row.landau_resid[i], Some(0.0));
                push("duality_resid", Some(k), row.duality_resid[i], Some(0.0));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in self.records() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.x,
                r.stat,
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                r.spec,
                r.value,
                opt(r.target),
                opt(r.abs_error)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "meta": self.meta,
            "rows": self.records(),
        })
    }
}

/// Half-open work units `[lo, hi)` covering `1..=n_max`, cut at segment
/// multiples and right after every checkpoint.
pub fn work_units(n_max: u64, segment_length: usize, checkpoints: &[u64]) -> Vec<(u64, u64)> {
    let end = n_max + 1;
    let mut cuts: Vec<u64> = (1..end)
        .step_by(segment_length)
        .chain(checkpoints.iter().map(|c| c + 1))
        .chain(std::iter::once(end))
        .filter(|&c| (1..=end).contains(&c))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Sieves `1..=cfg.n_max` once and accumulates statistics for each prime set.
///
/// The output depends only on the configuration: shards are fixed by
/// `segment_length` and the checkpoints, and are merged in ascending order
/// whatever the thread count.
pub fn run_convergence_multi(
    cfg: &ExperimentConfig,
    specs: &[PrimeSetSpec],
) -> Result<Vec<ConvergenceTable>> {
    cfg.validate()?;
    for s in specs {
        s.validate()?;
    }
    let checkpoints = cfg.checkpoints.points(cfg.n_max);
    let units = work_units(cfg.n_max, cfg.segment_length, &checkpoints);
    let table = prime_table_for(cfg.n_max)?;
    let k_max = cfg.k_max;

    let shard_of = |sieve: &mut (SegmentSieve, FactorSegment), &(lo, hi): &(u64, u64)| {
        let (siever, seg) = sieve;
        siever.sieve_into(lo, hi, seg)?;
        specs
            .iter()
            .map(|spec| {
                let mut acc = MomentAccumulators::shard(k_max, spec)?;
                acc.ingest_segment(seg)?;
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()
    };
    let init = || (SegmentSieve::new(&table), FactorSegment::default());

    let shards: Vec<Vec<MomentAccumulators>> = if cfg.threads == 1 {
        let mut state = init();
        units
            .iter()
            .map(|u| shard_of(&mut state, u))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| {
            units
                .par_iter()
                .map_init(init, shard_of)
                .collect::<Result<_>>()
        })?
    };

    let mut totals = specs
        .iter()
        .map(|s| make_accumulators(k_max, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Vec<StatRow>> = vec![Vec::new(); specs.len()];
    let mut next_cp = checkpoints.iter().peekable();
    for (unit, shard) in units.iter().zip(shards) {
        for (total, part) in totals.iter_mut().zip(&shard) {
            total.merge(part)?;
        }
        let last = unit.1 - 1;
        if next_cp.peek() == Some(&&last) {
            next_cp.next();
            for (r, total) in rows.iter_mut().zip(&totals) {
                r.push(eval_statistics(total, last)?);
            }
        }
    }

    Ok(specs
        .iter()
        .zip(rows)
        .map(|(spec, rows)| {
            let mut config = cfg.clone();
            config.spec = spec.clone();
            ConvergenceTable {
                meta: TableMeta {
                    config_hash: config.config_hash(),
                    config,
                    version: VERSION.to_string(),
                },
                spec: spec.clone(),
                rows,
            }
        })
        .collect())
}

/// Convergence table for `cfg.spec`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let mut tables = run_convergence_multi(cfg, std::slice::from_ref(&cfg.spec))?;
    Ok(tables.pop().expect("one spec in, one table out"))
}
