use serde::{Deserialize, Serialize};

use super::accumulators::MomentAccumulators;
use crate::error::{Error, Result};

/// Every partial-sum statistic at one checkpoint `x`.
///
/// Vectors indexed by `k` hold `k = 1..=k_max` at positions `0..k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub x: u64,
    /// `M(x) = Σ_{n≤x} μ(n)/n`
    pub m: f64,
    /// `Σ μ(n) logᵏn/n / logᵏx`
    pub l: Vec<f64>,
    pub l_min: Vec<f64>,
    pub l_max: Vec<f64>,
    /// `−Σ_{2≤n≤x, P⁻(n)∈S} μ(n)/n`
    pub alladi_sum: f64,
    /// `Σ_{P⁻(n)∈S} μ(n) ω(n)/n`
    pub aj: f64,
    /// Share of `n ≤ x` with `P⁺(n) ∈ S`.
    pub cesaro_max: f64,
    /// Share of `n ≤ x` with `P⁻(n) ∈ S`.
    pub cesaro_min: f64,
    /// `(k−1)`th logarithmic average of `1[P⁺(n) ∈ S]`.
    pub logavg_max: Vec<f64>,
    pub logavg_min: Vec<f64>,
    /// `Σ μ(n)/n · logᵏ(x/n) / logᵏ⁻¹x`
    pub mangoldt_stat: Vec<f64>,
    /// `l[k] − m`
    pub landau_resid: Vec<f64>,
    /// `[Σ_{P⁻∈S} μ logᵏn/n − k Σ_{P⁺∈S} logᵏ⁻¹n/n + (logᵏx/x)·#{P⁺∈S}] / logᵏx`
    pub duality_resid: Vec<f64>,
}

impl StatRow {
    pub fn k_max(&self) -> usize {
        self.l.len()
    }
}

/// Statistics from the moments alone; `acc` must cover exactly `1..=x`, `x ≥ 2`.
pub fn eval_statistics(acc: &MomentAccumulators, x: u64) -> Result<StatRow> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!(
            "statistics need x >= 2, got {x}"
        )));
    }
    if acc.range() != Some((1, x)) || acc.n_processed() != x {
        return Err(Error::Contract(format!(
            "accumulators cover {:?}, statistics requested at x = {x}",
            acc.range()
        )));
    }
    let k_max = acc.k_max();
    let xf = x as f64;
    let lx = xf.ln();
    // lpow[j] = log^j x
    let lpow: Vec<f64> = (0..=k_max as i32).map(|j| lx.powi(j)).collect();
    let m = acc.mu_moment(0);
    let ks = 1..=k_max;

    let l: Vec<f64> = ks.clone().map(|k| acc.mu_moment(k) / lpow[k]).collect();
    let l_min = ks.clone().map(|k| acc.mu_min_moment(k) / lpow[k]).collect();
    let l_max = ks.clone().map(|k| acc.mu_max_moment(k) / lpow[k]).collect();
    let logavg_max = ks
        .clone()
        .map(|k| ratio(acc.fmax_moment(k - 1), acc.harm_moment(k - 1)))
        .collect();
    let logavg_min = ks
        .clone()
        .map(|k| ratio(acc.fmin_moment(k - 1), acc.harm_moment(k - 1)))
        .collect();
    let mangoldt_stat = ks
        .clone()
        .map(|k| {
            let mut total = 0.0;
            for i in 0..=k {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * binomial(k, i) * lpow[k - i] * acc.mu_moment(i);
            }
            total / lpow[k - 1]
        })
        .collect();
    let landau_resid = l.iter().map(|lk| lk - m).collect();
    let count_max = acc.count_max() as f64;
    let duality_resid = ks
        .map(|k| {
            let resid = acc.mu_min_moment(k) - k as f64 * acc.fmax_moment(k - 1)
                + lpow[k] / xf * count_max;
            resid / lpow[k]
        })
        .collect();

    Ok(StatRow {
        x,
        m,
        l,
        l_min,
        l_max,
        alladi_sum: -acc.mu_min_moment(0),
        aj: acc.aj_sum(),
        cesaro_max: count_max / xf,
        cesaro_min: acc.count_min() as f64 / xf,
        logavg_max,
        logavg_min,
        mangoldt_stat,
        landau_resid,
        duality_resid,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub(crate) fn binomial(k: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64)
}
