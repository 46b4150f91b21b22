//! Exhaustive identity sweeps producing machine-readable check reports.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    dirichlet_convolve, harmonic, lcm_upto, rational, ExactTables, FSpec, HyperbolaOracle,
    Rational, Side,
};
use crate::error::Result;
use crate::primeset::PrimeSetSpec;
use crate::sieve::{prime_table_for, sieve_segment};

/// Upper limits for exact sweeps; the rational denominators grow like `lcm(1..x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactCaps {
    pub duality_n_max: u64,
    pub duality_k_n_max: u64,
    pub hyperbola_x_max: u64,
    pub mertens_x_max: u64,
    pub convolution_n_max: u64,
    pub harmonic_fold_x_max: u64,
}

impl Default for ExactCaps {
    fn default() -> Self {
        ExactCaps {
            duality_n_max: 100_000,
            duality_k_n_max: 10_000,
            hyperbola_x_max: 2_000,
            mertens_x_max: 100_000,
            convolution_n_max: 10_000,
            harmonic_fold_x_max: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub at: u64,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of one identity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub identity: String,
    pub params: Value,
    pub x_max: u64,
    pub failures: Vec<CheckFailure>,
    pub status: CheckStatus,
}

impl CheckReport {
    fn new(identity: &str, params: Value, x_max: u64, failures: Vec<CheckFailure>) -> Self {
        let status = if failures.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckReport {
            identity: identity.to_string(),
            params,
            x_max,
            failures,
            status,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

fn failure(at: u64, lhs: impl ToString, rhs: impl ToString) -> CheckFailure {
    CheckFailure {
        at,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

/// `1_S` for S ∈ {all primes, p ≡ 2 (3), p ≡ 1 (4), {2, 5}}.
pub fn standard_family() -> Vec<FSpec> {
    ["all", "ap:3,2", "ap:4,1", "finite:2,5"]
        .iter()
        .map(|s| FSpec::indicator(s.parse::<PrimeSetSpec>().expect("valid literal")))
        .collect()
}

/// `Σ_{d|n} μ(d) f(P∓(d)) = −f(P±(n))` for `1 ≤ n ≤ n_max`, one report per `(f, side)`.
pub fn sweep_duality(n_max: u64, fs: &[FSpec], sides: &[Side]) -> Result<Vec<CheckReport>> {
    let tables = ExactTables::new(n_max, 0)?;
    let mut out = Vec::new();
    for f in fs {
        for &side in sides {
            let mut failures = Vec::new();
            for n in 1..=n_max {
                let (l, r) = tables.duality_sum(n, f, side)?;
                if l != r {
                    failures.push(failure(n, l, r));
                }
            }
            out.push(CheckReport::new(
                "duality",
                json!({"f": f.label(), "side": side.name()}),
                n_max,
                failures,
            ));
        }
    }
    Ok(out)
}

/// Divisor-function dualities for `1 ≤ k ≤ k_max`, `1 ≤ n ≤ n_max`.
pub fn sweep_duality_k(
    n_max: u64,
    k_max: u32,
    fs: &[FSpec],
    sides: &[Side],
) -> Result<Vec<CheckReport>> {
    let tables = ExactTables::new(n_max, k_max)?;
    let mut out = Vec::new();
    for f in fs {
        for &side in sides {
            for k in 1..=k_max {
                let mut failures = Vec::new();
                for n in 1..=n_max {
                    let (l, r) = tables.duality_sum_k(n, k, f, side)?;
                    if l != r {
                        failures.push(failure(n, l, r));
                    }
                }
                out.push(CheckReport::new(
                    "duality_k",
                    json!({"f": f.label(), "side": side.name(), "k": k}),
                    n_max,
                    failures,
                ));
            }
        }
    }
    Ok(out)
}

/// Weighted hyperbola identity at every integer `1 ≤ x ≤ x_max`.
pub fn sweep_hyperbola_duality(
    x_max: u64,
    k_max: u32,
    fs: &[FSpec],
    sides: &[Side],
) -> Result<Vec<CheckReport>> {
    let oracle = HyperbolaOracle::new(x_max, k_max)?;
    let mut out = Vec::new();
    for f in fs {
        for &side in sides {
            let w = oracle.prepare(f, side);
            for k in 1..=k_max {
                let mut failures = Vec::new();
                for x in 1..=x_max {
                    if !oracle.duality_holds(x, k, &w)? {
                        let (l, r) = oracle.duality_sides(x, k, &w)?;
                        failures.push(failure(x, l, r));
                    }
                }
                out.push(CheckReport::new(
                    "hyperbola_duality",
                    json!({"f": f.label(), "side": side.name(), "k": k}),
                    x_max,
                    failures,
                ));
            }
        }
    }
    Ok(out)
}

/// `Σ_{n≤x} μ(n)/n · D_k(⌊x/n⌋) = D_{k−1}(x)` at every integer `1 ≤ x ≤ x_max`.
pub fn sweep_hyperbola_mu(x_max: u64, k_max: u32) -> Result<Vec<CheckReport>> {
    let oracle = HyperbolaOracle::new(x_max, k_max)?;
    let mut out = Vec::new();
    for k in 1..=k_max {
        let mut failures = Vec::new();
        for x in 1..=x_max {
            if !oracle.mu_holds(x, k)? {
                let (l, r) = oracle.mu_sides(x, k)?;
                failures.push(failure(x, l, r));
            }
        }
        out.push(CheckReport::new(
            "hyperbola_mu",
            json!({"k": k}),
            x_max,
            failures,
        ));
    }
    Ok(out)
}

/// `|M(x)| ≤ 1` with `M(x)` exact, for every integer `1 ≤ x ≤ x_max`.
pub fn sweep_mertens(x_max: u64) -> Result<CheckReport> {
    let table = prime_table_for(x_max)?;
    let seg = sieve_segment(1, x_max + 1, &table)?;
    let l = lcm_upto(x_max);
    let mut num = BigInt::zero();
    let mut failures = Vec::new();
    for (n, rec) in seg.records() {
        if rec.mu != 0 {
            let t = &l / BigInt::from(n);
            if rec.mu > 0 {
                num += t;
            } else {
                num -= t;
            }
        }
        if num.abs() > l {
            failures.push(failure(n, Rational::new(num.clone(), l.clone()), "|M(x)| <= 1"));
        }
    }
    Ok(CheckReport::new(
        "mertens_bound_exact",
        json!({"bound": 1}),
        x_max,
        failures,
    ))
}

/// `harmonic(x)` against a left fold of `1/n` in rationals.
pub fn sweep_harmonic_fold(x_max: u64) -> Result<CheckReport> {
    let mut acc = Rational::zero();
    let mut failures = Vec::new();
    for x in 1..=x_max {
        acc += rational(1, x as i64);
        let h = harmonic(x);
        if h != acc {
            failures.push(failure(x, h, &acc));
        }
    }
    Ok(CheckReport::new(
        "harmonic_fold",
        json!({}),
        x_max,
        failures,
    ))
}

/// `μ ∗ d_k = d_{k−1}` on `1..=n_max` for `1 ≤ k ≤ k_max`.
pub fn sweep_mobius_inversion(n_max: u64, k_max: u32) -> Result<Vec<CheckReport>> {
    let tables = ExactTables::new(n_max, k_max)?;
    let len = n_max as usize;
    let as_rationals = |k: u32| -> Vec<Rational> {
        let t = tables.divisor_table(k).expect("tabulated");
        (1..=n_max).map(|n| rational(t.get(n) as i64, 1)).collect()
    };
    let mu: Vec<Rational> = tables
        .segment()
        .mu()
        .iter()
        .map(|&m| rational(m as i64, 1))
        .collect();
    let mut out = Vec::new();
    for k in 1..=k_max {
        let conv = dirichlet_convolve(&mu, &as_rationals(k), len)?;
        let target = as_rationals(k - 1);
        let failures = conv
            .iter()
            .zip(&target)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| failure(i as u64 + 1, a, b))
            .collect();
        out.push(CheckReport::new(
            "mobius_inversion",
            json!({"k": k}),
            n_max,
            failures,
        ));
    }
    Ok(out)
}
