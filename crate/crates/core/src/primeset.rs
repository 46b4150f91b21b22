//! Prime sets `S`: all primes, one residue class, or a finite list.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::sieve::{factor_record, PrimeTable};

/// A set of primes with a known natural density.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimeSetSpec {
    All,
    /// Primes `p ≡ residue (mod modulus)`, residue kept in `1..=modulus`.
    Ap { modulus: u64, residue: u64 },
    /// Sorted, deduplicated primes.
    Finite { primes: Vec<u64> },
}

impl PrimeSetSpec {
    /// Residue class spec with the residue canonicalised into `1..=modulus`.
    pub fn ap(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::validation("modulus", "modulus must be at least 1"));
        }
        let r = residue % modulus;
        let spec = PrimeSetSpec::Ap {
            modulus,
            residue: if r == 0 { modulus } else { r },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite(primes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut primes: Vec<u64> = primes.into_iter().collect();
        primes.sort_unstable();
        primes.dedup();
        let spec = PrimeSetSpec::Finite { primes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PrimeSetSpec::All => Ok(()),
            PrimeSetSpec::Ap { modulus, residue } => {
                if *modulus == 0 {
                    return Err(Error::validation("modulus", "modulus must be at least 1"));
                }
                if !(1..=*modulus).contains(residue) {
                    return Err(Error::validation(
                        "residue",
                        format!("residue {residue} outside 1..={modulus}"),
                    ));
                }
                if residue.gcd(modulus) != 1 {
                    return Err(Error::validation(
                        "residue",
                        format!("gcd(residue,modulus) must be 1 (got gcd({residue},{modulus}) = {})", residue.gcd(modulus)),
                    ));
                }
                Ok(())
            }
            PrimeSetSpec::Finite { primes } => {
                if let Some(&bad) = primes.iter().find(|&&p| !is_prime(p)) {
                    return Err(Error::validation(
                        "primes",
                        format!("{bad} is not prime"),
                    ));
                }
                if primes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::validation(
                        "primes",
                        "list must be strictly increasing",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Membership of the prime `p`. Values below 2 are never members.
    #[inline]
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSetSpec::All => p >= 2,
            PrimeSetSpec::Ap { modulus, residue } => p >= 2 && (p % modulus == residue % modulus),
            PrimeSetSpec::Finite { primes } => primes.binary_search(&p).is_ok(),
        }
    }

    /// Natural density of `S` among the primes: 1, 1/φ(k) or 0.
    pub fn expected_density(&self) -> Rational {
        match self {
            PrimeSetSpec::All => Rational::one(),
            PrimeSetSpec::Ap { modulus, .. } => {
                Rational::new(BigInt::one(), BigInt::from(euler_phi(*modulus)))
            }
            PrimeSetSpec::Finite { .. } => Rational::zero(),
        }
    }

    pub fn expected_density_f64(&self) -> f64 {
        match self {
            PrimeSetSpec::All => 1.0,
            PrimeSetSpec::Ap { modulus, .. } => 1.0 / euler_phi(*modulus) as f64,
            PrimeSetSpec::Finite { .. } => 0.0,
        }
    }

    /// Builds a membership test specialised for the hot loop.
    pub fn matcher(&self) -> PrimeMatcher {
        PrimeMatcher::new(self)
    }
}

/// Precomputed membership test: a table for small primes and a
/// multiply-shift remainder for residue classes, so the hot loop avoids
/// 64-bit division.
#[derive(Debug, Clone)]
pub struct PrimeMatcher {
    spec: PrimeSetSpec,
    small: Vec<bool>,
    // (⌈2⁶⁴/d⌉, d, residue mod d) for moduli below 2³²
    ap: Option<(u64, u32, u32)>,
}

const MATCHER_SMALL: u64 = 1 << 16;

impl PrimeMatcher {
    fn new(spec: &PrimeSetSpec) -> Self {
        let small = (0..MATCHER_SMALL).map(|p| spec.contains(p)).collect();
        let ap = match *spec {
            PrimeSetSpec::Ap { modulus, residue } if modulus <= u32::MAX as u64 => {
                let d = modulus as u32;
                Some(((u64::MAX / modulus).wrapping_add(1), d, (residue % modulus) as u32))
            }
            _ => None,
        };
        PrimeMatcher {
            spec: spec.clone(),
            small,
            ap,
        }
    }

    #[inline]
    pub fn contains(&self, p: u64) -> bool {
        if p < MATCHER_SMALL {
            return self.small[p as usize];
        }
        match self.ap {
            Some((m, d, r)) if p <= u32::MAX as u64 => {
                let low = m.wrapping_mul(p);
                ((low as u128 * d as u128) >> 64) as u32 == r
            }
            _ => self.spec.contains(p),
        }
    }
}

impl fmt::Display for PrimeSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeSetSpec::All => write!(f, "all"),
            PrimeSetSpec::Ap { modulus, residue } => write!(f, "ap:{modulus},{residue}"),
            PrimeSetSpec::Finite { primes } => {
                let list: Vec<String> = primes.iter().map(u64::to_string).collect();
                write!(f, "finite:{}", list.join(","))
            }
        }
    }
}

/// Parses `all`, `ap:k,l` or `finite:p1,p2,...` and validates the result.
impl FromStr for PrimeSetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(PrimeSetSpec::All);
        }
        let parse_list = |body: &str, field: &'static str| -> Result<Vec<u64>> {
            body.split(',')
                .map(|t| {
                    t.trim().parse::<u64>().map_err(|_| {
                        Error::validation(field, format!("'{}' is not a positive integer", t.trim()))
                    })
                })
                .collect()
        };
        if let Some(body) = s.strip_prefix("ap:") {
            let v = parse_list(body, "spec")?;
            if v.len() != 2 {
                return Err(Error::validation("spec", "expected ap:MODULUS,RESIDUE"));
            }
            return PrimeSetSpec::ap(v[0], v[1]);
        }
        if let Some(body) = s.strip_prefix("finite:") {
            return PrimeSetSpec::finite(parse_list(body, "primes")?);
        }
        Err(Error::validation(
            "spec",
            format!("unrecognised prime set '{s}' (expected all, ap:k,l or finite:p1,p2,...)"),
        ))
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor_record(n).lpf == n
}

pub fn euler_phi(k: u64) -> u64 {
    assert!(k >= 1);
    let mut phi = k;
    let mut m = k;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

/// Prime counts up to `x` for `S` and for all primes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub x: u64,
    pub pi_x: u64,
    pub pi_s_x: u64,
    pub ratio: f64,
    /// Natural density as an exact fraction `p/q`.
    pub expected: Option<String>,
    pub expected_value: Option<f64>,
}

pub fn empirical_prime_density(
    spec: &PrimeSetSpec,
    x: u64,
    table: &PrimeTable,
) -> Result<DensityReport> {
    if table.limit() < x {
        return Err(Error::Precondition(format!(
            "prime table limit {} below x = {x}",
            table.limit()
        )));
    }
    let primes = &table.primes()[..table.count_up_to(x)];
    let pi_x = primes.len() as u64;
    let pi_s_x = primes.iter().filter(|&&p| spec.contains(p)).count() as u64;
    let ratio = if pi_x == 0 {
        0.0
    } else {
        pi_s_x as f64 / pi_x as f64
    };
    let expected = spec.expected_density();
    Ok(DensityReport {
        x,
        pi_x,
        pi_s_x,
        ratio,
        expected: Some(expected.to_string()),
        expected_value: Some(spec.expected_density_f64()),
    })
}
