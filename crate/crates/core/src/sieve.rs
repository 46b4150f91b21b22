//! Prime tables, segmented sieving of μ / P⁻ / P⁺ / ω, and divisor-function tables.
//!
//! A segment `[lo, hi)` is sieved with every prime `p ≤ √(hi−1)`. Each strike
//! records the prime in the smallest/largest-factor arrays, bumps ω, flips the
//! Möbius sign and multiplies a per-integer "found part" by `p`; strikes on
//! multiples of `p², p³, …` zero μ and multiply the found part again. Whatever
//! is left of `n` after dividing by its found part is either 1 or a single
//! prime larger than `√(hi−1)`, which then becomes `P⁺(n)`.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Default number of integers per segment.
pub const DEFAULT_SEGMENT_LENGTH: usize = 1 << 20;

/// Largest `n_max` a divisor table may be built for.
pub const DIVISOR_TABLE_CAP: u64 = 10_000_000;

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// π(x) for `x ≤ limit`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }
}

/// Sieve of Eratosthenes over the odd numbers up to `limit`.
pub fn build_prime_table(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "prime table limit must be at least 2, got {limit}"
        )));
    }
    let limit_usize = usize::try_from(limit)
        .map_err(|_| Error::InvalidArgument(format!("prime table limit {limit} too large")))?;
    // composite[i] describes the odd number 2i + 1
    let half = limit_usize / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit_usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(prime_count_estimate(limit));
    primes.push(2);
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i + 1 <= limit_usize)
            .map(|i| (2 * i + 1) as u64),
    );
    Ok(PrimeTable { limit, primes })
}

fn prime_count_estimate(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// One integer's worth of sieve output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorRecord {
    pub mu: i8,
    pub spf: u64,
    pub lpf: u64,
    pub omega: u8,
}

/// Naive trial-division factor record, used to cross-check the sieve.
pub fn factor_record(n: u64) -> FactorRecord {
    assert!(n >= 1, "factor_record requires n >= 1");
    let mut rec = FactorRecord {
        mu: 1,
        spf: 1,
        lpf: 1,
        omega: 0,
    };
    let mut m = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            if rec.spf == 1 {
                rec.spf = d;
            }
            rec.lpf = d;
            rec.omega += 1;
            rec.mu = if e > 1 { 0 } else { -rec.mu };
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        if rec.spf == 1 {
            rec.spf = m;
        }
        rec.lpf = m;
        rec.omega += 1;
        rec.mu = -rec.mu;
    }
    rec
}

/// Sieve output for the contiguous range `[lo, hi)`.
///
/// Immutable once produced; cheap to hand between threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactorSegment {
    lo: u64,
    hi: u64,
    mu: Vec<i8>,
    spf: Vec<u64>,
    lpf: Vec<u64>,
    omega: Vec<u8>,
}

impl FactorSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[i8] {
        &self.mu
    }

    pub fn spf(&self) -> &[u64] {
        &self.spf
    }

    pub fn lpf(&self) -> &[u64] {
        &self.lpf
    }

    pub fn omega(&self) -> &[u8] {
        &self.omega
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.lo..self.hi).contains(&n)
    }

    /// Record for `n`; panics if `n` lies outside the segment.
    pub fn record(&self, n: u64) -> FactorRecord {
        assert!(self.contains(n), "{n} outside segment [{}, {})", self.lo, self.hi);
        let i = (n - self.lo) as usize;
        FactorRecord {
            mu: self.mu[i],
            spf: self.spf[i],
            lpf: self.lpf[i],
            omega: self.omega[i],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = (u64, FactorRecord)> + '_ {
        (self.lo..self.hi).map(move |n| (n, self.record(n)))
    }

    /// Debug dump with columns `n,mu,spf,lpf,omega`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,mu,spf,lpf,omega")?;
        for (i, n) in (self.lo..self.hi).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                n, self.mu[i], self.spf[i], self.lpf[i], self.omega[i]
            )?;
        }
        Ok(())
    }
}

/// Reusable sieving workspace bound to one prime table.
///
/// Keeps the per-integer scratch buffer between calls so that a worker
/// sieving many segments does not reallocate.
#[derive(Debug)]
pub struct SegmentSieve<'a> {
    table: &'a PrimeTable,
    found: Vec<u64>,
}

impl<'a> SegmentSieve<'a> {
    pub fn new(table: &'a PrimeTable) -> Self {
        SegmentSieve {
            table,
            found: Vec::new(),
        }
    }

    /// Sieve `[lo, hi)` into `out`, reusing its allocations.
    pub fn sieve_into(&mut self, lo: u64, hi: u64, out: &mut FactorSegment) -> Result<()> {
        if lo < 1 || hi <= lo {
            return Err(Error::Precondition(format!(
                "segment bounds must satisfy 1 <= lo < hi, got [{lo}, {hi})"
            )));
        }
        let top = hi - 1;
        let limit = self.table.limit;
        if limit.checked_mul(limit).map_or(false, |sq| sq < top) {
            return Err(Error::Precondition(format!(
                "prime table limit {limit} too small to sieve up to {top}"
            )));
        }
        let len = usize::try_from(hi - lo)
            .map_err(|_| Error::InvalidArgument("segment too long".into()))?;

        out.lo = lo;
        out.hi = hi;
        // contents are initialised block by block in `strike_block`
        out.mu.resize(len, 0);
        out.spf.resize(len, 0);
        out.lpf.resize(len, 0);
        out.omega.resize(len, 0);
        self.found.resize(len, 0);
        out.mu.truncate(len);
        out.spf.truncate(len);
        out.lpf.truncate(len);
        out.omega.truncate(len);
        self.found.truncate(len);

        for b in (0..len).step_by(BLOCK) {
            let e = (b + BLOCK).min(len);
            strike_block(
                self.table.primes(),
                lo + b as u64,
                &mut out.mu[b..e],
                &mut out.spf[b..e],
                &mut out.lpf[b..e],
                &mut out.omega[b..e],
                &mut self.found[b..e],
            );
        }
        Ok(())
    }
}

/// Cache-sized sub-block of a segment.
const BLOCK: usize = 1 << 15;

fn strike_block(
    primes: &[u64],
    lo: u64,
    mu: &mut [i8],
    spf: &mut [u64],
    lpf: &mut [u64],
    omega: &mut [u8],
    found: &mut [u64],
) {
    mu.fill(1);
    spf.fill(0);
    lpf.fill(1);
    omega.fill(0);
    found.fill(1);
    let len = mu.len();
    let top = lo + len as u64 - 1;
    for &p in primes {
        if p * p > top {
            break;
        }
        let mut i = first_offset(lo, p);
        while i < len {
            spf[i] = if spf[i] == 0 { p } else { spf[i] };
            lpf[i] = p;
            omega[i] += 1;
            mu[i] = -mu[i];
            found[i] *= p;
            i += p as usize;
        }
        let mut pk = p * p;
        loop {
            let mut i = first_offset(lo, pk);
            while i < len {
                mu[i] = 0;
                found[i] *= p;
                i += pk as usize;
            }
            match pk.checked_mul(p) {
                Some(next) if next <= top => pk = next,
                _ => break,
            }
        }
    }

    for i in 0..len {
        let n = lo + i as u64;
        let f = found[i];
        if f != n {
            // a single prime above √top remains
            let q = if n < 1 << 53 {
                (n as f64 / f as f64).round() as u64
            } else {
                n / f
            };
            spf[i] = if spf[i] == 0 { q } else { spf[i] };
            lpf[i] = q;
            omega[i] += 1;
            mu[i] = -mu[i];
        } else if n == 1 {
            spf[i] = 1;
        }
    }
}

#[inline]
fn first_offset(lo: u64, m: u64) -> usize {
    let r = lo % m;
    if r == 0 {
        0
    } else {
        (m - r) as usize
    }
}

/// Exact μ, P⁻, P⁺ and ω for every integer in `[lo, hi)`.
///
/// Requires `table.limit()² ≥ hi − 1`.
pub fn sieve_segment(lo: u64, hi: u64, table: &PrimeTable) -> Result<FactorSegment> {
    let mut seg = FactorSegment::default();
    SegmentSieve::new(table).sieve_into(lo, hi, &mut seg)?;
    Ok(seg)
}

/// Smallest prime table that can sieve every integer up to `n_max`.
pub fn prime_table_for(n_max: u64) -> Result<PrimeTable> {
    build_prime_table(isqrt(n_max).max(2) + 1)
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |sq| sq <= n) {
        r += 1;
    }
    r
}

/// `d_k(n)` for `1 ≤ n ≤ n_max`; index 0 is unused and holds 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    k: u32,
    values: Vec<u64>,
}

impl DivisorTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> u64 {
        self.values[n as usize]
    }

    /// Values indexed by `n`, with a dummy 0 at index 0.
    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// `d_k` up to `n_max`, built from `d_0 = [n = 1]` by `k` passes of `d_j = 1 ∗ d_{j−1}`.
///
/// Every addition is checked; an overflowing entry aborts with [`Error::Overflow`].
pub fn divisor_table(k: u32, n_max: u64) -> Result<DivisorTable> {
    let mut tables = divisor_tables(k, n_max)?;
    Ok(tables.pop().expect("at least d_0"))
}

/// `[d_0, d_1, …, d_k]` up to `n_max`, sharing the intermediate passes.
pub fn divisor_tables(k: u32, n_max: u64) -> Result<Vec<DivisorTable>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("divisor table needs n_max >= 1".into()));
    }
    if n_max > DIVISOR_TABLE_CAP {
        return Err(Error::InvalidArgument(format!(
            "divisor tables are limited to n_max <= {DIVISOR_TABLE_CAP}, got {n_max}"
        )));
    }
    let len = n_max as usize + 1;
    let mut d0 = vec![0u64; len];
    d0[1] = 1;
    let mut out = vec![DivisorTable { k: 0, values: d0 }];
    for j in 1..=k {
        let prev = &out.last().expect("non-empty").values;
        let mut next = vec![0u64; len];
        if j == 1 {
            next[1..].fill(1);
        } else {
            for d in 1..len {
                let v = prev[d];
                if v == 0 {
                    continue;
                }
                let mut m = d;
                while m < len {
                    next[m] = next[m].checked_add(v).ok_or_else(|| {
                        Error::Overflow(format!("d_{j}({m}) exceeds 64 bits"))
                    })?;
                    m += d;
                }
            }
        }
        out.push(DivisorTable { k: j, values: next });
    }
    Ok(out)
}
