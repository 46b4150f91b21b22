//! Exact rational oracle for the finite identities: divisor-sum dualities
//! between smallest and largest prime factors, their divisor-function
//! generalisations, and the hyperbola rearrangements built on them.

mod hyperbola;
mod sweep;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primeset::{is_prime, PrimeSetSpec};
use crate::sieve::{divisor_tables, prime_table_for, sieve_segment, DivisorTable, FactorSegment};

pub use hyperbola::{hyperbola_duality_check, hyperbola_mu_check, HyperbolaOracle, PreparedWeights};
pub use sweep::{
    standard_family, sweep_duality, sweep_duality_k, sweep_harmonic_fold, sweep_hyperbola_duality,
    sweep_hyperbola_mu, sweep_mertens, sweep_mobius_inversion, CheckFailure, CheckReport,
    CheckStatus, ExactCaps,
};

/// Arbitrary-precision fraction, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Which extreme prime factor the Möbius weight is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `Σ μ(d) f(P⁻(d)) = −f(P⁺(n))`
    Min,
    /// `Σ μ(d) f(P⁺(d)) = −f(P⁻(n))`
    Max,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Min => "min",
            Side::Max => "max",
        }
    }
}

/// A bounded function on primes with `f(1) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum FSpec {
    Indicator(PrimeSetSpec),
    /// Explicit weights on primes; unlisted primes map to 0.
    Table(BTreeMap<u64, Rational>),
}

impl FSpec {
    pub fn indicator(spec: PrimeSetSpec) -> Self {
        FSpec::Indicator(spec)
    }

    pub fn table(entries: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let map: BTreeMap<u64, Rational> = entries.into_iter().collect();
        if let Some(&bad) = map.keys().find(|&&p| !is_prime(p)) {
            return Err(Error::validation(
                "f",
                format!("table key {bad} is not prime (f(1) = 0 is fixed)"),
            ));
        }
        Ok(FSpec::Table(map))
    }

    /// `f(m)` where `m` is 1 or a prime.
    pub fn eval(&self, m: u64) -> Rational {
        match self {
            _ if m < 2 => Rational::zero(),
            FSpec::Indicator(spec) => {
                if spec.contains(m) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            FSpec::Table(map) => map.get(&m).cloned().unwrap_or_else(Rational::zero),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FSpec::Indicator(spec) => format!("1[{spec}]"),
            FSpec::Table(map) => {
                let parts: Vec<String> = map.iter().map(|(p, w)| format!("{p}:{w}")).collect();
                format!("table[{}]", parts.join(","))
            }
        }
    }
}

/// Exact `h(x) = Σ_{n≤x} 1/n`.
pub fn harmonic(x: u64) -> Rational {
    assert!(x >= 1, "harmonic requires x >= 1");
    // common-denominator accumulation; one reduction at the end
    let l = lcm_upto(x);
    let num: BigInt = (1..=x).map(|n| &l / BigInt::from(n)).sum();
    Rational::new(num, l)
}

/// Exact `M(x) = Σ_{n≤x} μ(n)/n`.
pub fn mertens_exact(x: u64) -> Rational {
    assert!(x >= 1, "mertens_exact requires x >= 1");
    let table = prime_table_for(x).expect("x >= 1");
    let seg = sieve_segment(1, x + 1, &table).expect("table covers x");
    let l = lcm_upto(x);
    let mut num = BigInt::zero();
    for (n, rec) in seg.records() {
        match rec.mu {
            1 => num += &l / BigInt::from(n),
            -1 => num -= &l / BigInt::from(n),
            _ => {}
        }
    }
    Rational::new(num, l)
}

/// `lcm(1, …, x)`.
pub fn lcm_upto(x: u64) -> BigInt {
    let mut l = BigInt::one();
    if x < 2 {
        return l;
    }
    let table = crate::sieve::build_prime_table(x).expect("x >= 2");
    for &p in table.primes() {
        let mut pk = p;
        while pk <= x / p {
            pk *= p;
        }
        l *= pk;
    }
    l
}

/// `(a ∗ b)(n) = Σ_{d|n} a(d) b(n/d)`; slices hold the values at `1..=n_max` (index `n − 1`).
pub fn dirichlet_convolve(a: &[Rational], b: &[Rational], n_max: usize) -> Result<Vec<Rational>> {
    if a.len() != n_max || b.len() != n_max {
        return Err(Error::InvalidArgument(format!(
            "convolution tables must both cover 1..={n_max} (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let mut out = vec![Rational::zero(); n_max];
    for d in 1..=n_max {
        let ad = &a[d - 1];
        if ad.is_zero() {
            continue;
        }
        for q in 1..=n_max / d {
            let bq = &b[q - 1];
            if !bq.is_zero() {
                out[d * q - 1] += ad * bq;
            }
        }
    }
    Ok(out)
}

/// Prime factorisation `n = Π p^e`, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
}

/// A divisor together with its extreme prime factors and Möbius value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divisor {
    pub d: u64,
    pub spf: u64,
    pub lpf: u64,
    pub mu: i8,
}

impl Factorization {
    pub fn trial_division(n: u64) -> Self {
        assert!(n >= 1);
        let mut factors = Vec::new();
        let mut m = n;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            factors.push((m, 1));
        }
        Factorization { factors }
    }

    /// Factorisation read off a sieved segment covering `1..=n`.
    pub fn from_segment(n: u64, seg: &FactorSegment) -> Self {
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = seg.record(m).spf;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Factorization { factors }
    }

    /// Every divisor, with `P⁻`, `P⁺` and `μ` (P± of 1 are 1).
    pub fn divisors(&self) -> Vec<Divisor> {
        let mut out = vec![Divisor {
            d: 1,
            spf: 1,
            lpf: 1,
            mu: 1,
        }];
        // primes ascending, so the newest factor is always the largest
        for &(p, e) in &self.factors {
            let base = out.len();
            let mut pk = 1u64;
            for j in 1..=e {
                pk *= p;
                for i in 0..base {
                    let prev = out[i];
                    out.push(Divisor {
                        d: prev.d * pk,
                        spf: if prev.d == 1 { p } else { prev.spf },
                        lpf: p,
                        mu: if j == 1 { -prev.mu } else { 0 },
                    });
                }
            }
        }
        out
    }

    pub fn n(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn spf(&self) -> u64 {
        self.factors.first().map_or(1, |f| f.0)
    }

    pub fn lpf(&self) -> u64 {
        self.factors.last().map_or(1, |f| f.0)
    }
}

fn duality_from_divisors(
    divisors: &[Divisor],
    n_spf: u64,
    n_lpf: u64,
    f: &FSpec,
    side: Side,
) -> (Rational, Rational) {
    let mut lhs = Rational::zero();
    for div in divisors.iter().filter(|d| d.mu != 0) {
        let p = match side {
            Side::Min => div.spf,
            Side::Max => div.lpf,
        };
        let v = f.eval(p);
        if v.is_zero() {
            continue;
        }
        if div.mu > 0 {
            lhs += v;
        } else {
            lhs -= v;
        }
    }
    let rhs = -f.eval(match side {
        Side::Min => n_lpf,
        Side::Max => n_spf,
    });
    (lhs, rhs)
}

/// Both sides of `Σ_{d|n} μ(d) f(P∓(d)) = −f(P±(n))`.
pub fn duality_sum(n: u64, f: &FSpec, side: Side) -> Result<(Rational, Rational)> {
    if n < 1 {
        return Err(Error::InvalidArgument("duality_sum requires n >= 1".into()));
    }
    let fact = Factorization::trial_division(n);
    Ok(duality_from_divisors(
        &fact.divisors(),
        fact.spf(),
        fact.lpf(),
        f,
        side,
    ))
}

/// Sieved factor data and divisor-function tables `d_0..=d_k_max` up to `n_max`.
#[derive(Debug, Clone)]
pub struct ExactTables {
    n_max: u64,
    seg: FactorSegment,
    divisor: Vec<DivisorTable>,
}

impl ExactTables {
    pub fn new(n_max: u64, k_max: u32) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("n_max must be >= 1".into()));
        }
        let table = prime_table_for(n_max)?;
        let seg = sieve_segment(1, n_max + 1, &table)?;
        let divisor = divisor_tables(k_max, n_max)?;
        Ok(ExactTables {
            n_max,
            seg,
            divisor,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn k_max(&self) -> u32 {
        (self.divisor.len() - 1) as u32
    }

    pub fn segment(&self) -> &FactorSegment {
        &self.seg
    }

    pub fn divisor_table(&self, k: u32) -> Option<&DivisorTable> {
        self.divisor.get(k as usize)
    }

    pub fn factorization(&self, n: u64) -> Result<Factorization> {
        self.check_range(n)?;
        Ok(Factorization::from_segment(n, &self.seg))
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n < 1 || n > self.n_max {
            return Err(Error::Precondition(format!(
                "n = {n} outside the tabulated range 1..={}",
                self.n_max
            )));
        }
        Ok(())
    }

    /// [`duality_sum`] using the sieved factorisation.
    pub fn duality_sum(&self, n: u64, f: &FSpec, side: Side) -> Result<(Rational, Rational)> {
        let fact = self.factorization(n)?;
        Ok(duality_from_divisors(
            &fact.divisors(),
            fact.spf(),
            fact.lpf(),
            f,
            side,
        ))
    }

    /// Both sides of `Σ_{d|n} μ(d) f(P∓(d)) d_k(n/d) = −Σ_{d|n} f(P±(d)) d_{k−1}(n/d)`.
    pub fn duality_sum_k(
        &self,
        n: u64,
        k: u32,
        f: &FSpec,
        side: Side,
    ) -> Result<(Rational, Rational)> {
        if k < 1 {
            return Err(Error::InvalidArgument("duality_sum_k requires k >= 1".into()));
        }
        let dk = self.divisor_table(k).ok_or_else(|| {
            Error::Precondition(format!("d_{k} not tabulated (k_max = {})", self.k_max()))
        })?;
        let dk1 = &self.divisor[(k - 1) as usize];
        let fact = self.factorization(n)?;
        let mut lhs = Rational::zero();
        let mut rhs = Rational::zero();
        for div in fact.divisors() {
            let (mu_p, plain_p) = match side {
                Side::Min => (div.spf, div.lpf),
                Side::Max => (div.lpf, div.spf),
            };
            let cof = n / div.d;
            if div.mu != 0 {
                let v = f.eval(mu_p);
                if !v.is_zero() {
                    let term = v * BigInt::from(dk.get(cof));
                    if div.mu > 0 {
                        lhs += term;
                    } else {
                        lhs -= term;
                    }
                }
            }
            let w = dk1.get(cof);
            if w != 0 {
                let v = f.eval(plain_p);
                if !v.is_zero() {
                    rhs -= v * BigInt::from(w);
                }
            }
        }
        Ok((lhs, rhs))
    }
}

/// Both sides of the k-duality for a single `n`, building the tables it needs.
pub fn duality_sum_k(n: u64, k: u32, f: &FSpec, side: Side) -> Result<(Rational, Rational)> {
    ExactTables::new(n.max(1), k)?.duality_sum_k(n, k, f, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::factor_record;

    fn ind(s: &str) -> FSpec {
        FSpec::indicator(s.parse().unwrap())
    }

    /// Divisor enumeration by scanning 1..=n with trial-division records; no shared code
    /// with `Factorization`.
    fn brute_duality(n: u64, f: &FSpec, side: Side) -> (Rational, Rational) {
        let mut lhs = Rational::zero();
        for d in (1..=n).filter(|d| n % d == 0) {
            let r = factor_record(d);
            let p = if side == Side::Min { r.spf } else { r.lpf };
            lhs += f.eval(p) * BigInt::from(r.mu);
        }
        let r = factor_record(n);
        let rhs = -f.eval(if side == Side::Min { r.lpf } else { r.spf });
        (lhs, rhs)
    }

    #[test]
    fn convolution_examples() {
        let n_max = 12;
        let tables = ExactTables::new(n_max as u64, 2).unwrap();
        let mu: Vec<Rational> = (1..=n_max as u64)
            .map(|n| rational(tables.segment().record(n).mu as i64, 1))
            .collect();
        let d = |k: u32| -> Vec<Rational> {
            (1..=n_max as u64)
                .map(|n| rational(tables.divisor_table(k).unwrap().get(n) as i64, 1))
                .collect()
        };
        let mu_d2 = dirichlet_convolve(&mu, &d(2), n_max).unwrap();
        // divisor enumeration at 6: μ(1)d2(6) + μ(2)d2(3) + μ(3)d2(2) + μ(6)d2(1) = 4 − 2 − 2 + 1
        assert_eq!(mu_d2[5], rational(4 - 2 - 2 + 1, 1));
        assert_eq!(mu_d2, d(1));
        let mu_d1 = dirichlet_convolve(&mu, &d(1), n_max).unwrap();
        assert_eq!(mu_d1[5], rational(0, 1));
        assert_eq!(mu_d1[0], rational(1, 1));
        assert_eq!(mu_d1, d(0));
        assert!(matches!(
            dirichlet_convolve(&mu[..5], &d(1), n_max),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn duality_examples() {
        let (l, r) = duality_sum(12, &ind("finite:3"), Side::Min).unwrap();
        assert_eq!(brute_duality(12, &ind("finite:3"), Side::Min), (l.clone(), r.clone()));
        assert_eq!((l, r), (rational(-1, 1), rational(-1, 1)));
        let (l, r) = duality_sum(12, &ind("finite:2"), Side::Min).unwrap();
        assert_eq!((l, r), (rational(0, 1), rational(0, 1)));
        let weights = FSpec::table([(7, rational(3, 5)), (11, rational(-2, 9))]).unwrap();
        for p in [7u64, 11, 13] {
            let (l, r) = duality_sum(p, &weights, Side::Min).unwrap();
            assert_eq!(l, -weights.eval(p));
            assert_eq!(r, -weights.eval(p));
        }
    }

    #[test]
    fn duality_matches_brute_force() {
        let tables = ExactTables::new(600, 1).unwrap();
        let weights = FSpec::table([(2, rational(1, 3)), (5, rational(-7, 2))]).unwrap();
        for f in [ind("all"), ind("ap:3,2"), ind("ap:4,1"), ind("finite:2,5"), weights] {
            for side in [Side::Min, Side::Max] {
                for n in 1..=600 {
                    let b = brute_duality(n, &f, side);
                    assert_eq!(b.0, b.1, "identity itself at n={n}");
                    assert_eq!(duality_sum(n, &f, side).unwrap(), b);
                    assert_eq!(tables.duality_sum(n, &f, side).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn duality_k_examples() {
        let tables = ExactTables::new(100, 4).unwrap();
        let f = ind("finite:2");
        for k in 1..=4 {
            assert_eq!(
                tables.duality_sum_k(1, k, &f, Side::Min).unwrap(),
                (rational(0, 1), rational(0, 1))
            );
        }
        // k = 1 collapses onto the plain duality
        for n in 1..=100 {
            for side in [Side::Min, Side::Max] {
                assert_eq!(
                    tables.duality_sum_k(n, 1, &ind("ap:3,2"), side).unwrap(),
                    tables.duality_sum(n, &ind("ap:3,2"), side).unwrap()
                );
            }
        }
        // n = 12, k = 2, f = 1[{2}] by divisor enumeration:
        // lhs: d=2 gives −d_2(6) = −4, d=6 gives +d_2(2) = 2; rhs: d ∈ {2, 4} have P⁺(d) = 2
        let (l, r) = tables.duality_sum_k(12, 2, &f, Side::Min).unwrap();
        assert_eq!(l, rational(-4 + 2, 1));
        assert_eq!(r, rational(-2, 1));
        assert_eq!(l, r);
        assert_eq!(duality_sum_k(12, 2, &f, Side::Min).unwrap(), (l, r));
        assert!(matches!(
            tables.duality_sum_k(12, 5, &f, Side::Min),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            tables.duality_sum_k(101, 1, &f, Side::Min),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(1), rational(1, 1));
        assert_eq!(harmonic(4), rational(1, 1) + rational(1, 2) + rational(1, 3) + rational(1, 4));
        assert_eq!(harmonic(4), rational(25, 12));
        assert_eq!(harmonic(10), rational(7381, 2520));
    }

    #[test]
    fn mertens_examples() {
        assert_eq!(mertens_exact(1), rational(1, 1));
        assert_eq!(mertens_exact(4), rational(1, 6));
        assert_eq!(mertens_exact(5), rational(-1, 30));
        let direct: Rational = (1..=200u64)
            .map(|n| rational(factor_record(n).mu as i64, n as i64))
            .sum();
        assert_eq!(mertens_exact(200), direct);
    }

    #[test]
    fn divisor_listing() {
        let fact = Factorization::trial_division(360);
        let mut ds: Vec<u64> = fact.divisors().iter().map(|d| d.d).collect();
        ds.sort_unstable();
        let naive: Vec<u64> = (1..=360).filter(|d| 360 % d == 0).collect();
        assert_eq!(ds, naive);
        for div in fact.divisors() {
            let r = factor_record(div.d);
            assert_eq!((div.spf, div.lpf, div.mu), (r.spf, r.lpf, r.mu));
        }
        assert_eq!(fact.n(), 360);
    }

    #[test]
    fn table_keys_must_be_prime() {
        assert!(FSpec::table([(4, rational(1, 1))]).is_err());
        assert!(FSpec::table([(1, rational(1, 1))]).is_err());
        assert!(ind("all").eval(1).is_zero());
    }
}
