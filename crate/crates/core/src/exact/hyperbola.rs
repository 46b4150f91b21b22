//! Hyperbola rearrangements evaluated exactly.
//!
//! With `D_j(y) = Σ_{m≤y} d_j(m)/m` (so `D_0 ≡ 1`), the checks are
//!
//! ```text
//! Σ_{n≤x} μ(n) f(P⁻(n))/n · D_k(⌊x/n⌋) = −Σ_{n≤x} f(P⁺(n))/n · D_{k−1}(⌊x/n⌋)
//! Σ_{n≤x} μ(n)/n · D_k(⌊x/n⌋)           =  D_{k−1}(x)
//! ```
//!
//! All quantities are carried as integers over the common denominator
//! `L = lcm(1..x_max)` (and `F`, the common denominator of `f`), so a sweep
//! over every `x` needs no gcd work until the final residual. Terms sharing
//! the same `⌊x/n⌋` are summed through prefix sums first; this is an exact
//! regrouping, not an approximation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{lcm_upto, FSpec, Rational, Side};
use crate::error::{Error, Result};
use crate::sieve::{divisor_tables, prime_table_for, sieve_segment, FactorSegment};

#[derive(Debug, Clone)]
pub struct HyperbolaOracle {
    x_max: u64,
    lcm: BigInt,
    l_over_n: Vec<BigInt>,
    seg: FactorSegment,
    /// `d_prefix[j][y] = L · D_j(y)`, with `y = 0` mapping to 0.
    d_prefix: Vec<Vec<BigInt>>,
    /// `L · Σ_{m≤n} μ(m)/m`
    mu_prefix: Vec<BigInt>,
}

/// Scaled prefix sums of one weight function `f`, ready for many `x`.
#[derive(Debug, Clone)]
pub struct PreparedWeights {
    side: Side,
    scale: BigInt,
    /// `L·F · Σ_{m≤n} μ(m) f(P∓(m))/m`
    weighted: Vec<BigInt>,
    /// `L·F · Σ_{m≤n} f(P±(m))/m`
    plain: Vec<BigInt>,
}

impl PreparedWeights {
    pub fn side(&self) -> Side {
        self.side
    }
}

impl HyperbolaOracle {
    pub fn new(x_max: u64, k_max: u32) -> Result<Self> {
        if x_max < 1 {
            return Err(Error::InvalidArgument("x_max must be >= 1".into()));
        }
        let table = prime_table_for(x_max)?;
        let seg = sieve_segment(1, x_max + 1, &table)?;
        let lcm = lcm_upto(x_max);
        let len = x_max as usize + 1;
        let mut l_over_n = Vec::with_capacity(len);
        l_over_n.push(BigInt::zero());
        l_over_n.extend((1..=x_max).map(|n| &lcm / BigInt::from(n)));

        let d_prefix = divisor_tables(k_max, x_max)?
            .iter()
            .map(|t| prefix(len, |m| &l_over_n[m] * BigInt::from(t.get(m as u64))))
            .collect();
        let mu_prefix = prefix(len, |m| {
            &l_over_n[m] * BigInt::from(seg.mu()[m - 1] as i64)
        });
        Ok(HyperbolaOracle {
            x_max,
            lcm,
            l_over_n,
            seg,
            d_prefix,
            mu_prefix,
        })
    }

    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn k_max(&self) -> u32 {
        (self.d_prefix.len() - 1) as u32
    }

    /// Exact `D_j(y)`.
    pub fn divisor_log_sum(&self, j: u32, y: u64) -> Result<Rational> {
        let t = self.d_prefix.get(j as usize).ok_or_else(|| self.missing(j))?;
        self.check_x(y.max(1))?;
        Ok(Rational::new(t[y as usize].clone(), self.lcm.clone()))
    }

    pub fn prepare(&self, f: &FSpec, side: Side) -> PreparedWeights {
        let len = self.x_max as usize + 1;
        let values = |m: usize, use_min: bool| {
            let r = self.seg.record(m as u64);
            f.eval(if use_min { r.spf } else { r.lpf })
        };
        let scale = (1..len).fold(BigInt::one(), |acc, m| {
            acc.lcm(values(m, true).denom()).lcm(values(m, false).denom())
        });
        let scaled = |v: Rational| -> BigInt { (v * &scale).to_integer() };
        let (mu_min, plain_min) = match side {
            Side::Min => (true, false),
            Side::Max => (false, true),
        };
        let weighted = prefix(len, |m| {
            let mu = self.seg.mu()[m - 1];
            if mu == 0 {
                return BigInt::zero();
            }
            &self.l_over_n[m] * scaled(values(m, mu_min)) * BigInt::from(mu as i64)
        });
        let plain = prefix(len, |m| &self.l_over_n[m] * scaled(values(m, plain_min)));
        PreparedWeights {
            side,
            scale,
            weighted,
            plain,
        }
    }

    /// Both sides of the weighted hyperbola identity at `x`.
    pub fn duality_sides(
        &self,
        x: u64,
        k: u32,
        w: &PreparedWeights,
    ) -> Result<(Rational, Rational)> {
        let (lhs, rhs, den) = self.duality_scaled(x, k, w)?;
        Ok((Rational::new(lhs, den.clone()), Rational::new(rhs, den)))
    }

    /// `LHS − RHS` of the weighted hyperbola identity at `x`; exactly zero when it holds.
    pub fn duality_residual(&self, x: u64, k: u32, w: &PreparedWeights) -> Result<Rational> {
        let (lhs, rhs, den) = self.duality_scaled(x, k, w)?;
        Ok(Rational::new(lhs - rhs, den))
    }

    fn duality_scaled(
        &self,
        x: u64,
        k: u32,
        w: &PreparedWeights,
    ) -> Result<(BigInt, BigInt, BigInt)> {
        self.check_x(x)?;
        if k < 1 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let dk = self.d_prefix.get(k as usize).ok_or_else(|| self.missing(k))?;
        let dk1 = &self.d_prefix[k as usize - 1];
        let lhs = grouped(x, &w.weighted, dk);
        let rhs = -grouped(x, &w.plain, dk1);
        let den = &self.lcm * &self.lcm * &w.scale;
        Ok((lhs, rhs, den))
    }

    /// `(Σ_{n≤x} μ(n)/n · D_k(⌊x/n⌋), D_{k−1}(x))`.
    pub fn mu_sides(&self, x: u64, k: u32) -> Result<(Rational, Rational)> {
        self.check_x(x)?;
        if k < 1 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let dk = self.d_prefix.get(k as usize).ok_or_else(|| self.missing(k))?;
        let lhs = grouped(x, &self.mu_prefix, dk);
        let rhs = self.d_prefix[k as usize - 1][x as usize].clone();
        Ok((
            Rational::new(lhs, &self.lcm * &self.lcm),
            Rational::new(rhs, self.lcm.clone()),
        ))
    }

    /// Cheap equality test for the Möbius identity (no reduction).
    pub(crate) fn mu_holds(&self, x: u64, k: u32) -> Result<bool> {
        self.check_x(x)?;
        let dk = self.d_prefix.get(k as usize).ok_or_else(|| self.missing(k))?;
        let lhs = grouped(x, &self.mu_prefix, dk);
        Ok(lhs == &self.d_prefix[k as usize - 1][x as usize] * &self.lcm)
    }

    pub(crate) fn duality_holds(&self, x: u64, k: u32, w: &PreparedWeights) -> Result<bool> {
        let (lhs, rhs, _) = self.duality_scaled(x, k, w)?;
        Ok(lhs == rhs)
    }

    fn check_x(&self, x: u64) -> Result<()> {
        if x < 1 || x > self.x_max {
            return Err(Error::Precondition(format!(
                "x = {x} outside the tabulated range 1..={}",
                self.x_max
            )));
        }
        Ok(())
    }

    fn missing(&self, k: u32) -> Error {
        Error::Precondition(format!(
            "divisor table d_{k} not available (k_max = {})",
            self.k_max()
        ))
    }
}

fn prefix(len: usize, mut term: impl FnMut(usize) -> BigInt) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(len);
    let mut acc = BigInt::zero();
    out.push(acc.clone());
    for m in 1..len {
        acc += term(m);
        out.push(acc.clone());
    }
    out
}

/// `Σ_{n≤x} c(n) · D(⌊x/n⌋)` given prefix sums of `c`, one product per distinct quotient.
fn grouped(x: u64, c_prefix: &[BigInt], d: &[BigInt]) -> BigInt {
    let mut total = BigInt::zero();
    let mut lo = 1u64;
    while lo <= x {
        let q = x / lo;
        let hi = x / q;
        let block = &c_prefix[hi as usize] - &c_prefix[lo as usize - 1];
        if !block.is_zero() {
            total += block * &d[q as usize];
        }
        lo = hi + 1;
    }
    total
}

/// Residual of the weighted hyperbola identity (smallest-factor form) at one `x`.
pub fn hyperbola_duality_check(x: u64, k: u32, f: &FSpec) -> Result<Rational> {
    let oracle = HyperbolaOracle::new(x.max(1), k)?;
    let w = oracle.prepare(f, Side::Min);
    oracle.duality_residual(x, k, &w)
}

/// Both sides of the Möbius hyperbola identity at one `x`.
pub fn hyperbola_mu_check(x: u64, k: u32) -> Result<(Rational, Rational)> {
    HyperbolaOracle::new(x.max(1), k)?.mu_sides(x, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{harmonic, rational};
    use crate::sieve::factor_record;

    fn ind(s: &str) -> FSpec {
        FSpec::indicator(s.parse().unwrap())
    }

    /// d_j by brute enumeration of ordered factorisations.
    fn brute_dk(j: u32, n: u64) -> u64 {
        match j {
            0 => (n == 1) as u64,
            _ => (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| brute_dk(j - 1, n / d))
                .sum(),
        }
    }

    fn brute_big_d(j: u32, y: u64) -> Rational {
        (1..=y).map(|m| rational(brute_dk(j, m) as i64, m as i64)).sum()
    }

    /// Term-by-term evaluation of both sides in rationals.
    fn brute_sides(x: u64, k: u32, f: &FSpec, side: Side) -> (Rational, Rational) {
        let mut lhs = Rational::zero();
        let mut rhs = Rational::zero();
        for n in 1..=x {
            let r = factor_record(n);
            let (pm, pp) = match side {
                Side::Min => (r.spf, r.lpf),
                Side::Max => (r.lpf, r.spf),
            };
            let q = x / n;
            lhs += f.eval(pm) * rational(r.mu as i64, n as i64) * brute_big_d(k, q);
            rhs -= f.eval(pp) * rational(1, n as i64) * brute_big_d(k - 1, q);
        }
        (lhs, rhs)
    }

    #[test]
    fn duality_examples() {
        let all = ind("all");
        let oracle = HyperbolaOracle::new(10, 1).unwrap();
        let w = oracle.prepare(&all, Side::Min);
        let (lhs, rhs) = oracle.duality_sides(10, 1, &w).unwrap();
        assert_eq!(rhs, -(harmonic(10) - rational(1, 1)));
        assert_eq!(rhs, rational(-4861, 2520));
        assert_eq!(lhs, rhs);
        assert_eq!(hyperbola_duality_check(10, 1, &all).unwrap(), rational(0, 1));
        for k in 1..=3 {
            assert_eq!(hyperbola_duality_check(1, k, &ind("ap:3,2")).unwrap(), rational(0, 1));
        }
        let r = hyperbola_duality_check(50, 2, &ind("ap:4,1")).unwrap();
        assert_eq!(r, rational(0, 1));
    }

    #[test]
    fn mu_examples() {
        let (l, r) = hyperbola_mu_check(5, 2).unwrap();
        assert_eq!(l, harmonic(5));
        assert_eq!(r, rational(137, 60));
        for k in 1..=3 {
            assert_eq!(
                hyperbola_mu_check(1, k).unwrap(),
                (rational(1, 1), rational(1, 1))
            );
        }
        let (l, r) = hyperbola_mu_check(100, 3).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn grouped_evaluation_matches_term_by_term() {
        let oracle = HyperbolaOracle::new(60, 3).unwrap();
        let weights = FSpec::table([(2, rational(1, 3)), (7, rational(-5, 4))]).unwrap();
        for f in [ind("all"), ind("ap:4,1"), weights] {
            for side in [Side::Min, Side::Max] {
                let w = oracle.prepare(&f, side);
                for k in 1..=3 {
                    for x in [1u64, 2, 7, 12, 30, 59, 60] {
                        let brute = brute_sides(x, k, &f, side);
                        assert_eq!(brute.0, brute.1, "identity at x={x} k={k}");
                        assert_eq!(oracle.duality_sides(x, k, &w).unwrap(), brute);
                        assert!(oracle.duality_holds(x, k, &w).unwrap());
                    }
                }
            }
        }
        for k in 1..=3 {
            for x in [1u64, 9, 60] {
                let lhs: Rational = (1..=x)
                    .map(|n| {
                        rational(factor_record(n).mu as i64, n as i64) * brute_big_d(k, x / n)
                    })
                    .sum();
                let (l, r) = oracle.mu_sides(x, k).unwrap();
                assert_eq!(l, lhs);
                assert_eq!(r, brute_big_d(k - 1, x));
            }
        }
    }

    #[test]
    fn divisor_log_sums() {
        let oracle = HyperbolaOracle::new(30, 2).unwrap();
        for y in 1..=30 {
            assert_eq!(oracle.divisor_log_sum(0, y).unwrap(), rational(1, 1));
            assert_eq!(oracle.divisor_log_sum(1, y).unwrap(), harmonic(y));
            assert_eq!(oracle.divisor_log_sum(2, y).unwrap(), brute_big_d(2, y));
        }
    }

    #[test]
    fn missing_tables_are_precondition_errors() {
        let oracle = HyperbolaOracle::new(20, 1).unwrap();
        let w = oracle.prepare(&ind("all"), Side::Min);
        assert!(matches!(
            oracle.duality_residual(10, 2, &w),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            oracle.duality_residual(21, 1, &w),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(oracle.mu_sides(5, 3), Err(Error::Precondition(_))));
    }
}
