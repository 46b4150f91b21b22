use serde::Serialize;

use super::compensated::{two_sum, Compensated};
use crate::error::{Error, Result};
use crate::primeset::{PrimeMatcher, PrimeSetSpec};
use crate::sieve::FactorSegment;

/// Largest supported power of `log n` in the moment sums.
pub const K_MAX_LIMIT: usize = 6;
pub(crate) const SLOTS: usize = K_MAX_LIMIT + 1;

type Moments = [Compensated; SLOTS];

/// Integers summed plainly before one compensated add.
const CHUNK: usize = 64;

/// Streaming sums over `n` in a contiguous range, for `i = 0..=k_max`:
///
/// | field            | summand                          |
/// |------------------|----------------------------------|
/// | `mu`             | `μ(n) logⁱn / n`                 |
/// | `mu_min`         | same, restricted to `P⁻(n) ∈ S`  |
/// | `mu_max`         | same, restricted to `P⁺(n) ∈ S`  |
/// | `fmin`           | `logⁱn / n` over `P⁻(n) ∈ S`     |
/// | `fmax`           | `logⁱn / n` over `P⁺(n) ∈ S`     |
/// | `harm`           | `logⁱn / n`                      |
///
/// plus `aj = Σ_{P⁻(n)∈S} μ(n) ω(n) / n` and the plain counts.
#[derive(Debug, Clone, Serialize)]
pub struct MomentAccumulators {
    k_max: usize,
    spec: PrimeSetSpec,
    #[serde(skip)]
    matcher: PrimeMatcher,
    shard: bool,
    /// Inclusive `[first, last]` of the ingested integers.
    range: Option<(u64, u64)>,
    mu: Moments,
    mu_min: Moments,
    mu_max: Moments,
    fmin: Moments,
    fmax: Moments,
    harm: Moments,
    aj: Compensated,
    count_min: u64,
    count_max: u64,
    count_total: u64,
}

/// `ln n` for `n` in one chunk `[base, base + CHUNK)`, as `ln base + ln(1 + u)`
/// with a short series in `u = (n − base)/base`. Within about one ulp of
/// `f64::ln`; below `2¹⁶` it defers to `f64::ln`.
struct ChunkLog {
    base: u64,
    ln_base: f64,
    inv_base: f64,
}

impl ChunkLog {
    const SERIES_FROM: u64 = 1 << 16;

    #[inline]
    fn new(base: u64) -> Self {
        let b = base as f64;
        ChunkLog {
            base,
            ln_base: b.ln(),
            inv_base: 1.0 / b,
        }
    }

    #[inline(always)]
    fn ln(&self, n: u64) -> f64 {
        if self.base < Self::SERIES_FROM {
            return (n as f64).ln();
        }
        // u < 2⁻¹⁰, so the dropped u⁶/6 term is below 1e-19
        let u = (n - self.base) as i64 as f64 * self.inv_base;
        let s = u * (1.0 - u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u * 0.2))));
        self.ln_base + s
    }
}

/// Zeroed accumulators that expect ingestion to start at `n = 1`.
pub fn make_accumulators(k_max: usize, spec: &PrimeSetSpec) -> Result<MomentAccumulators> {
    MomentAccumulators::new(k_max, spec, false)
}

impl MomentAccumulators {
    pub fn new(k_max: usize, spec: &PrimeSetSpec, shard: bool) -> Result<Self> {
        if k_max > K_MAX_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "k_max must be in 0..={K_MAX_LIMIT}, got {k_max}"
            )));
        }
        spec.validate()?;
        Ok(MomentAccumulators {
            k_max,
            spec: spec.clone(),
            matcher: spec.matcher(),
            shard,
            range: None,
            mu: [Compensated::ZERO; SLOTS],
            mu_min: [Compensated::ZERO; SLOTS],
            mu_max: [Compensated::ZERO; SLOTS],
            fmin: [Compensated::ZERO; SLOTS],
            fmax: [Compensated::ZERO; SLOTS],
            harm: [Compensated::ZERO; SLOTS],
            aj: Compensated::ZERO,
            count_min: 0,
            count_max: 0,
            count_total: 0,
        })
    }

    /// Zeroed accumulators for an arbitrary sub-range, to be merged later.
    pub fn shard(k_max: usize, spec: &PrimeSetSpec) -> Result<Self> {
        Self::new(k_max, spec, true)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn spec(&self) -> &PrimeSetSpec {
        &self.spec
    }

    pub fn is_shard(&self) -> bool {
        self.shard
    }

    pub fn range(&self) -> Option<(u64, u64)> {
        self.range
    }

    pub fn n_processed(&self) -> u64 {
        self.count_total
    }

    pub fn count_min(&self) -> u64 {
        self.count_min
    }

    pub fn count_max(&self) -> u64 {
        self.count_max
    }

    pub fn count_total(&self) -> u64 {
        self.count_total
    }

    pub fn mu_moment(&self, i: usize) -> f64 {
        self.slot(&self.mu, i)
    }

    pub fn mu_min_moment(&self, i: usize) -> f64 {
        self.slot(&self.mu_min, i)
    }

    pub fn mu_max_moment(&self, i: usize) -> f64 {
        self.slot(&self.mu_max, i)
    }

    pub fn fmin_moment(&self, i: usize) -> f64 {
        self.slot(&self.fmin, i)
    }

    pub fn fmax_moment(&self, i: usize) -> f64 {
        self.slot(&self.fmax, i)
    }

    pub fn harm_moment(&self, i: usize) -> f64 {
        self.slot(&self.harm, i)
    }

    pub fn aj_sum(&self) -> f64 {
        self.aj.value()
    }

    fn slot(&self, m: &Moments, i: usize) -> f64 {
        assert!(i <= self.k_max, "moment index {i} above k_max = {}", self.k_max);
        m[i].value()
    }

    /// Adds every integer of `seg`. The segment must continue the ingested
    /// range; the first segment must start at 1 unless this is a shard.
    pub fn ingest_segment(&mut self, seg: &FactorSegment) -> Result<()> {
        if seg.is_empty() {
            return Ok(());
        }
        let expected = match self.range {
            Some((_, last)) => Some(last + 1),
            None if self.shard => None,
            None => Some(1),
        };
        if let Some(next) = expected {
            if seg.lo() != next {
                return Err(Error::Contract(format!(
                    "non-contiguous ingest: expected segment starting at {next}, got {}",
                    seg.lo()
                )));
            }
        }
        match self.k_max {
            0 => self.ingest_k::<0>(seg),
            1 => self.ingest_k::<1>(seg),
            2 => self.ingest_k::<2>(seg),
            3 => self.ingest_k::<3>(seg),
            4 => self.ingest_k::<4>(seg),
            5 => self.ingest_k::<5>(seg),
            _ => self.ingest_k::<6>(seg),
        }
        let first = self.range.map_or(seg.lo(), |r| r.0);
        self.range = Some((first, seg.hi() - 1));
        self.count_total += seg.len() as u64;
        Ok(())
    }

    fn ingest_k<const K: usize>(&mut self, seg: &FactorSegment) {
        // families in the order mu, mu_min, mu_max, fmin, fmax, harm; each
        // weighted by 0/1 masks so the loop has no data-dependent branches.
        // Terms are added plainly within a chunk and the chunk totals are
        // accumulated with compensation.
        let mut sum = [[0.0f64; SLOTS]; 6];
        let mut comp = [[0.0f64; SLOTS]; 6];
        for (f, fam) in self.families().into_iter().enumerate() {
            for j in 0..=K {
                (sum[f][j], comp[f][j]) = fam[j].parts();
            }
        }
        let mut aj = self.aj;
        let matcher = &self.matcher;
        let mut count_min = 0u64;
        let mut count_max = 0u64;
        let lo = seg.lo();
        let (mu, spf, lpf, omega) = (seg.mu(), seg.spf(), seg.lpf(), seg.omega());
        let len = mu.len();
        let mut start = 0;
        while start < len {
            // chunks are aligned to multiples of CHUNK in n, so results do
            // not depend on where segments are cut
            let base = (lo + start as u64) & !(CHUNK as u64 - 1);
            let end = ((base + CHUNK as u64 - lo) as usize).min(len);
            let logs = ChunkLog::new(base);
            let mut part = [[0.0f64; SLOTS]; 6];
            let mut part_aj = 0.0;
            for i in start..end {
                let n = lo + i as u64;
                let x = n as i64 as f64;
                let mut pw = [0.0f64; SLOTS];
                pw[0] = 1.0 / x;
                if K > 0 {
                    let l = logs.ln(n);
                    for j in 1..=K {
                        pw[j] = pw[j - 1] * l;
                    }
                }
                let in_min = matcher.contains(spf[i]);
                let in_max = matcher.contains(lpf[i]);
                count_min += in_min as u64;
                count_max += in_max as u64;
                let fmin = in_min as u8 as f64;
                let fmax = in_max as u8 as f64;
                let s = mu[i] as f64;
                let w = [s, s * fmin, s * fmax, fmin, fmax, 1.0];
                for f in 0..6 {
                    for j in 0..=K {
                        part[f][j] += w[f] * pw[j];
                    }
                }
                part_aj += w[1] * omega[i] as f64 * pw[0];
            }
            for f in 0..6 {
                for j in 0..=K {
                    two_sum(&mut sum[f][j], &mut comp[f][j], part[f][j]);
                }
            }
            aj.add(part_aj);
            start = end;
        }
        for (f, fam) in self.families_mut().into_iter().enumerate() {
            for j in 0..=K {
                fam[j] = Compensated::from_parts(sum[f][j], comp[f][j]);
            }
        }
        self.aj = aj;
        self.count_min += count_min;
        self.count_max += count_max;
    }

    fn families(&self) -> [&Moments; 6] {
        [&self.mu, &self.mu_min, &self.mu_max, &self.fmin, &self.fmax, &self.harm]
    }

    fn families_mut(&mut self) -> [&mut Moments; 6] {
        [
            &mut self.mu,
            &mut self.mu_min,
            &mut self.mu_max,
            &mut self.fmin,
            &mut self.fmax,
            &mut self.harm,
        ]
    }

    /// Appends `other`, which must cover the range immediately after this one.
    pub fn merge(&mut self, other: &MomentAccumulators) -> Result<()> {
        if other.k_max != self.k_max || other.spec != self.spec {
            return Err(Error::Contract(
                "cannot merge accumulators with different k_max or prime set".into(),
            ));
        }
        let Some((o_first, o_last)) = other.range else {
            return Ok(());
        };
        let range = match self.range {
            Some((first, last)) => {
                if o_first != last + 1 {
                    return Err(Error::Contract(format!(
                        "merge requires adjacent ascending ranges: [{first}, {last}] then [{o_first}, {o_last}]"
                    )));
                }
                (first, o_last)
            }
            None => {
                if !self.shard && o_first != 1 {
                    return Err(Error::Contract(format!(
                        "accumulation must start at 1, got shard starting at {o_first}"
                    )));
                }
                (o_first, o_last)
            }
        };
        for (dst, src) in [
            (&mut self.mu, &other.mu),
            (&mut self.mu_min, &other.mu_min),
            (&mut self.mu_max, &other.mu_max),
            (&mut self.fmin, &other.fmin),
            (&mut self.fmax, &other.fmax),
            (&mut self.harm, &other.harm),
        ] {
            for (d, s) in dst.iter_mut().zip(src.iter()).take(self.k_max + 1) {
                d.merge(s);
            }
        }
        self.aj.merge(&other.aj);
        self.count_min += other.count_min;
        self.count_max += other.count_max;
        self.count_total += other.count_total;
        self.range = Some(range);
        Ok(())
    }
}

/// `a` followed by `b`.
pub fn merge_accumulators(
    a: &MomentAccumulators,
    b: &MomentAccumulators,
) -> Result<MomentAccumulators> {
    let mut out = a.clone();
    out.merge(b)?;
    Ok(out)
}

/// Adds `seg` to `acc` and returns it.
pub fn ingest_segment(mut acc: MomentAccumulators, seg: &FactorSegment) -> Result<MomentAccumulators> {
    acc.ingest_segment(seg)?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{prime_table_for, sieve_segment};

    fn seg(lo: u64, hi: u64) -> FactorSegment {
        sieve_segment(lo, hi, &prime_table_for(hi).unwrap()).unwrap()
    }

    #[test]
    fn k_max_bounds() {
        let acc = make_accumulators(0, &PrimeSetSpec::All).unwrap();
        assert_eq!(acc.mu_moment(0), 0.0);
        let acc = make_accumulators(6, &PrimeSetSpec::All).unwrap();
        assert_eq!((0..=6).map(|i| acc.harm_moment(i)).count(), 7);
        assert!(matches!(
            make_accumulators(9, &PrimeSetSpec::All),
            Err(Error::InvalidArgument(_))
        ));
        let bad = PrimeSetSpec::Ap {
            modulus: 4,
            residue: 2,
        };
        assert!(make_accumulators(1, &bad).is_err());
    }

    #[test]
    fn ingest_examples() {
        let mut acc = make_accumulators(2, &PrimeSetSpec::All).unwrap();
        acc.ingest_segment(&seg(1, 2)).unwrap();
        assert_eq!(acc.mu_moment(0), 1.0);
        assert_eq!(acc.mu_moment(1), 0.0);
        assert_eq!(acc.mu_moment(2), 0.0);
        assert_eq!(acc.mu_min_moment(0), 0.0);
        assert_eq!(acc.mu_max_moment(0), 0.0);
        assert_eq!(acc.harm_moment(0), 1.0);
        assert_eq!((acc.count_min(), acc.count_max(), acc.count_total()), (0, 0, 1));

        let mut shard = MomentAccumulators::shard(2, &PrimeSetSpec::All).unwrap();
        shard.ingest_segment(&seg(2, 4)).unwrap();
        assert_eq!(shard.mu_moment(0), -1.0 / 2.0 - 1.0 / 3.0);
        assert_eq!(shard.count_min(), 2);
        let l2 = 2f64.ln();
        let l3 = 3f64.ln();
        assert!((shard.mu_moment(1) - (-l2 / 2.0 - l3 / 3.0)).abs() < 1e-15);
        assert!((shard.aj_sum() - (-0.5 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn chunk_log_tracks_ln() {
        for base in [1u64 << 16, 1_000_000_000 & !63, 123_456_768, 1 << 40] {
            let logs = ChunkLog::new(base);
            for n in base..base + CHUNK as u64 {
                let exact = (n as f64).ln();
                assert!((logs.ln(n) - exact).abs() <= 2.0 * f64::EPSILON * exact, "{n}");
            }
        }
        let logs = ChunkLog::new(64);
        assert_eq!(logs.ln(100), 100f64.ln());
    }

    #[test]
    fn contiguity_is_enforced() {
        let mut acc = make_accumulators(1, &PrimeSetSpec::All).unwrap();
        assert!(matches!(acc.ingest_segment(&seg(2, 10)), Err(Error::Contract(_))));
        acc.ingest_segment(&seg(1, 10)).unwrap();
        assert!(matches!(acc.ingest_segment(&seg(11, 20)), Err(Error::Contract(_))));
        acc.ingest_segment(&seg(10, 20)).unwrap();
        assert_eq!(acc.range(), Some((1, 19)));
        assert_eq!(acc.n_processed(), 19);
    }

    #[test]
    fn merge_rules() {
        let spec = PrimeSetSpec::ap(4, 1).unwrap();
        let zero = make_accumulators(3, &spec).unwrap();
        let mut a = make_accumulators(3, &spec).unwrap();
        a.ingest_segment(&seg(1, 1000)).unwrap();
        let merged = merge_accumulators(&zero, &a).unwrap();
        for i in 0..=3 {
            assert_eq!(merged.mu_min_moment(i), a.mu_min_moment(i));
            assert_eq!(merged.fmax_moment(i), a.fmax_moment(i));
        }
        assert_eq!(merged.count_max(), a.count_max());

        let mut b = MomentAccumulators::shard(3, &spec).unwrap();
        b.ingest_segment(&seg(500, 1500)).unwrap();
        assert!(matches!(a.merge(&b), Err(Error::Contract(_))));
        let mut c = MomentAccumulators::shard(3, &spec).unwrap();
        c.ingest_segment(&seg(1000, 1500)).unwrap();
        let mut fresh = make_accumulators(3, &spec).unwrap();
        assert!(matches!(fresh.merge(&c), Err(Error::Contract(_))));
        let counts = (a.count_min() + c.count_min(), a.count_total() + c.count_total());
        a.merge(&c).unwrap();
        assert_eq!((a.count_min(), a.count_total()), counts);
        let other_spec = make_accumulators(3, &PrimeSetSpec::All).unwrap();
        assert!(matches!(a.merge(&other_spec), Err(Error::Contract(_))));
    }

    fn ulps(a: f64, b: f64) -> u64 {
        if a == b {
            return 0;
        }
        let ia = a.to_bits() as i64;
        let ib = b.to_bits() as i64;
        if (ia < 0) != (ib < 0) {
            return u64::MAX;
        }
        ia.abs_diff(ib)
    }

    #[test]
    fn sharded_equals_sequential_within_one_ulp() {
        let table = prime_table_for(1 << 21).unwrap();
        let whole = sieve_segment(1, 1 << 21, &table).unwrap();
        let left = sieve_segment(1, 1 << 20, &table).unwrap();
        let right = sieve_segment(1 << 20, 1 << 21, &table).unwrap();
        for spec in [
            PrimeSetSpec::All,
            PrimeSetSpec::ap(3, 2).unwrap(),
            PrimeSetSpec::ap(4, 1).unwrap(),
        ] {
            let mut seq = make_accumulators(6, &spec).unwrap();
            seq.ingest_segment(&whole).unwrap();
            let mut a = make_accumulators(6, &spec).unwrap();
            a.ingest_segment(&left).unwrap();
            let mut b = MomentAccumulators::shard(6, &spec).unwrap();
            b.ingest_segment(&right).unwrap();
            let m = merge_accumulators(&a, &b).unwrap();
            for i in 0..=6 {
                for (x, y) in [
                    (m.mu_moment(i), seq.mu_moment(i)),
                    (m.mu_min_moment(i), seq.mu_min_moment(i)),
                    (m.mu_max_moment(i), seq.mu_max_moment(i)),
                    (m.fmin_moment(i), seq.fmin_moment(i)),
                    (m.fmax_moment(i), seq.fmax_moment(i)),
                    (m.harm_moment(i), seq.harm_moment(i)),
                ] {
                    assert!(ulps(x, y) <= 1, "{spec} i={i}: {x} vs {y}");
                }
            }
            assert!(ulps(m.aj_sum(), seq.aj_sum()) <= 1);
            assert_eq!(m.count_max(), seq.count_max());
            assert_eq!(m.n_processed(), seq.n_processed());
        }
    }
}
