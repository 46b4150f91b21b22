use mobius_core::exact::{lcm_upto, mertens_exact, HyperbolaOracle, Side};
use mobius_core::sieve::{divisor_table, prime_table_for, sieve_segment};
use mobius_core::sums::{eval_statistics, make_accumulators};
use mobius_core::{FSpec, PrimeSetSpec, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

const X_MAX: u64 = 10_000;

#[test]
fn streaming_mertens_matches_exact_everywhere() {
    let table = prime_table_for(X_MAX).unwrap();
    let all = sieve_segment(1, X_MAX + 1, &table).unwrap();
    let l = lcm_upto(X_MAX);
    let mut num = BigInt::from(0);
    let mut acc = make_accumulators(0, &PrimeSetSpec::All).unwrap();
    let mut worst = 0.0f64;
    for x in 1..=X_MAX {
        let rec = all.record(x);
        num += &l / BigInt::from(x) * BigInt::from(rec.mu);
        acc.ingest_segment(&sieve_segment(x, x + 1, &table).unwrap()).unwrap();
        if x < 2 {
            continue;
        }
        let exact = Rational::new(num.clone(), l.clone()).to_f64().unwrap();
        let float = eval_statistics(&acc, x).unwrap().m;
        worst = worst.max((float - exact).abs());
    }
    assert!(worst <= 1e-12, "max |M_float - M_exact| = {worst:e}");
    for x in [2u64, 97, 1000, X_MAX] {
        let mut acc = make_accumulators(0, &PrimeSetSpec::All).unwrap();
        acc.ingest_segment(&sieve_segment(1, x + 1, &table).unwrap()).unwrap();
        let exact = mertens_exact(x).to_f64().unwrap();
        assert!((eval_statistics(&acc, x).unwrap().m - exact).abs() <= 1e-12);
    }
}

/// `Σ_{m≤y} d_j(m)/m` in floating point for every `y ≤ x_max`.
fn big_d_float(j: u32, x_max: u64) -> Vec<f64> {
    let d = divisor_table(j, x_max).unwrap();
    let mut out = vec![0.0; x_max as usize + 1];
    for y in 1..=x_max {
        out[y as usize] = out[y as usize - 1] + d.get(y) as f64 / y as f64;
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1e-300)
}

#[test]
fn floating_hyperbola_sums_match_exact() {
    let x_max = 2000;
    let oracle = HyperbolaOracle::new(x_max, 3).unwrap();
    let seg = sieve_segment(1, x_max + 1, &prime_table_for(x_max).unwrap()).unwrap();
    let big_d: Vec<Vec<f64>> = (0..=3).map(|j| big_d_float(j, x_max)).collect();
    let specs = ["all", "ap:3,2", "ap:4,1"];
    for k in 1..=3u32 {
        for x in [1u64, 2, 10, 99, 500, 1234, 2000] {
            let mut mu_lhs = 0.0;
            for n in 1..=x {
                mu_lhs += seg.mu()[n as usize - 1] as f64 / n as f64 * big_d[k as usize][(x / n) as usize];
            }
            let (l, r) = oracle.mu_sides(x, k).unwrap();
            assert!(close(mu_lhs, l.to_f64().unwrap()), "mu lhs x={x} k={k}");
            assert!(close(big_d[k as usize - 1][x as usize], r.to_f64().unwrap()));

            for s in specs {
                let spec: PrimeSetSpec = s.parse().unwrap();
                let f = FSpec::indicator(spec.clone());
                for side in [Side::Min, Side::Max] {
                    let w = oracle.prepare(&f, side);
                    let (el, er) = oracle.duality_sides(x, k, &w).unwrap();
                    let (mut fl, mut fr) = (0.0, 0.0);
                    for n in 1..=x {
                        let rec = seg.record(n);
                        let (a, b) = match side {
                            Side::Min => (rec.spf, rec.lpf),
                            Side::Max => (rec.lpf, rec.spf),
                        };
                        let q = (x / n) as usize;
                        if spec.contains(a) {
                            fl += rec.mu as f64 / n as f64 * big_d[k as usize][q];
                        }
                        if spec.contains(b) {
                            fr -= big_d[k as usize - 1][q] / n as f64;
                        }
                    }
                    let (el, er) = (el.to_f64().unwrap(), er.to_f64().unwrap());
                    if el == 0.0 {
                        assert!(fl.abs() < 1e-12);
                    } else {
                        assert!(close(fl, el), "{s} {side:?} x={x} k={k}: {fl} vs {el}");
                    }
                    if er != 0.0 {
                        assert!(close(fr, er), "{s} {side:?} x={x} k={k}: {fr} vs {er}");
                    }
                }
            }
        }
    }
}
