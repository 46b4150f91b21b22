use mobius_core::sieve::{prime_table_for, sieve_segment, FactorSegment};
use mobius_core::sums::run_convergence;
use mobius_core::{Command, ExperimentConfig, PrimeSetSpec};

/// Both sides of `Σ μ f(P⁻) logᵏn/n = k Σ f(P⁺) logᵏ⁻¹n/n − (logᵏx/x) Σ f(P⁺(n))`,
/// each recomputed from scratch over `n ≤ x`. Returns `(lhs − rhs, |terms|)`.
fn literal(seg: &FactorSegment, spec: &PrimeSetSpec, x: u64, k: i32) -> (f64, f64) {
    // first pass: the plain count on the right
    let count = (1..=x).filter(|&n| spec.contains(seg.record(n).lpf)).count() as f64;
    let lx = (x as f64).ln();
    let mut a = 0.0;
    let mut b = 0.0;
    for n in 1..=x {
        let r = seg.record(n);
        let ln = (n as f64).ln();
        if spec.contains(r.spf) {
            a += r.mu as f64 * ln.powi(k) / n as f64;
        }
        if spec.contains(r.lpf) {
            b += k as f64 * ln.powi(k - 1) / n as f64;
        }
    }
    let c = lx.powi(k) / x as f64 * count;
    (a - (b - c), a.abs() + b.abs() + c.abs())
}

#[test]
fn moment_path_matches_two_pass_literal() {
    let x_max = 100_000;
    let seg = sieve_segment(1, x_max + 1, &prime_table_for(x_max).unwrap()).unwrap();
    for s in ["all", "ap:3,2", "ap:4,1", "finite:2,5"] {
        let mut cfg = ExperimentConfig::new(Command::Converge);
        cfg.n_max = x_max;
        cfg.k_max = 3;
        cfg.spec = s.parse().unwrap();
        cfg.threads = 1;
        let table = run_convergence(&cfg).unwrap();
        for row in &table.rows {
            let lx = (row.x as f64).ln();
            for k in 1..=3 {
                let fast = row.duality_resid[k - 1] * lx.powi(k as i32);
                let (slow, scale) = literal(&seg, &cfg.spec, row.x, k as i32);
                assert!(
                    (fast - slow).abs() <= 1e-6 * scale,
                    "{s} x={} k={k}: {fast} vs {slow}",
                    row.x
                );
            }
        }
    }
}
