//! Argument parsing and command dispatch for the `mobius` binary.

use std::fs;
use std::io::{self, Write};

use mobius_core::exact::{
    standard_family, sweep_duality, sweep_duality_k, sweep_harmonic_fold, sweep_hyperbola_duality,
    sweep_hyperbola_mu, sweep_mertens, sweep_mobius_inversion, CheckReport, ExactCaps,
};
use mobius_core::primeset::empirical_prime_density;
use mobius_core::sieve::build_prime_table;
use mobius_core::sums::{
    bound_sweep, gamma_extrapolation, harmonic_envelope_sweep, run_convergence, EULER_GAMMA,
    VERSION,
};
use mobius_core::{Command, ExperimentConfig, FSpec, OutputFormat};
use serde_json::{json, Value};

mod args;

pub use args::{parse_args, parse_count};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Rejected command line; `clap` errors include `--help` and `--version`.
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mobius_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }
}

/// What a finished command found.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One line per failed check; empty means success.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Runs `cfg`, writing the report to `cfg.output_path` or stdout and the
/// summary to stdout or stderr respectively.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let stdout = io::stdout();
    let stderr = io::stderr();
    if cfg.output_path.is_some() {
        run_with(cfg, &mut stdout.lock(), &mut stdout.lock())
    } else {
        run_with(cfg, &mut stdout.lock(), &mut stderr.lock())
    }
}

/// [`run`] with explicit sinks: `report` receives the artifact unless an
/// output path is set, `summary` the human-readable table.
pub fn run_with(
    cfg: &ExperimentConfig,
    report: &mut dyn Write,
    summary: &mut dyn Write,
) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let (artifact, outcome) = match cfg.command {
        Command::VerifyExact => verify_exact(cfg, summary)?,
        Command::VerifyBounds => verify_bounds(cfg, summary)?,
        Command::Converge => converge(cfg, summary)?,
        Command::Density => density(cfg, summary)?,
    };
    match &cfg.output_path {
        Some(path) => {
            fs::write(path, artifact)?;
            writeln!(summary, "report written to {}", path.display())?;
        }
        None => report.write_all(artifact.as_bytes())?,
    }
    if !outcome.failures.is_empty() {
        writeln!(summary, "FAILED: {} check(s)", outcome.failures.len())?;
        for f in &outcome.failures {
            writeln!(summary, "  {f}")?;
        }
    }
    Ok(outcome)
}

fn meta(cfg: &ExperimentConfig) -> Value {
    json!({
        "config": cfg,
        "version": VERSION,
        "config_hash": cfg.config_hash(),
    })
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn verify_exact(
    cfg: &ExperimentConfig,
    summary: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    let caps = ExactCaps::default();
    let n = cfg.n_max;
    let k_max = cfg.k_max as u32;
    let sides = cfg.side.sides();
    let mut fs = standard_family();
    let own = FSpec::indicator(cfg.spec.clone());
    if !fs.contains(&own) {
        fs.push(own);
    }

    let mut reports: Vec<CheckReport> = Vec::new();
    reports.extend(sweep_duality(n.min(caps.duality_n_max), &fs, &sides)?);
    if k_max >= 1 {
        reports.extend(sweep_duality_k(n.min(caps.duality_k_n_max), k_max, &fs, &sides)?);
        let x = n.min(caps.hyperbola_x_max);
        reports.extend(sweep_hyperbola_duality(x, k_max, &fs, &sides)?);
        reports.extend(sweep_hyperbola_mu(x, k_max)?);
        reports.extend(sweep_mobius_inversion(n.min(caps.convolution_n_max), k_max)?);
    }
    reports.push(sweep_mertens(n.min(caps.mertens_x_max))?);
    reports.push(sweep_harmonic_fold(n.min(caps.harmonic_fold_x_max))?);

    writeln!(summary, "{:<20} {:<44} {:>8} {:>6} {:>9}", "identity", "params", "x_max", "status", "failures")?;
    let mut failures = Vec::new();
    for r in &reports {
        writeln!(
            summary,
            "{:<20} {:<44} {:>8} {:>6} {:>9}",
            r.identity,
            r.params.to_string(),
            r.x_max,
            status(r.passed()),
            r.failures.len()
        )?;
        for f in &r.failures {
            failures.push(format!("{} {} at {}: {} != {}", r.identity, r.params, f.at, f.lhs, f.rhs));
        }
    }

    let artifact = match cfg.output {
        OutputFormat::Json => {
            let v = json!({
                "meta": meta(cfg),
                "caps": caps,
                "status": status(failures.is_empty()),
                "failure_count": failures.len(),
                "checks": reports,
            });
            pretty(&v)
        }
        OutputFormat::Csv => {
            let mut s = String::from("identity,params,x_max,status,failures\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},\"{}\",{},{},{}\n",
                    r.identity,
                    r.params.to_string().replace('"', "\"\""),
                    r.x_max,
                    status(r.passed()),
                    r.failures.len()
                ));
            }
            s
        }
    };
    Ok((artifact, Outcome { failures }))
}

/// Harmonic envelope is checked on `10 ≤ x ≤ min(n_max, 10⁶)`.
const HARMONIC_X_MIN: u64 = 10;
const HARMONIC_X_MAX: u64 = 1_000_000;
const GAMMA_N: u64 = 1_000_000;

fn verify_bounds(
    cfg: &ExperimentConfig,
    summary: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    let bounds = bound_sweep(cfg.n_max)?;
    let harmonic = (cfg.n_max >= HARMONIC_X_MIN)
        .then(|| harmonic_envelope_sweep(HARMONIC_X_MIN, cfg.n_max.min(HARMONIC_X_MAX)));
    let gamma_est = gamma_extrapolation(GAMMA_N);
    let gamma_envelope = 1.0 / (12.0 * (GAMMA_N as f64).powi(2)) + 1e-14;
    let gamma_ok = (gamma_est - EULER_GAMMA).abs() <= gamma_envelope;

    let mut failures: Vec<String> = bounds
        .violations
        .iter()
        .map(|v| format!("{} at {}: |{}| > {}", v.bound, v.x, v.value, v.limit))
        .collect();
    if let Some(h) = &harmonic {
        failures.extend(
            h.violations
                .iter()
                .map(|x| format!("harmonic at {x}: |h(x) - log x - gamma| > 1/x")),
        );
    }
    if !gamma_ok {
        failures.push(format!("gamma: extrapolated {gamma_est} vs constant {EULER_GAMMA}"));
    }

    writeln!(summary, "{:<12} {:>12} {:>14} {:>12} {:>12}", "bound", "x_max", "max |value|", "argmax", "limit")?;
    writeln!(
        summary,
        "{:<12} {:>12} {:>14.6e} {:>12} {:>12}",
        "mertens", bounds.x_max, bounds.mertens_max_abs, bounds.mertens_argmax, 1
    )?;
    writeln!(
        summary,
        "{:<12} {:>12} {:>14.6e} {:>12} {:>12.6}",
        "log_gap", bounds.x_max, bounds.log_gap_max_abs, bounds.log_gap_argmax, bounds.log_gap_limit
    )?;
    if let Some(h) = &harmonic {
        writeln!(
            summary,
            "{:<12} {:>12} {:>14.6e} {:>12} {:>12}",
            "harmonic*x", h.x_max, h.max_scaled_error, "", 1
        )?;
    }
    writeln!(summary, "status: {}", status(failures.is_empty()))?;

    let artifact = match cfg.output {
        OutputFormat::Json => pretty(&json!({
            "meta": meta(cfg),
            "status": status(failures.is_empty()),
            "failure_count": failures.len(),
            "bounds": bounds,
            "harmonic": harmonic,
            "gamma": {
                "n": GAMMA_N,
                "extrapolated": gamma_est,
                "constant": EULER_GAMMA,
                "envelope": gamma_envelope,
                "status": status(gamma_ok),
            },
        })),
        OutputFormat::Csv => {
            let mut s = String::from("check,x_max,max_abs,argmax,limit,violations\n");
            let count = |name: &str| bounds.violations.iter().filter(|v| v.bound == name).count();
            s.push_str(&format!(
                "mertens,{},{},{},1,{}\n",
                bounds.x_max, bounds.mertens_max_abs, bounds.mertens_argmax, count("mertens")
            ));
            s.push_str(&format!(
                "log_gap,{},{},{},{},{}\n",
                bounds.x_max,
                bounds.log_gap_max_abs,
                bounds.log_gap_argmax,
                bounds.log_gap_limit,
                count("log_gap")
            ));
            if let Some(h) = &harmonic {
                s.push_str(&format!(
                    "harmonic_scaled,{},{},,1,{}\n",
                    h.x_max,
                    h.max_scaled_error,
                    h.violations.len()
                ));
            }
            s
        }
    };
    Ok((artifact, Outcome { failures }))
}

fn converge(
    cfg: &ExperimentConfig,
    summary: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    let table = run_convergence(cfg)?;
    writeln!(summary, "spec {}  checkpoints {}  config {}", table.spec, table.rows.len(), table.meta.config_hash)?;
    writeln!(
        summary,
        "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "x", "M", "alladi_sum", "aj", "cesaro_max", "L_min[1]"
    )?;
    for r in &table.rows {
        writeln!(
            summary,
            "{:>12} {:>12.4e} {:>12.6} {:>12.4e} {:>12.6} {:>12}",
            r.x,
            r.m,
            r.alladi_sum,
            r.aj,
            r.cesaro_max,
            r.l_min.first().map_or(String::from("-"), |v| format!("{v:.4e}"))
        )?;
    }
    let artifact = match cfg.output {
        OutputFormat::Json => pretty(&table.to_json()),
        OutputFormat::Csv => table.to_csv_string(),
    };
    Ok((artifact, Outcome { failures: Vec::new() }))
}

fn density(
    cfg: &ExperimentConfig,
    summary: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    let table = build_prime_table(cfg.n_max)?;
    let rep = empirical_prime_density(&cfg.spec, cfg.n_max, &table)?;
    writeln!(summary, "spec {}  x {}", cfg.spec, rep.x)?;
    writeln!(summary, "pi(x) {}  pi_S(x) {}", rep.pi_x, rep.pi_s_x)?;
    writeln!(
        summary,
        "ratio {}  expected {}",
        rep.ratio,
        rep.expected.as_deref().unwrap_or("-")
    )?;
    let artifact = match cfg.output {
        OutputFormat::Json => pretty(&json!({ "meta": meta(cfg), "density": rep })),
        OutputFormat::Csv => format!(
            "x,pi_x,pi_s_x,ratio,expected\n{},{},{},{},{}\n",
            rep.x,
            rep.pi_x,
            rep.pi_s_x,
            rep.ratio,
            rep.expected.as_deref().unwrap_or("")
        ),
    };
    Ok((artifact, Outcome { failures: Vec::new() }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}
