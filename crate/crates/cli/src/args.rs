use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mobius_core::{
    CheckpointSchedule, Command, Error, ExperimentConfig, OutputFormat, PrimeSetSpec,
    SideSelection,
};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "mobius", version, about = "Möbius duality and convergence workbench")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Exhaustive exact-rational identity sweeps.
    VerifyExact(Opts),
    /// |M(x)| ≤ 1 and the 3 + γ log bound at every x ≤ n-max.
    VerifyBounds(Opts),
    /// Checkpointed partial-sum statistics up to n-max.
    Converge(Opts),
    /// Share of primes up to n-max that lie in the prime set.
    Density(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// Upper limit; scientific notation such as 1e8 is accepted.
    #[arg(long, value_parser = parse_count)]
    n_max: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    k_max: Option<u64>,
    /// all | ap:K,L | finite:P1,P2,...
    #[arg(long, value_parser = parse_with::<PrimeSetSpec>)]
    spec: Option<PrimeSetSpec>,
    #[arg(long, value_parser = parse_with::<SideSelection>)]
    side: Option<SideSelection>,
    /// geometric:N for N points per decade.
    #[arg(long, value_parser = parse_with::<CheckpointSchedule>)]
    checkpoints: Option<CheckpointSchedule>,
    #[arg(long, value_parser = parse_with::<OutputFormat>)]
    output: Option<OutputFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, value_parser = parse_count)]
    threads: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    segment_length: Option<u64>,
}

fn parse_with<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr<Err = Error>,
{
    s.parse().map_err(|e: Error| match e {
        Error::Validation { message, .. } => message,
        other => other.to_string(),
    })
}

/// Non-negative integer, plain or in scientific notation (`1e8`, `2.5e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("'{s}' is not a non-negative integer"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > (1u64 << 53) as f64 {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn flag_for(field: &str) -> &'static str {
    match field {
        "n_max" => "--n-max",
        "k_max" => "--k-max",
        "segment_length" => "--segment-length",
        "checkpoints" => "--checkpoints",
        "side" => "--side",
        "output" => "--output",
        _ => "--spec",
    }
}

/// Parses a full argument vector (program name first) into a validated config.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, o) = match cli.command {
        Sub::VerifyExact(o) => (Command::VerifyExact, o),
        Sub::VerifyBounds(o) => (Command::VerifyBounds, o),
        Sub::Converge(o) => (Command::Converge, o),
        Sub::Density(o) => (Command::Density, o),
    };
    let mut cfg = ExperimentConfig::new(command);
    if let Some(v) = o.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = o.k_max {
        cfg.k_max = usize::try_from(v).unwrap_or(usize::MAX);
    }
    if let Some(v) = o.spec {
        cfg.spec = v;
    }
    if let Some(v) = o.side {
        cfg.side = v;
    }
    if let Some(v) = o.checkpoints {
        cfg.checkpoints = v;
    }
    if let Some(v) = o.output {
        cfg.output = v;
    }
    cfg.output_path = o.out;
    if let Some(v) = o.threads {
        cfg.threads = usize::try_from(v).unwrap_or(usize::MAX);
    }
    if let Some(v) = o.segment_length {
        cfg.segment_length = usize::try_from(v).unwrap_or(usize::MAX);
    }
    cfg.validate().map_err(|e| match e {
        Error::Validation { field, message } => {
            CliError::Usage(format!("{}: {message}", flag_for(field)))
        }
        other => CliError::Usage(other.to_string()),
    })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e8"), Ok(100_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("1e30").is_err());
    }

    #[test]
    fn spec_example() {
        let cfg = parse_args(["mobius", "converge", "--spec", "ap:3,2", "--n-max", "1e8", "--k-max", "3"])
            .unwrap();
        assert_eq!(cfg.command, Command::Converge);
        assert_eq!(cfg.n_max, 100_000_000);
        assert_eq!(cfg.k_max, 3);
        assert_eq!(cfg.spec, PrimeSetSpec::ap(3, 2).unwrap());
    }

    #[test]
    fn errors_name_the_flag() {
        let e = parse_args(["mobius", "converge", "--spec", "ap:4,2"]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("gcd(residue,modulus) must be 1"), "{msg}");
        assert!(msg.contains("--spec"), "{msg}");
        let msg = parse_args(["mobius", "converge", "--n-max", "1"]).unwrap_err().to_string();
        assert!(msg.contains("--n-max"), "{msg}");
        let msg = parse_args(["mobius", "density", "--segment-length", "1000"])
            .unwrap_err()
            .to_string();
        assert!(msg.contains("--segment-length"), "{msg}");
        assert!(parse_args(["mobius", "converge", "--bogus"]).is_err());
        assert!(parse_args(["mobius", "converge", "--spec", "ap:3"]).is_err());
    }
}
