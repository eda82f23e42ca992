use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qwiener",
    version,
    about = "Wiener-type exponents, capacities and sharpness sweeps"
)]
pub struct Cli {
    /// Output file; stdout when omitted. Commands that emit two files write
    /// the companion next to it with the other extension.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Pass threshold for the command's error measure; exceeding it prints a
    /// warning on stderr.
    #[arg(long, global = true, value_parser = parse_real)]
    pub tolerance: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Format::Csv => Format::Json,
            Format::Json => Format::Csv,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponents attached to (Q, p).
    Exponents(ExponentsArgs),
    /// Classify a capacity profile by its Wiener-type sum.
    Wiener(WienerArgs),
    /// Radial condenser capacity, or a capacity-density profile.
    Capacity(CapacityArgs),
    /// Brute-force best constants of x^alpha against the formula.
    VerifyPower(VerifyPowerArgs),
    /// Sweep of the u_eps potentials and the fitted exponent.
    Sharpness(SharpnessArgs),
    /// Run every acceptance check.
    Selftest,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long = "Q", alias = "q", value_parser = parse_real)]
    pub q: f64,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Ball,
    PowerDecay,
    Csv,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum)]
    pub profile: Option<ProfileKind>,
    /// Dimension of the model geometry.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Ratio of consecutive radii.
    #[arg(long, value_parser = parse_real, default_value = "1/2")]
    pub lambda: f64,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub r0: f64,
    /// Decay rate of the power-decay profile.
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub a: f64,
    /// Prefactor of the power-decay profile; defaults to min(1, full-ball density).
    #[arg(long, value_parser = parse_real)]
    pub scale: Option<f64>,
    /// Profile CSV with header `j,r_j,kappa_j`.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WienerArgs {
    #[arg(long = "Q", alias = "q", value_parser = parse_real)]
    pub q: f64,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub eps: f64,
    /// Number of terms; defaults to the file length for CSV profiles.
    #[arg(long = "K", alias = "k")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, value_parser = parse_real)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub r: Option<f64>,
    /// Also run the discrete oracle on this many grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Profile length when `--profile` is given.
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[command(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args)]
pub struct VerifyPowerArgs {
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long = "Q", alias = "q", value_parser = parse_real)]
    pub q: f64,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, value_parser = parse_real)]
    pub eps_min: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub eps_max: Option<f64>,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub outer_radius: f64,
    /// Also compare the iterated estimate with this delta.
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub c: f64,
}

/// Parses a decimal or a `num/den` rational.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            num / den
        }
        None => s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_real("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(parse_real(" 16 / 7 ").unwrap(), 16.0 / 7.0);
        assert_eq!(parse_real("2.5").unwrap(), 2.5);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("x/2").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
