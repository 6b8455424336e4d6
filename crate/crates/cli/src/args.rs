use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError};

pub const SEED_ENV: &str = "GRAVLAM_SEED";
pub const DEFAULT_SEED: u64 = 42;
/// Electron mass, kg.
pub const DEFAULT_MASS: f64 = 9.109_383_701_5e-31;

#[derive(Debug, Parser)]
#[command(name = "gravlam", version, about = "Gravitational-background hidden-variable model of Bell correlations")]
pub struct Cli {
    /// Worker threads for Monte Carlo sampling. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// JSON file of default flag values (same names as the flags, with
    /// underscores). Explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation M(theta) between two analyzers.
    Correlation(CorrelationArgs),
    /// Bell observable S for four analyzer angles, with bound checks.
    Chsh(ChshArgs),
    /// S along the family a=0, a'=-2phi, b=-phi, b'=phi.
    Sweep(SweepArgs),
    /// Separation of a particle pair driven by a sampled background.
    Deviation(DeviationArgs),
    /// Dump a sampled background ensemble as JSON.
    Background(BackgroundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    SignModel,
    SignPopulation,
}

impl MethodArg {
    pub fn is_sampled(self) -> bool {
        matches!(self, MethodArg::MonteCarlo | MethodArg::SignModel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `self` wins field by field; boolean switches are OR-ed.
macro_rules! merge_over {
    ($ty:ty { $($opt:ident),* $(,)? } switches { $($flag:ident),* $(,)? }) => {
        impl $ty {
            pub fn merged_over(self, base: Self) -> Self {
                Self {
                    $($opt: self.$opt.or(base.$opt),)*
                    $($flag: self.$flag || base.$flag,)*
                }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationArgs {
    /// Angle between the analyzers, radians (degrees with --degrees).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Estimator.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo sample count (>= 100).
    #[arg(long)]
    pub n: Option<usize>,
    /// Random seed. Defaults to $GRAVLAM_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simpson panels for quadrature (even, >= 8).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Read angles in degrees instead of radians.
    #[arg(long)]
    pub degrees: bool,
    /// Output file for the result.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
merge_over!(CorrelationArgs { theta, method, n, seed, panels, out, format } switches { degrees });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChshArgs {
    /// Analyzer a, radians (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Analyzer a', radians (default -pi/2).
    #[arg(long, allow_negative_numbers = true)]
    pub a_prime: Option<f64>,
    /// Analyzer b, radians (default -pi/4).
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Analyzer b', radians (default pi/4).
    #[arg(long, allow_negative_numbers = true)]
    pub b_prime: Option<f64>,
    /// Estimator.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo samples per correlation (>= 100).
    #[arg(long)]
    pub n: Option<usize>,
    /// Random seed. Defaults to $GRAVLAM_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simpson panels for quadrature (even, >= 8).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Read angles in degrees instead of radians.
    #[arg(long)]
    pub degrees: bool,
    /// Output file for the result.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
merge_over!(ChshArgs { a, a_prime, b, b_prime, method, n, seed, panels, out, format } switches { degrees });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    /// Start of the phi range, radians (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_min: Option<f64>,
    /// End of the phi range, radians (default pi/2).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_max: Option<f64>,
    /// Number of intervals; the grid has steps + 1 points (default 360).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Estimator.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo samples per correlation (>= 100).
    #[arg(long)]
    pub n: Option<usize>,
    /// Random seed. Defaults to $GRAVLAM_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simpson panels for quadrature (even, >= 8).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Read angles in degrees instead of radians.
    #[arg(long)]
    pub degrees: bool,
    /// Output file for the sweep table.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
merge_over!(SweepArgs { phi_min, phi_max, steps, method, n, seed, panels, out, format } switches { degrees });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviationArgs {
    /// Lowest mode frequency, rad/s (default 2pi).
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Highest mode frequency, rad/s (default omega_min).
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Strain of every mode, dimensionless, <= 1e-3 (default 1e-6).
    #[arg(long)]
    pub strain: Option<f64>,
    /// Number of background modes (default 1).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Rest separation of the pair, m (default 1).
    #[arg(long)]
    pub ell0: Option<f64>,
    /// Integration span, s (default 1).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Time step, s; requires omega_max * dt <= 0.1 (default 1e-3).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Particle mass for the Heisenberg diagnostic, kg (default electron mass).
    #[arg(long)]
    pub mass: Option<f64>,
    /// Random seed. Defaults to $GRAVLAM_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file for the trajectory.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
merge_over!(DeviationArgs { omega_min, omega_max, strain, modes, ell0, t_max, dt, mass, seed, out, format } switches {});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundArgs {
    /// Lowest mode frequency, rad/s (default 1).
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Highest mode frequency, rad/s (default 1000).
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Strain of every mode, dimensionless, <= 1e-3 (default 1e-6).
    #[arg(long)]
    pub strain: Option<f64>,
    /// Number of modes (default 1000).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Random seed. Defaults to $GRAVLAM_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; the ensemble is written to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
merge_over!(BackgroundArgs { omega_min, omega_max, strain, modes, seed, out } switches {});

/// Reads a config file into the argument struct of the running subcommand.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("--config {}: {e}", path.display())))
}

/// Flag, then config value, then `$GRAVLAM_SEED`, then the built-in default.
pub fn resolve_seed(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            v.trim().parse().map_err(|_| usage(format!("{SEED_ENV} must be an unsigned 64-bit integer, got {v:?}")))
        }
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn to_radians(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

pub fn finite(value: f64, flag: &str) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("{flag} must be finite, got {value}")))
    }
}

impl CorrelationArgs {
    pub fn with_defaults(mut self) -> Result<Self, CliError> {
        if self.theta.is_none() {
            return Err(usage("--theta is required"));
        }
        self.method.get_or_insert(MethodArg::ClosedForm);
        self.n.get_or_insert(1_000_000);
        self.panels.get_or_insert(64);
        self.seed = Some(resolve_seed(self.seed)?);
        self.format.get_or_insert(Format::Csv);
        Ok(self)
    }
}

impl ChshArgs {
    pub fn with_defaults(mut self) -> Result<Self, CliError> {
        // defaults are given in the unit the user selected
        let unit = |rad: f64| if self.degrees { rad.to_degrees() } else { rad };
        let (a, ap, b, bp) = (unit(0.0), unit(-FRAC_PI_2), unit(-PI / 4.0), unit(PI / 4.0));
        self.a.get_or_insert(a);
        self.a_prime.get_or_insert(ap);
        self.b.get_or_insert(b);
        self.b_prime.get_or_insert(bp);
        self.method.get_or_insert(MethodArg::ClosedForm);
        self.n.get_or_insert(1_000_000);
        self.panels.get_or_insert(64);
        self.seed = Some(resolve_seed(self.seed)?);
        self.format.get_or_insert(Format::Csv);
        Ok(self)
    }
}

impl SweepArgs {
    pub fn with_defaults(mut self) -> Result<Self, CliError> {
        let upper = if self.degrees { 90.0 } else { FRAC_PI_2 };
        self.phi_min.get_or_insert(0.0);
        self.phi_max.get_or_insert(upper);
        self.steps.get_or_insert(360);
        self.method.get_or_insert(MethodArg::ClosedForm);
        self.n.get_or_insert(100_000);
        self.panels.get_or_insert(64);
        self.seed = Some(resolve_seed(self.seed)?);
        self.format.get_or_insert(Format::Csv);
        Ok(self)
    }
}

impl DeviationArgs {
    pub fn with_defaults(mut self) -> Result<Self, CliError> {
        let omega_min = *self.omega_min.get_or_insert(TAU);
        self.omega_max.get_or_insert(omega_min);
        self.strain.get_or_insert(1e-6);
        self.modes.get_or_insert(1);
        self.ell0.get_or_insert(1.0);
        self.t_max.get_or_insert(1.0);
        self.dt.get_or_insert(1e-3);
        self.mass.get_or_insert(DEFAULT_MASS);
        self.seed = Some(resolve_seed(self.seed)?);
        self.format.get_or_insert(Format::Csv);
        Ok(self)
    }
}

impl BackgroundArgs {
    pub fn with_defaults(mut self) -> Result<Self, CliError> {
        self.omega_min.get_or_insert(1.0);
        self.omega_max.get_or_insert(1e3);
        self.strain.get_or_insert(1e-6);
        self.modes.get_or_insert(1000);
        self.seed = Some(resolve_seed(self.seed)?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_win_over_config() {
        let flags = SweepArgs { steps: Some(10), ..Default::default() };
        let config: SweepArgs = serde_json::from_str(r#"{"steps": 99, "phi_max": 1.0, "degrees": true}"#).unwrap();
        let merged = flags.merged_over(config);
        assert_eq!(merged.steps, Some(10));
        assert_eq!(merged.phi_max, Some(1.0));
        assert!(merged.degrees);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<ChshArgs>(r#"{"angle": 1.0}"#).is_err());
        let m: ChshArgs = serde_json::from_str(r#"{"method": "sign-model", "a_prime": 0.5}"#).unwrap();
        assert_eq!(m.method, Some(MethodArg::SignModel));
        assert_eq!(m.a_prime, Some(0.5));
    }

    #[test]
    fn degree_defaults_follow_unit() {
        let a = ChshArgs { degrees: true, seed: Some(1), ..Default::default() }.with_defaults().unwrap();
        assert_eq!(a.a_prime, Some(-90.0));
        assert!((to_radians(a.b_prime.unwrap(), true) - PI / 4.0).abs() < 1e-15);
    }
}
