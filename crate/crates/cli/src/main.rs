//! `experiments` - command-line front end for the squeezed-cavity model.
//!
//! Each subcommand reproduces one family of data tables (time traces,
//! parameter maps, steady-state tables) or runs the brute-force Lindblad
//! validation. Running a subcommand with no flags uses the checked-in
//! default configuration for that family.

mod commands;
mod config;
mod table;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overlay;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config files or parameter domains (exit code 2).
    Input(String),
    /// A validation run exceeded its tolerances (exit code 1).
    Validation(String),
    /// Filesystem trouble (exit code 2).
    Io(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

macro_rules! input_error_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}
input_error_from!(
    squeeze_core::sts::ModelError,
    squeeze_core::pump::PumpError,
    squeeze_core::ode::OdeError,
    squeeze_core::analytic::EngineError,
    squeeze_core::oracle::OracleError
);

#[derive(Parser)]
#[command(
    name = "experiments",
    version,
    about = "Squeezed-state generation in a lossy cavity coupled to a thermal bath",
    after_help = "Times are reported in units of the cavity lifetime (column gamma_t = G t). \
                  Each subcommand ships defaults in crates/cli/configs/<subcommand>.conf; \
                  --config overrides them file-wide and explicit flags win over both."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Pump ratio g0; comma-separated list where the command sweeps it
    #[arg(long, value_name = "F[,F...]")]
    g0: Option<String>,
    /// Bath population(s), comma separated
    #[arg(long, value_name = "F[,F...]")]
    nb: Option<String>,
    /// Initial thermal population n_th(0); default is equilibrium with the bath
    #[arg(long, value_name = "F")]
    nth0: Option<f64>,
    /// Gaussian pump width (Gt units)
    #[arg(long, value_name = "F")]
    sigma: Option<f64>,
    /// Gaussian pump center (Gt units)
    #[arg(long, value_name = "F")]
    to: Option<f64>,
    /// Time horizon (Gt units)
    #[arg(long, value_name = "F")]
    tmax: Option<f64>,
    /// Output grid spacing (Gt units)
    #[arg(long, value_name = "F")]
    dt_out: Option<f64>,
    /// Fock truncation dimension; 0 selects automatically
    #[arg(long, value_name = "N")]
    dim: Option<usize>,
    /// Integrator relative tolerance
    #[arg(long, value_name = "F")]
    rtol: Option<f64>,
    /// Integrator absolute tolerance
    #[arg(long, value_name = "F")]
    atol: Option<f64>,
    /// Bound on the truncation tail mass
    #[arg(long, value_name = "F")]
    tail_tol: Option<f64>,
    /// Output directory (tables land in `<out>/<subcommand>/`)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, value_name = "csv|json")]
    format: Option<String>,
    /// Config file with `key = value` lines mirroring the flags
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sampled pump envelope from a CSV with header `t,g` (cw only)
    #[arg(long, value_name = "PATH")]
    pump_csv: Option<PathBuf>,
    /// Negative control: flip the squeezing phase by pi before comparing (validate only)
    #[arg(long)]
    flip_u: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time traces under a constant pump, one table per bath population
    Cw(CommonArgs),
    /// Second-order coherence traces for constant pumps
    G2(CommonArgs),
    /// Coherence peak time over the (g0, n_b) plane
    PeakMap(CommonArgs),
    /// Maximum and steady-state coherence over the (g0, n_b) plane
    CoherenceMap(CommonArgs),
    /// Squeezed quadrature under a Gaussian pump pulse
    Gauss(CommonArgs),
    /// Brute-force Lindblad run compared against the closed-form solution
    Validate(CommonArgs),
    /// Steady-state table over (g0, n_b) pairs
    Steady(CommonArgs),
}

fn resolve(builtin: &str, origin: &str, args: &CommonArgs) -> Result<Overlay, CliError> {
    let mut overlay = Overlay::parse(builtin, origin)?;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        overlay.merge(Overlay::parse(&text, &path.display().to_string())?);
    }
    if let Some(v) = &args.g0 {
        overlay.set("g0", v.clone());
    }
    if let Some(v) = &args.nb {
        overlay.set("nb", v.clone());
    }
    if let Some(v) = args.nth0 {
        overlay.set("nth0", v.to_string());
    }
    if let Some(v) = args.sigma {
        overlay.set("sigma", v.to_string());
    }
    if let Some(v) = args.to {
        overlay.set("to", v.to_string());
    }
    if let Some(v) = args.tmax {
        overlay.set("tmax", v.to_string());
    }
    if let Some(v) = args.dt_out {
        overlay.set("dt_out", v.to_string());
    }
    if let Some(v) = args.dim {
        overlay.set("dim", v.to_string());
    }
    if let Some(v) = args.rtol {
        overlay.set("rtol", v.to_string());
    }
    if let Some(v) = args.atol {
        overlay.set("atol", v.to_string());
    }
    if let Some(v) = args.tail_tol {
        overlay.set("tail_tol", v.to_string());
    }
    if let Some(v) = &args.out {
        overlay.set("out", v.display().to_string());
    }
    if let Some(v) = &args.format {
        overlay.set("format", v.clone());
    }
    if let Some(v) = &args.pump_csv {
        overlay.set("pump_csv", v.display().to_string());
    }
    if args.flip_u {
        overlay.set("flip_u", "true".to_string());
    }
    Ok(overlay)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cw(args) => {
            let o = resolve(include_str!("../configs/cw.conf"), "configs/cw.conf", &args)?;
            commands::run_cw(&o)
        }
        Command::G2(args) => {
            let o = resolve(include_str!("../configs/g2.conf"), "configs/g2.conf", &args)?;
            commands::run_g2(&o)
        }
        Command::PeakMap(args) => {
            let o = resolve(
                include_str!("../configs/peak_map.conf"),
                "configs/peak_map.conf",
                &args,
            )?;
            commands::run_peak_map(&o)
        }
        Command::CoherenceMap(args) => {
            let o = resolve(
                include_str!("../configs/coherence_map.conf"),
                "configs/coherence_map.conf",
                &args,
            )?;
            commands::run_coherence_map(&o)
        }
        Command::Gauss(args) => {
            let o = resolve(include_str!("../configs/gauss.conf"), "configs/gauss.conf", &args)?;
            commands::run_gauss(&o)
        }
        Command::Validate(args) => {
            let o = resolve(
                include_str!("../configs/validate.conf"),
                "configs/validate.conf",
                &args,
            )?;
            commands::run_validate(&o)
        }
        Command::Steady(args) => {
            let o =
                resolve(include_str!("../configs/steady.conf"), "configs/steady.conf", &args)?;
            commands::run_steady(&o)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Validation(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
