//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use leray_strip::functional::PoincareConstraint;
use leray_strip::Friction;
use log::warn;

use crate::commands::{self, parse_list, Artifacts, Outcome};
use crate::config::{load_config, Format, RunConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::output::{config_hash, Metadata};
use crate::sweep::{run_sweep, ExperimentMatrix};

/// Default seed of the randomised probes.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;
/// Environment variable selecting the log level (`error`, `info` or `debug`).
pub const LOG_ENV: &str = "LERAY_STRIP_LOG";

/// Exit code of a run whose checks passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code of an error (bad arguments, unreadable config, solver failure).
pub const EXIT_ERROR: i32 = 1;
/// Exit code of a run that completed with a failed property check.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "leray-strip", version, about = "Navier-slip strip flows: solves, estimators and decay diagnostics")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of the randomised probes.
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    /// Scalar fields with zero section means.
    Scalar,
    /// Vector fields with zero-mean `u1` and `u . n = 0` on the walls.
    Vector,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary solve with flux, energy and pressure checks.
    Solve,
    /// Divergence, slip, flux and sigma-bound checks of the flux carrier.
    CarrierCheck,
    /// Korn constant over several truncations.
    Korn {
        #[arg(long, default_value = "2,4,8")]
        zetas: String,
    },
    /// Poincare constant over several truncations.
    Poincare {
        #[arg(long, default_value = "2,4,8")]
        zetas: String,
        #[arg(long, value_enum, default_value_t = ConstraintArg::Vector)]
        constraint: ConstraintArg,
    },
    /// Ratio of the three-dimensional Korn counterexample for several radii.
    Korn3d {
        #[arg(long = "r", default_value = "5,10,20")]
        radii: String,
    },
    /// Tail energies, decay rates, wall vorticity and pressure drift of a solve.
    Decay,
    /// Solves over the cartesian product of the `sweep` lists.
    Sweep,
    /// Poiseuille profile table and pressure constant.
    Poiseuille {
        #[arg(long)]
        phi: f64,
        /// Friction coefficient or `inf`.
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::CarrierCheck => "carrier-check",
            Command::Korn { .. } => "korn",
            Command::Poincare { .. } => "poincare",
            Command::Korn3d { .. } => "korn3d",
            Command::Decay => "decay",
            Command::Sweep => "sweep",
            Command::Poiseuille { .. } => "poiseuille",
        }
    }

    fn needs_config(&self) -> bool {
        !matches!(self, Command::Korn3d { .. } | Command::Poiseuille { .. })
    }
}

/// Decimal or `0x`-prefixed hexadecimal seed.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{text}`: {e}"))
}

fn init_logging() -> HarnessResult<()> {
    let level = match std::env::var(LOG_ENV) {
        Ok(v) => match v.as_str() {
            "error" => log::LevelFilter::Error,
            "info" => log::LevelFilter::Info,
            "debug" => log::LevelFilter::Debug,
            other => return Err(HarnessError::Usage(format!("{LOG_ENV} must be error, info or debug, got `{other}`"))),
        },
        Err(_) => log::LevelFilter::Error,
    };
    // a second initialisation (tests running several commands) keeps the first logger
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            if outcome.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let HarnessError::Usage(_) = e {
                eprintln!("usage: leray-strip [--config PATH] [--out DIR] [--seed N] [--workers N] <COMMAND>");
            }
            EXIT_ERROR
        }
    }
}

fn output_dir(cli: &Cli, config: Option<&RunConfig>) -> PathBuf {
    match (&cli.out, config) {
        (Some(o), _) => o.clone(),
        (None, Some(c)) => match &c.base_dir {
            Some(dir) if c.output.directory.is_relative() => dir.join(&c.output.directory),
            _ => c.output.directory.clone(),
        },
        (None, None) => PathBuf::from("leray-strip-out"),
    }
}

/// Parses the config (when needed) and runs the subcommand.
pub fn execute(cli: &Cli) -> HarnessResult<Outcome> {
    init_logging()?;
    let config = if cli.command.needs_config() {
        let path = cli.config.as_deref().ok_or_else(|| HarnessError::Usage(format!("`{}` needs --config PATH", cli.command.name())))?;
        let (config, warnings) = load_config(path)?;
        for w in &warnings {
            warn!("{w}");
            eprintln!("warning: {w}");
        }
        Some(config)
    } else {
        None
    };
    let out = output_dir(cli, config.as_ref());
    let canonical = match &config {
        Some(c) => serde_json::to_string(c).expect("configs serialize"),
        None => format!("{:?}", cli.command),
    };
    let meta = Metadata { config_hash: config_hash(&format!("{}\n{canonical}\nseed={}", cli.command.name(), cli.seed)) };
    let formats = config.as_ref().map_or_else(|| vec![Format::Csv], |c| c.output.formats.clone());
    let mut art = Artifacts::new(&out, meta.clone(), &formats);
    match &cli.command {
        Command::Solve => commands::solve(config.as_ref().unwrap(), &mut art),
        Command::CarrierCheck => commands::carrier_check(config.as_ref().unwrap(), cli.seed, &mut art),
        Command::Korn { zetas } => commands::korn(config.as_ref().unwrap(), &parse_list(zetas)?, &mut art),
        Command::Poincare { zetas, constraint } => {
            let c = match constraint {
                ConstraintArg::Scalar => PoincareConstraint::ScalarSectionMean,
                ConstraintArg::Vector => PoincareConstraint::ZeroMeanU1AndWallNormal,
            };
            commands::poincare(config.as_ref().unwrap(), &parse_list(zetas)?, c, &mut art)
        }
        Command::Korn3d { radii } => commands::korn3d(&parse_list(radii)?, &mut art),
        Command::Decay => commands::decay(config.as_ref().unwrap(), &mut art),
        Command::Sweep => {
            let matrix = ExperimentMatrix::from_config(config.as_ref().unwrap());
            let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            run_sweep(&matrix, &out, workers, &meta)
        }
        Command::Poiseuille { phi, alpha, width, points } => {
            let a = Friction::parse(alpha)?;
            if *points == 0 {
                return Err(HarnessError::Usage("--points must be >= 1".into()));
            }
            commands::poiseuille(*phi, a, *width, *points, &mut art)
        }
    }
}

/// Convenience for tests: the output directory a command line would use.
pub fn resolved_output(cli: &Cli) -> HarnessResult<PathBuf> {
    let config = match &cli.config {
        Some(p) if cli.command.needs_config() => Some(load_config(Path::new(p))?.0),
        _ => None,
    };
    Ok(output_dir(cli, config.as_ref()))
}
