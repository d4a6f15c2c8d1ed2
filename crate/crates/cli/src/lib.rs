//! Command-line front end for the `cheapgame` solvers.

pub mod commands;
pub mod config;
pub mod example;
pub mod svg;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use cheapgame::{Error, IntegratorConfig, Method};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// Bad input: parse, dimension or validation failure, refused assumption.
    Invalid = 1,
    /// The solver could not finish (finite escape, step budget).
    Solver = 2,
    /// Reference values were not reproduced.
    Golden = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Invalid,
            message: message.into(),
        }
    }

    pub fn golden(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Golden,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::Assumption { name: "A2", .. } => Exit::Invalid,
            Error::Assumption { .. } | Error::BlowUp { .. } | Error::MaxSteps { .. } | Error::StepSizeUnderflow { .. } => {
                Exit::Solver
            }
            Error::Dimension { .. }
            | Error::InvalidParameter(_)
            | Error::Validation(_)
            | Error::OutOfRange { .. }
            | Error::Io(_) => Exit::Invalid,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "cheapgame", version, about = "Cheap-control zero-sum differential games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Game description (TOML).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,

    /// Comma-separated epsilon values; defaults to the spec file's list.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Vec<f64>,

    /// Output directory for CSV and SVG files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[arg(long, global = true)]
    pub rtol: Option<f64>,

    #[arg(long, global = true)]
    pub atol: Option<f64>,

    /// Seed for the randomized perturbation checks.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,

    /// Integrator: rk4 or rk45.
    #[arg(long, global = true, default_value = "rk45")]
    pub method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the game data against the structural assumptions.
    Validate,
    /// Solve the full Riccati problem for each epsilon.
    SolveExact,
    /// Build the zero-order asymptotic solution.
    SolveAsymptotic,
    /// Value reports and approximate-saddle checks for each epsilon.
    Evaluate,
    /// Error tables and fitted constants over the epsilon list.
    Sweep,
    /// Closed-loop trajectories under the exact and asymptotic laws.
    Simulate,
    /// Reproduce the built-in pursuit-evasion example.
    Example,
}

/// Fixed step used when `--method rk4` is chosen.
pub const RK4_STEP: f64 = 1e-4;

/// Integrator settings assembled from the command-line overrides.
pub fn integrator(method: &str, rtol: Option<f64>, atol: Option<f64>) -> Result<IntegratorConfig, CliError> {
    let method: Method = method.parse()?;
    let mut cfg = match method {
        Method::Rk4 => IntegratorConfig::rk4(RK4_STEP),
        Method::Rk45 => IntegratorConfig::default(),
    };
    if let Some(r) = rtol {
        cfg.rtol = r;
    }
    if let Some(a) = atol {
        cfg.atol = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one invocation, writing the human-readable summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = integrator(&cli.method, cli.rtol, cli.atol)?;
    if cli.command == Command::Example {
        if cli.spec.is_some() {
            return Err(CliError::validation("example uses its built-in game; --spec is not accepted"));
        }
        return example::run_example(&cli.out, &cfg, cli.seed, out);
    }
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| CliError::validation("--spec PATH is required for this command"))?;
    let loaded = config::load_spec(path)?;
    let eps = if cli.eps.is_empty() { loaded.epsilons.clone() } else { cli.eps.clone() };
    let ctx = commands::Context {
        spec: loaded.spec,
        eps,
        out_dir: cli.out.clone(),
        cfg,
        seed: cli.seed,
    };
    match cli.command {
        Command::Validate => commands::validate(&ctx, out),
        Command::SolveExact => commands::solve_exact(&ctx, out),
        Command::SolveAsymptotic => commands::solve_asymptotic(&ctx, out),
        Command::Evaluate => commands::evaluate(&ctx, out),
        Command::Sweep => commands::sweep(&ctx, out),
        Command::Simulate => commands::simulate(&ctx, out),
        Command::Example => unreachable!(),
    }
}
