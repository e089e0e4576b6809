//! `planar-lcs`: classify planar linear control systems, describe and plot
//! their control sets, steer between interior points and cross-check the
//! closed forms against a Monte Carlo reachability oracle.

mod commands;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use planar_lcs::{Error, Vec2};

/// Exit codes.
const EXIT_MALFORMED: u8 = 1;
const EXIT_CASE_REJECTED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "planar-lcs",
    version,
    about = "Control sets of planar linear control systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// System config: {"A": [[a, b], [c, d]], "zeta": [z1, z2], "omega": [umin, umax]}
    config: PathBuf,
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the classification report as JSON.
    Classify {
        #[command(flatten)]
        input: Input,
    },
    /// Print the control-set boundary as CSV, preceded by a summary comment.
    ControlSet {
        #[command(flatten)]
        input: Input,
        /// Points per boundary arc or edge.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Half-height used to clip unbounded sets, canonical coordinates.
        #[arg(long, default_value_t = 5.0)]
        extent: f64,
    },
    /// Sample a schedule's trajectory uniformly in time as CSV (t,x,y).
    Simulate {
        #[command(flatten)]
        input: Input,
        /// Start point, `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        init: Vec2,
        /// JSON schedule: a list of {"u", "dt"} or the output of `steer`.
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Construct a control steering `--from` to `--to`; prints JSON.
    Steer {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: Vec2,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: Vec2,
        /// Endpoint tolerance for the node planner.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Cross-check the closed forms against the reachability oracle.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Oracle seed; PLANAR_LCS_SEED takes precedence.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Grid cells per side.
        #[arg(long, default_value_t = 30)]
        grid: usize,
        /// Random interior pairs to steer between.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
    },
    /// Render the control set, its boundary, equilibria and trajectories as SVG.
    Plot {
        #[command(flatten)]
        input: Input,
        /// Draw in canonical coordinates.
        #[arg(long)]
        canonical: bool,
        /// Schedule file to draw; pair each with an `--init`.
        #[arg(long)]
        trajectory: Vec<PathBuf>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        init: Vec<Vec2>,
        #[arg(long, default_value_t = 5.0)]
        extent: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
}

fn parse_point(text: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [x, y] = parts[..] else {
        return Err(format!("expected `x,y`, got `{text}`"));
    };
    let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    match (num(x), num(y)) {
        (Some(x), Some(y)) => Ok(Vec2::new(x, y)),
        _ => Err(format!("expected two finite numbers, got `{text}`")),
    }
}

/// Marks a completed verification with failing properties.
#[derive(Debug)]
struct VerifyFailed;

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed")
    }
}

impl std::error::Error for VerifyFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerifyFailed>().is_some() {
        return EXIT_VERIFY_FAILED;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidSpec(_) | Error::InvalidSchedule(_)) => EXIT_MALFORMED,
        Some(Error::ComplexEigenvalues { .. } | Error::LarcViolated { .. }) => EXIT_CASE_REJECTED,
        Some(_) => EXIT_INFEASIBLE,
        None => EXIT_MALFORMED,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Classify { input } => commands::classify(&input),
        Command::ControlSet { input, points, extent } => commands::control_set(&input, points, extent),
        Command::Simulate {
            input,
            init,
            schedule,
            samples,
        } => commands::simulate(&input, init, &schedule, samples),
        Command::Steer { input, from, to, tol } => commands::steer(&input, from, to, tol),
        Command::Verify {
            input,
            seed,
            trials,
            grid,
            pairs,
        } => {
            let seed = match std::env::var("PLANAR_LCS_SEED") {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("PLANAR_LCS_SEED is not an integer: {s}")))?,
                Err(_) => seed,
            };
            let passed = verify::run(&input, seed, trials, grid, pairs)?;
            if passed {
                Ok(())
            } else {
                Err(VerifyFailed.into())
            }
        }
        Command::Plot {
            input,
            canonical,
            trajectory,
            init,
            extent,
            points,
        } => commands::plot(&input, canonical, &trajectory, &init, extent, points),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
