//! `qslkit`: quantum-speed-limit bounds, robustness rankings, master-equation
//! simulation, and Hamiltonian design for Markovian open quantum systems.
//!
//! Exit codes: 0 success, 2 malformed model/states file, 3 domain error
//! (out-of-range parameter), 4 numerical failure (integration blow-up),
//! 5 solver residual above tolerance or non-convergence.

mod commands;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{ScanParam, ScenarioArgs};
use qslkit::Error;

#[derive(Parser)]
#[command(
    name = "qslkit",
    version,
    about = "Explicit quantum-speed-limit bounds for Markovian open systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParamArg {
    Theta,
    Gamma,
    Lambda,
}

#[derive(Subcommand)]
enum Command {
    /// Compute A, E, k, T*, T_DC, and their ratio for a model file.
    Qsl {
        /// Model file (see README for the format).
        #[arg(long)]
        model: PathBuf,
        /// Robustness radius lambda in (0, 1].
        #[arg(long)]
        lambda: Option<f64>,
        /// Target angle Theta_T in (0, pi/2] (alternative to --lambda).
        #[arg(long, conflicts_with = "lambda")]
        theta: Option<f64>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the master equation and write the cos Theta_t curve as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// End time of the trajectory.
        #[arg(long)]
        tmax: f64,
        /// RK4 step (default scales inversely with the generator norms).
        #[arg(long)]
        step: Option<f64>,
        /// Output CSV path (columns: time, overlap).
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the first exit time from the radius-lambda region.
    Escape {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        /// Search horizon (default 10 / smallest channel rate).
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Rank states from a states file by T* (most robust first).
    Rank {
        #[arg(long)]
        model: PathBuf,
        /// States file: one `label = [amplitudes]` per line.
        #[arg(long)]
        states: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Solve for the Hamiltonian that maximizes T* for the model's state.
    Optimize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
        /// Also write the JSON solution to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate T*/T_DC over a (k, lambda) grid as CSV.
    RatioGrid {
        /// Largest k (up to 1/sqrt(2)).
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        kmax: f64,
        /// Largest lambda (up to 1).
        #[arg(long, default_value_t = 1.0)]
        lmax: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep theta, gamma, or lambda and tabulate T*, T_DC, and the ratio.
    Scan {
        #[arg(long)]
        model: PathBuf,
        /// Which parameter to sweep. Theta rebuilds a dim-2 state
        /// [cos t, sin t]; gamma rescales the file's channels by sqrt(g).
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Inclusive grid A:B:N.
        #[arg(long)]
        range: String,
        /// Radius for theta/gamma sweeps (falls back to the model file).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate (A, E, T*) for product and GHZ states of N qubits under
    /// collective dephasing.
    EnsembleScaling {
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect a built-in scenario (`list` shows the names).
    Scenario {
        /// One of: list, two-level-dephasing, two-level-decay,
        /// bell-collective, bell-local, ensemble, qutrit-ladder.
        name: String,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Qubit count for the ensemble scenario.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Sub-state selector: phi+/phi-/psi+/psi- or product/ghz.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Write the scenario as a loadable model file.
        #[arg(long)]
        write_model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::ModelFile { .. }
        | Error::Expr(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidState(_) => 2,
        Error::InvalidArgument(_) => 3,
        Error::NumericalFailure(_) | Error::NonFinite(_) => 4,
        Error::ResidualTooLarge { .. } | Error::NotConverged { .. } => 5,
    }
}

fn run(cli: Cli) -> qslkit::Result<()> {
    match cli.command {
        Command::Qsl {
            model,
            lambda,
            theta,
            json,
            out,
        } => commands::cmd_qsl(&model, lambda, theta, json, out.as_ref()),
        Command::Simulate {
            model,
            tmax,
            step,
            out,
        } => commands::cmd_simulate(&model, tmax, step, &out),
        Command::Escape {
            model,
            lambda,
            tmax,
            step,
            json,
        } => commands::cmd_escape(&model, lambda, tmax, step, json),
        Command::Rank {
            model,
            states,
            lambda,
            json,
        } => commands::cmd_rank(&model, &states, lambda, json),
        Command::Optimize { model, json, out } => {
            commands::cmd_optimize(&model, json, out.as_ref())
        }
        Command::RatioGrid { kmax, lmax, n, out } => commands::cmd_ratio_grid(kmax, lmax, n, &out),
        Command::Scan {
            model,
            param,
            range,
            lambda,
            out,
        } => {
            let param = match param {
                ParamArg::Theta => ScanParam::Theta,
                ParamArg::Gamma => ScanParam::Gamma,
                ParamArg::Lambda => ScanParam::Lambda,
            };
            commands::cmd_scan(&model, param, &range, lambda, &out)
        }
        Command::EnsembleScaling {
            nmax,
            gamma,
            lambda,
            out,
        } => commands::cmd_ensemble_scaling(nmax, gamma, lambda, &out),
        Command::Scenario {
            name,
            omega,
            gamma,
            theta,
            phi,
            n,
            state,
            lambda,
            write_model,
            json,
        } => commands::cmd_scenario(&ScenarioArgs {
            name,
            omega,
            gamma,
            theta,
            phi,
            n,
            state,
            lambda,
            write_model,
            json,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
