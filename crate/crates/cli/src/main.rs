//! `fee-sim`: run blade-pass scenarios, evaluate single wedge forces and
//! sweep scenario parameters.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid input,
//! 3 blade left the terrain.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod presets;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{EvalInput, SweepSpec};

#[derive(Parser)]
#[command(name = "fee-sim", version, about = "Blade cutting force simulator")]
struct Cli {
    /// Read command-line angles (eval arguments, swept angle fields) in
    /// degrees. Scenario files are always in radians.
    #[arg(long, global = true)]
    deg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace as CSV.
    Run {
        scenario: PathBuf,
        /// Trace file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Validate the scenario without running it.
        #[arg(long)]
        check: bool,
    },
    /// Evaluate the wedge force for one configuration.
    Eval(EvalArgs),
    /// Run a scenario once per value of a numeric parameter.
    Sweep {
        scenario: PathBuf,
        /// Dotted path of the parameter, e.g. `blade.depth`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate the built-in presets and any given scenarios.
    Check { scenarios: Vec<PathBuf> },
}

#[derive(Args)]
struct EvalArgs {
    /// Cut depth (m).
    #[arg(long)]
    d: f64,
    /// Surface inclination (rad).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
    /// Blade angle relative to the surface (rad).
    #[arg(long)]
    rho: f64,
    /// Internal friction angle (rad).
    #[arg(long)]
    phi: f64,
    /// Soil-tool friction angle (rad).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Cohesion (Pa).
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Soil-tool adhesion (Pa).
    #[arg(long, default_value_t = 0.0)]
    ca: f64,
    /// Moist unit weight (N/m^3).
    #[arg(long)]
    gamma: f64,
    /// Surcharge per unit width (N/m).
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Surcharge contribution factor.
    #[arg(long, default_value_t = 1.0)]
    sq: f64,
    /// Failure angle (rad); optimized when omitted.
    #[arg(long)]
    beta: Option<f64>,
    /// Singular fallback stiffness (N/m per m).
    #[arg(long, default_value_t = 1e5)]
    c2: f64,
    /// Singular fallback depth offset (m).
    #[arg(long = "do", default_value_t = 0.0)]
    d_o: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalArgs {
    fn input(&self, deg: bool) -> EvalInput {
        let a = |v: f64| if deg { v.to_radians() } else { v };
        EvalInput {
            d: self.d,
            alpha: a(self.alpha),
            rho: a(self.rho),
            phi: a(self.phi),
            delta: a(self.delta),
            c: self.c,
            c_a: self.ca,
            gamma: self.gamma,
            q: self.q,
            s_q: self.sq,
            beta: self.beta.map(a),
            c2: self.c2,
            d_o: self.d_o,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FEE_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out, check } => {
            commands::run(scenario, out.as_deref(), *check)
        }
        Command::Eval(args) => commands::eval(&args.input(cli.deg), args.out.as_deref()),
        Command::Sweep { scenario, param, from, to, steps, out } => commands::sweep(
            &SweepSpec { scenario, param, from: *from, to: *to, steps: *steps },
            out.as_deref(),
            cli.deg,
        ),
        Command::Check { scenarios } => commands::check(scenarios),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
