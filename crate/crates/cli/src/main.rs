//! `casimir`: point evaluation, sweeps, the verification suite and figure data.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage, 3 evaluation error,
//! 4 I/O error.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "casimir",
    version,
    about = "Finite-temperature Casimir free energy and pressure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one quantity at one temperature.
    Eval(EvalArgs),
    /// Evaluate a quantity over a grid of scaled temperatures and write CSV.
    Sweep(SweepArgs),
    /// Run the invariant suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Write the data behind figure 1, 2 or 3 as CSV.
    Figure(FigureArgs),
}

#[derive(Args, Debug, Clone)]
struct SeriesArgs {
    /// Relative truncation tolerance for the series.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on the number of series terms.
    #[arg(long = "max-terms")]
    max_terms: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum, default_value = "free_energy")]
    quantity: Quantity,
    /// Plate separation.
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Inverse temperature.
    #[arg(long, conflicts_with = "xi")]
    beta: Option<f64>,
    /// Scaled temperature d/(pi beta); 0 is the zero-temperature point.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, value_enum, default_value = "boyer")]
    system: System,
    /// auto|bessel|coth|double|poisson|lattice|mode-integral|low|high
    #[arg(long, default_value = "auto")]
    rep: String,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "free_energy")]
    quantity: Quantity,
    #[arg(long = "xi-min")]
    xi_min: f64,
    #[arg(long = "xi-max")]
    xi_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value = "linear")]
    spacing: Spacing,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, value_enum, default_value = "boyer")]
    system: System,
    #[arg(long, default_value = "auto")]
    rep: String,
    #[command(flatten)]
    series: SeriesArgs,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "full")]
    grid: GridArg,
    /// Deliberately break one representation to check that the suite notices.
    #[arg(long, value_enum)]
    tamper: Option<TamperArg>,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// Figure number: 1, 2 or 3.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    id: u8,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 301)]
    points: usize,
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum Quantity {
    /// F/L^2.
    FreeEnergy,
    /// Net pressure.
    Pressure,
    /// d^3 F/L^2.
    FScaled,
    /// d^4 times the net pressure.
    PScaled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum System {
    Boyer,
    Conductor,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Spacing {
    Linear,
    Log,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GridArg {
    Coarse,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TamperArg {
    BesselSign,
}

/// Failure carrying its exit code.
#[derive(Debug)]
enum Failure {
    VerifyFailed,
    Usage(String),
    Evaluation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::VerifyFailed => 1,
            Failure::Usage(_) => 2,
            Failure::Evaluation(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
        Command::Figure(a) => commands::figure(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::VerifyFailed => {}
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Evaluation(m) => eprintln!("evaluation error: {m}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
