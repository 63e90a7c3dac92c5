use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scf_lab::{
    cmd_analyze, cmd_classify, cmd_optimize, cmd_orbit, cmd_simulate, cmd_sweep, cmd_verify,
    CliError, Format, InstanceFile,
};

/// Self-cycling fermentation on two essential resources: simulation and
/// analysis toolkit.
///
/// Exit codes: 0 success, 2 parse/validation error, 3 numerical
/// non-convergence, 4 infeasible instance.
#[derive(Parser)]
#[command(name = "scf-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Instance file (JSON)
    #[arg(long)]
    instance: PathBuf,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default: csv for sweep, json otherwise)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Grid size for sweep and optimize
    #[arg(long, default_value_t = 64)]
    r_grid: usize,
    /// Impulse cap for simulate (overrides the instance file)
    #[arg(long)]
    max_impulses: Option<u32>,
    /// Override all quadrature/integrator tolerances with one value
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the batch/impulse loop from the instance's initial state
    Simulate(CommonArgs),
    /// Classify the initial point and report the plane geometry
    Classify(CommonArgs),
    /// Cycle growth, critical drain fraction, minimum inoculum, prediction
    Analyze(CommonArgs),
    /// The periodic orbit at the instance drain fraction
    Orbit(CommonArgs),
    /// Maximize throughput over the drain fraction
    Optimize(CommonArgs),
    /// Tabulate cycle growth, period, and throughput over a drain grid
    Sweep(CommonArgs),
    /// Run the numerical invariant suite on the instance
    Verify(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Classify(a)
            | Command::Analyze(a)
            | Command::Orbit(a)
            | Command::Optimize(a)
            | Command::Sweep(a)
            | Command::Verify(a) => a,
        }
    }
}

fn seed_from_env() -> u64 {
    std::env::var("SCF_LAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(7)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let args = cli.command.common();
    let file = InstanceFile::load(&args.instance)?;
    let default_format = match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    };
    let format = args.format.unwrap_or(default_format);
    let output = match &cli.command {
        Command::Simulate(_) => cmd_simulate(&file, format, args.max_impulses, args.tol)?,
        Command::Classify(_) => cmd_classify(&file, format, args.tol)?,
        Command::Analyze(_) => cmd_analyze(&file, format, args.tol)?,
        Command::Orbit(_) => cmd_orbit(&file, format, args.tol)?,
        Command::Optimize(_) => cmd_optimize(&file, format, args.r_grid, args.tol)?,
        Command::Sweep(_) => cmd_sweep(&file, format, args.r_grid, args.tol)?,
        Command::Verify(_) => cmd_verify(&file, args.tol, seed_from_env())?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| CliError::Io(path.display().to_string(), e))?,
        None => print!("{output}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("scf-lab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
