//! `hqc-sim`: single-gate runs, parameter sweeps and the invariant self-test.

mod control_arg;
mod gate;
mod manifest;
mod plot;
mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use control_arg::parse_control;
pub use manifest::RunManifest;
pub use plot::render_svg;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const TOLERANCE: i32 = 3;
    pub const OUTPUT: i32 = 4;
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Tolerance(String),
    Output(String),
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => exit::INVALID,
            CliError::Tolerance(_) => exit::TOLERANCE,
            CliError::Output(_) => exit::OUTPUT,
            CliError::Failure(_) => exit::FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Tolerance(m) | CliError::Output(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<hqc_core::Error> for CliError {
    fn from(e: hqc_core::Error) -> Self {
        match e {
            hqc_core::Error::Io(io) => CliError::Output(io.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hqc-sim",
    version,
    about = "Holonomic gates in decoherence-free subspaces with accelerated adiabaticity"
)]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true, env = "HOLONOMY_SIM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    Phase,
    Xgate,
    Cphase,
}

impl From<GateArg> for hqc_core::GateKind {
    fn from(g: GateArg) -> Self {
        match g {
            GateArg::Phase => hqc_core::GateKind::Phase,
            GateArg::Xgate => hqc_core::GateKind::Xgate,
            GateArg::Cphase => hqc_core::GateKind::Cphase,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Runtime,
    MeanControl,
    DtZeroEnergy,
    KickEquivalence,
}

impl ExperimentArg {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentArg::Runtime => "runtime",
            ExperimentArg::MeanControl => "mean-control",
            ExperimentArg::DtZeroEnergy => "dt-zero-energy",
            ExperimentArg::KickEquivalence => "kick-equivalence",
        }
    }

    pub fn default_config(self) -> hqc_core::ExperimentConfig {
        use hqc_core::ExperimentConfig as C;
        match self {
            ExperimentArg::Runtime => C::runtime_default(),
            ExperimentArg::MeanControl => C::mean_control_default(),
            ExperimentArg::DtZeroEnergy => C::dt_zero_energy_default(0.0),
            ExperimentArg::KickEquivalence => C::kick_equivalence_default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    /// Flip the sign of the cos(theta) couplings in the phase-gate Hamiltonian.
    H1Sign,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one gate and report its phase and quality factor as JSON.
    Gate(GateArgs),
    /// Run a parameter sweep and write CSV, JSON and a manifest.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Selftest {
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Print the default configuration of an experiment as TOML.
    Config {
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
    },
}

#[derive(Debug, clap::Args)]
pub struct GateArgs {
    #[arg(long, value_enum)]
    pub kind: GateArg,
    /// Loop amplitude of theta(t).
    #[arg(long)]
    pub a: f64,
    /// Runtime.
    #[arg(long = "T")]
    pub period: f64,
    /// Control: a TOML file, or inline `kind[:J=..,dt=..,p=..,seed=..]`.
    #[arg(long)]
    pub control: Option<String>,
    /// Minimum number of time steps over the run.
    #[arg(long)]
    pub steps: Option<u32>,
    /// Output JSON path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentArg,
    /// TOML experiment configuration (default configuration if absent).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write an SVG line chart.
    #[arg(long)]
    pub plot: bool,
}

fn configure_threads(threads: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        // A second call in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = configure_threads(cli.threads).and_then(|threads| match cli.command {
        Command::Gate(args) => gate::run(&args),
        Command::Sweep(args) => sweep::run(&args, threads),
        Command::Selftest { inject_fault } => run_selftest(inject_fault),
        Command::Config { experiment } => {
            experiment.default_config().to_toml_string().map(|text| print!("{text}")).map_err(CliError::from)
        }
    });
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn run_selftest(fault: Option<FaultArg>) -> Result<(), CliError> {
    use hqc_core::selftest::{self, Fault};
    let fault = match fault {
        None => Fault::None,
        Some(FaultArg::H1Sign) => Fault::H1Sign,
    };
    let report = selftest::run(fault);
    println!("{:<12} {:<6} {:>10} {:>9}  check", "group", "status", "value", "tol");
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{:<12} {:<6} {:>10.2e} {:>9.1e}  {}", c.group, status, c.value, c.tolerance, c.name);
    }
    let groups = report.groups();
    let failed: Vec<&str> = groups.iter().copied().filter(|g| !report.group_passed(g)).collect();
    println!("{} groups, {} checks, {} failed groups", groups.len(), report.checks.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("invariant groups failed: {}", failed.join(", "))))
    }
}
