use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipconv::verification::DEFAULT_TRANSIENT;
use ipconv_cli::commands::{self, Report};
use ipconv_cli::{CliError, SimConfig, EXIT_GATE, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "ipconv", version, about = "Infinite-Prandtl rotating convection solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint_out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare the fast tendency with the dense oracle on random fields.
    TendencyCheck {
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 1.0)]
        ra: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Recompute the energy audit from a diagnostics CSV.
    EnergyAudit {
        #[arg(long)]
        csv: PathBuf,
        /// Box parameter L of the run that wrote the CSV.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Fit an exponential rate to one CSV column.
    DecayFit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = DEFAULT_TRANSIENT)]
        t_start: f64,
        #[arg(long)]
        t_end: Option<f64>,
        /// Fail unless the rate matches this value.
        #[arg(long, allow_negative_numbers = true)]
        expect_rate: Option<f64>,
        #[arg(long, default_value_t = 1e-3, requires = "expect_rate")]
        rel_tol: f64,
    },
    /// Measure the growth of a small perturbation of the configured initial state.
    Perturb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta_amplitude: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Repeat at this amplitude and check the growth is first order.
        #[arg(long)]
        compare_amplitude: Option<f64>,
    },
    /// Print a checkpoint header and summary.
    Info {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn execute(command: Command) -> Result<Box<dyn Report>, CliError> {
    Ok(match command {
        Command::Run { config, checkpoint_out, csv } => {
            let config = SimConfig::from_path(&config)?;
            Box::new(commands::run(&config, checkpoint_out.as_deref(), csv.as_deref())?)
        }
        Command::TendencyCheck { grid, seeds, ra, length } => {
            Box::new(commands::tendency_check(grid, seeds, ra, length)?)
        }
        Command::EnergyAudit { csv, length, tolerance } => {
            Box::new(commands::energy_audit_csv(&csv, length, tolerance)?)
        }
        Command::DecayFit { csv, column, t_start, t_end, expect_rate, rel_tol } => {
            Box::new(commands::decay_fit_csv(&csv, &column, t_start, t_end, expect_rate.map(|r| (r, rel_tol)))?)
        }
        Command::Perturb { config, delta_amplitude, seed, compare_amplitude } => {
            let config = SimConfig::from_path(&config)?;
            Box::new(commands::perturb(&config, delta_amplitude, seed, compare_amplitude)?)
        }
        Command::Info { checkpoint } => Box::new(commands::info(&checkpoint)?),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_GATE as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
