use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eulerswell_cli::{sweep, Config, RunOptions};

#[derive(Parser)]
#[command(
    name = "eulerswell",
    version,
    about = "Eulerian simulator for swelling poro-viscoelastic solids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
        /// Stop at this time instead of the configured end time.
        #[arg(long)]
        until: Option<f64>,
        /// Write field snapshots every N steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// One run per value of a parameter, plus a comparison table.
    Sweep {
        config: PathBuf,
        /// epsilon, yosida_k, dt, degree or eps_F.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(short, long, default_value = "sweep")]
        output: PathBuf,
    },
    /// Check the material against the structural hypotheses.
    CheckMaterial {
        config: PathBuf,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
}

fn fail(e: &eulerswell_cli::CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(root) = e.root_cause() {
        eprintln!("root cause: {root}");
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            until,
            snapshot_every,
        } => {
            let cfg = match Config::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let opts = RunOptions {
                until,
                snapshot_every,
                config_path: Some(config),
            };
            let outcome = eulerswell_cli::run(&cfg, &output, &opts);
            if let Some(e) = &outcome.error {
                return fail(e);
            }
            if let Some(s) = &outcome.manifest.summary {
                println!(
                    "completed t = {:e} in {} steps, E0 = {:.6e}, E = {:.6e}, R = {:.3e}, min det F = {:.4}",
                    s.t_final, s.steps, s.energy_initial, s.energy_final, s.balance_residual, s.min_det_f
                );
            }
            ExitCode::SUCCESS
        }
        Command::Sweep {
            config,
            param,
            values,
            output,
        } => {
            let cfg = match Config::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match sweep::sweep(&cfg, &param, &values, &output) {
                Ok(entries) => {
                    print!("{}", sweep::table(&param, &entries));
                    if entries.iter().all(|e| e.exit_code == 0) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(3)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::CheckMaterial { config, samples } => {
            let model = match Config::load(&config).and_then(|c| c.material.build(c.dim())) {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            let report = model.check_assumptions(samples);
            print!("{report}");
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
