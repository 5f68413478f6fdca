use clap::{Parser, Subcommand};
use elastoscat::cli::{self, CliError, Command, ExperimentConfig, RunOptions};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "elastoscat", version, about = "Boundary-integral solver for exterior elastic scattering with a shape-derivative engine")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the grid refinement level from the config.
    #[arg(long, global = true)]
    level: Option<u32>,
    /// Worker threads (0 = all cores). The results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized evaluation points / test fields.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the configured scattering problem and store the traces.
    Solve,
    /// Solve and evaluate the far-field pattern.
    Farfield,
    /// Far field of the shape derivative for the configured perturbation.
    ShapeDerivative,
    /// Finite-difference validation of the shape derivative.
    FdCheck,
    /// Factorization-identity check on a nested surface pair.
    IdentityCheck,
    /// Manufactured-solution convergence study over grid levels.
    Convergence,
    /// Export the surface mesh as plain text.
    ExportMesh,
}

fn main() {
    let args = Args::parse();
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .ok();
    }
    let command = match args.command {
        Cmd::Solve => Command::Solve,
        Cmd::Farfield => Command::Farfield,
        Cmd::ShapeDerivative => Command::ShapeDerivative,
        Cmd::FdCheck => Command::FdCheck,
        Cmd::IdentityCheck => Command::IdentityCheck,
        Cmd::Convergence => Command::Convergence,
        Cmd::ExportMesh => Command::ExportMesh,
    };

    let result = (|| -> Result<cli::RunSummary, CliError> {
        let config_path = args
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config is required".into()))?;
        let config = ExperimentConfig::load(config_path)?;
        let opts = RunOptions {
            out_dir: args.out.clone(),
            level_override: args.level,
            seed: args.seed,
        };
        cli::run(command, &config, &opts)
    })();

    match result {
        Ok(summary) => {
            print!("{}", summary.log);
            if let Some(ok) = summary.passed {
                println!("{}", if ok { "PASS" } else { "FAIL" });
                if !ok {
                    std::process::exit(1);
                }
            }
        }
        Err(err) => {
            eprintln!("{}", err.record());
            std::process::exit(err.exit_code());
        }
    }
}
