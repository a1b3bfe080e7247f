use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eigbound::cli::pipeline::write_convergence;
use eigbound::cli::{run_convergence, run_pipeline, RunConfig, RunFlags, RunMode};

/// Certified two-sided eigenvalue bounds for -Δ + V on the plane.
#[derive(Parser)]
#[command(name = "bound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the lowest k eigenvalues on one mesh.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Round C_h up and displayed bounds outward.
        #[arg(long)]
        rigor: bool,
        #[arg(long)]
        export_mesh: bool,
        #[arg(long)]
        export_matrices: bool,
    },
    /// Repeat the run over `discretization.convergence_rings`.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out_dir, rigor, export_mesh, export_matrices } => {
            let flags = RunFlags { rigor, export_mesh, export_matrices };
            match RunConfig::load(&config).and_then(|cfg| run_pipeline(&cfg, flags, out_dir.as_deref())) {
                Ok(report) => {
                    print!("{}", report.audit());
                    report.exit_code()
                }
                Err(e) => {
                    eprintln!("bound: {e}");
                    1
                }
            }
        }
        Command::Converge { config, out_dir } => {
            let result = RunConfig::load(&config).and_then(|cfg| {
                let RunMode::Convergence(rings) = &cfg.mode else {
                    return Err(eigbound::Error::Config(
                        "converge needs `discretization.convergence_rings` with at least 2 entries".into(),
                    ));
                };
                let report = run_convergence(&cfg, rings, RunFlags::default())?;
                write_convergence(&report, out_dir.as_deref().unwrap_or(&cfg.output.dir))?;
                Ok(report)
            });
            match result {
                Ok(report) => {
                    for run in &report.runs {
                        print!("{}", run.audit());
                    }
                    print!("{}", report.to_csv());
                    report.exit_code()
                }
                Err(e) => {
                    eprintln!("bound: {e}");
                    1
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
