use clap::{Parser, Subcommand};
use spectralpairs::cli_reports::{plot, run, ExperimentConfig, PlotKind, RunOverrides, EXIT_INVALID, EXIT_OK, EXIT_SOLVER};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spectralpairs", version, about = "Spectral experiments on degenerating surfaces and symmetric graph manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solver and sampling seed (overrides solver.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long, env = "SPECTRALPAIRS_THREADS")]
        threads: Option<usize>,
    },
    /// Render a report table as SVG.
    Plot {
        report: PathBuf,
        /// theorem-a, pinch, multiplicity or spectrum.
        #[arg(long)]
        kind: String,
        /// Output file (defaults to the report path with an .svg extension).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, threads } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot configure {n} threads: {e}");
                    return code(EXIT_SOLVER);
                }
            }
            let outcome = run(&config, &RunOverrides { out, seed, threads });
            if let Some(dir) = &outcome.out_dir {
                println!("outputs in {}", dir.display());
            }
            if let Some(m) = &outcome.manifest {
                for c in &m.checks {
                    println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
                }
            }
            if let Some(msg) = &outcome.message {
                eprintln!("error: {msg}");
            }
            code(outcome.exit_code)
        }
        Command::Plot { report, kind, output } => {
            let result = kind.parse::<PlotKind>().and_then(|k| plot(&report, k));
            match result {
                Ok(svg) => {
                    let path = output.unwrap_or_else(|| report.with_extension("svg"));
                    match std::fs::write(&path, svg) {
                        Ok(()) => {
                            println!("{}", path.display());
                            code(EXIT_OK)
                        }
                        Err(e) => {
                            eprintln!("error: cannot write {}: {e}", path.display());
                            code(EXIT_SOLVER)
                        }
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(EXIT_INVALID)
                }
            }
        }
        Command::Validate { config } => {
            let parsed = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))
                .and_then(|t| ExperimentConfig::from_json(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(cfg) => {
                    println!("valid {} configuration", cfg.kind());
                    code(EXIT_OK)
                }
                Err(msg) => {
                    eprintln!("error: {msg}");
                    code(EXIT_INVALID)
                }
            }
        }
    }
}
