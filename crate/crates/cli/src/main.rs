use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use idslab::jumps::Mode;
use idslab_cli::config::{self, ExperimentConfig};
use idslab_cli::pipeline::{self, RunError};
use idslab_cli::report::{self, ReportError};
use idslab_cli::validate::{has_fatal, validate};

/// Worker count for the thread pool.
const WORKERS_ENV: &str = "IDSLAB_WORKERS";

#[derive(Parser)]
#[command(name = "idslab", version, about = "Finite-volume approximation of integrated densities of states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the carrier patch and a triplet dump per seed.
    Generate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline and write a manifest.
    Run {
        config: PathBuf,
        /// Overrides `analysis.mode`.
        #[arg(long, value_parser = ["exact", "float"])]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Rebuild the convergence table of a finished run from its CSVs.
    Report { dir: PathBuf },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })?;
    config::parse(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn output_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name))
}

fn init_workers() -> Result<(), ExitCode> {
    let Ok(value) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let workers: usize = value.parse().ok().filter(|w| *w > 0).ok_or_else(|| {
        eprintln!("error: {WORKERS_ENV}={value:?} is not a positive integer");
        ExitCode::from(2)
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

fn run_error(e: RunError) -> ExitCode {
    match &e {
        RunError::Config(diags) => {
            for d in diags {
                eprintln!("{d}");
            }
        }
        other => eprintln!("error: {other}"),
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(code) = init_workers() {
        return code;
    }
    let result = match cli.command {
        Command::Validate { config } => load(&config).map(|cfg| {
            let diags = validate(&cfg, cfg.mode);
            for d in &diags {
                println!("{d}");
            }
            if has_fatal(&diags) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }),
        Command::Generate { config, out } => load(&config).map(|cfg| {
            match pipeline::generate(&cfg, &output_dir(&cfg, out)) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => run_error(e),
            }
        }),
        Command::Run { config, mode, out } => load(&config).map(|cfg| {
            let mode = match mode.as_deref() {
                Some(m) => m.parse::<Mode>().expect("clap restricts the values"),
                None => cfg.mode,
            };
            match pipeline::run(&cfg, mode, &output_dir(&cfg, out)) {
                Ok(outcome) => {
                    log::info!("wrote {} files to {}", outcome.manifest.files.len(), outcome.dir.display());
                    println!("{}", outcome.manifest_hash);
                    ExitCode::SUCCESS
                }
                Err(e) => run_error(e),
            }
        }),
        Command::Report { dir } => Ok(match report::rederive(&dir) {
            Ok(r) => {
                println!("manifest {}", r.manifest_hash);
                match (&r.report, r.matches_stored) {
                    (Some(rep), stored) => {
                        print!("{}", rep.to_csv());
                        for t in &rep.trend {
                            println!(
                                "# trend {}->{}: {} <= {} + {}: {}",
                                t.from, t.to, t.next, t.previous, t.slack, t.holds
                            );
                        }
                        if stored == Some(false) {
                            eprintln!("error: rebuilt table differs from convergence.csv");
                            ExitCode::from(1)
                        } else {
                            ExitCode::SUCCESS
                        }
                    }
                    (None, _) => {
                        println!("# single window size; no convergence table");
                        ExitCode::SUCCESS
                    }
                }
            }
            Err(e @ ReportError::Config(_)) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }),
    };
    result.unwrap_or_else(|code| code)
}
