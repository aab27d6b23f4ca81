use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twomode::Scheme;
use twomode_cli::{Failure, Outcome, RunConfig, SweepConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "twomode", version, about = "Two atoms in a two-mode cavity: entanglement dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Only {
    Tmsc,
    Tmac,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and write a CSV time series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a scenario over one swept parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a two-mode model with its reduced model.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce the qualitative classification table.
    Table1 {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum)]
        only: Option<Only>,
    },
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<RunConfig, Failure> {
    RunConfig::parse(&read(path)?).map_err(Failure::config)
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(e.to_string()))?;
    }
    let pick = |out: Option<PathBuf>, cfg: &RunConfig| out.or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load(&config)?;
            Ok((twomode_cli::simulate(&cfg)?, pick(out, &cfg)))
        }
        Command::Sweep { config, out } => {
            let sweep = SweepConfig::parse(&read(&config)?).map_err(Failure::config)?;
            let base = sweep.base().map_err(Failure::config)?;
            Ok((twomode_cli::sweep(&sweep)?, pick(out, &base)))
        }
        Command::Verify { config, out, json } => {
            let cfg = load(&config)?;
            Ok((twomode_cli::verify(&cfg, json)?, pick(out, &cfg)))
        }
        Command::Table1 { config, out, json, only } => {
            let cfg = match config {
                Some(path) => load(&path)?,
                None => RunConfig::default(),
            };
            let only = only.map(|o| match o {
                Only::Tmsc => Scheme::Tmsc,
                Only::Tmac => Scheme::Tmac,
            });
            Ok((twomode_cli::table1(&cfg, only, json)?, pick(out, &cfg)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok((outcome, path)) => {
            match path {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, &outcome.body) {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(EXIT_CONFIG as u8);
                    }
                }
                None => {
                    // a closed pipe (e.g. `| head`) is not an error
                    let _ = std::io::stdout().lock().write_all(outcome.body.as_bytes());
                }
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
