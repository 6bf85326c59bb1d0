//! `fdmm` experiment runner.
//!
//! ```text
//! fdmm run <config> [--threads N] [--out DIR]
//! fdmm verify <config> [--threads N]
//! fdmm list-experiments
//! ```
//!
//! Exit codes: 0 success, 1 failed verification, 2 unreadable or malformed
//! config, 3 invalid parameter, 4 output I/O failure.

mod config;
mod experiment;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::{Outcome, RunError};

/// Output directory override, below `--out` in precedence.
const OUT_ENV: &str = "FDMM_OUT_DIR";

const EXIT_VERIFY: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fdmm",
    version,
    about = "Full-duplex mmWave beamforming experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV/SVG artifacts.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory; overrides FDMM_OUT_DIR and the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and check its acceptance assertions without writing files.
    Verify {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiment kinds.
    ListExperiments,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::new(EXIT_INVALID, format!("invalid parameter: {e}"))
    }
}

fn load(path: &Path) -> Result<(ExperimentConfig, String), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    let cfg = text
        .parse::<ExperimentConfig>()
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((cfg, text))
}

fn init_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::new(
                EXIT_INVALID,
                "invalid parameter: --threads: must be at least 1",
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(EXIT_INVALID, format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn output_dir(cli_out: Option<PathBuf>, cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    if let Some(p) = cli_out {
        return p;
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    if let Some(p) = &cfg.output {
        return PathBuf::from(p);
    }
    let stem = config_path
        .file_stem()
        .map_or("run".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from("out").join(stem)
}

fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<String, Failure> {
    let io = |p: &Path, e: std::io::Error| Failure::new(EXIT_IO, format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut hasher = Sha256::new();
    for a in outcome.csv.iter().chain(&outcome.svg) {
        let p = dir.join(&a.name);
        fs::write(&p, &a.contents).map_err(|e| io(&p, e))?;
    }
    for a in &outcome.csv {
        hasher.update(a.name.as_bytes());
        hasher.update(a.contents.as_bytes());
    }
    Ok(hex::encode(hasher.finalize()))
}

fn run(config: &Path, threads: Option<usize>, out: Option<PathBuf>) -> Result<(), Failure> {
    let (cfg, text) = load(config)?;
    init_threads(threads)?;
    let header = vec![
        format!("fdmm {}", fdmm::VERSION),
        format!("experiment {}", cfg.experiment),
        format!("config_sha256 {}", sha256_hex(text.as_bytes())),
        format!("seed {}", cfg.seed),
    ];
    let outcome = experiment::run(&cfg, &header)?;
    let dir = output_dir(out, &cfg, config);
    let digest = write_outcome(&dir, &outcome)?;
    println!(
        "{}: wrote {} csv + {} svg to {} sha256 {digest}",
        cfg.experiment,
        outcome.csv.len(),
        outcome.svg.len(),
        dir.display()
    );
    Ok(())
}

fn verify(config: &Path, threads: Option<usize>) -> Result<bool, Failure> {
    let (cfg, _) = load(config)?;
    init_threads(threads)?;
    let report = experiment::verify(&cfg)?;
    print!("{report}");
    let failed = report.failures().count();
    println!(
        "{}: {} of {} checks passed",
        cfg.experiment,
        report.checks.len() - failed,
        report.checks.len()
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            threads,
            out,
        } => run(&config, threads, out).map(|_| true),
        Command::Verify { config, threads } => verify(&config, threads),
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<16} {}", k.name(), k.description());
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
