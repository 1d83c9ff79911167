use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use agpw_cli::{parse_document, render_report, run_document, write_csv, CliError, Mode, DEFAULT_SWEEP_LIMIT};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Simulate,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Both => Mode::Both,
        }
    }
}

/// Expected warranty costs for items with geometrically degrading on-times
/// and repair times, analytically and by simulation.
///
/// Writes CSV to --out (or stdout) and a readable report to stderr.
/// Exit codes: 2 config error, 3 series truncation failure, 4 simulation cap.
#[derive(Debug, Parser)]
#[command(name = "agpw", version)]
struct Args {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces sim.seed.
    #[arg(long)]
    seed_override: Option<u64>,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Maximum number of sweep combinations.
    #[arg(long, default_value_t = DEFAULT_SWEEP_LIMIT)]
    sweep_limit: usize,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut document = parse_document(&text)?;
    if let Some(seed) = args.seed_override {
        match document.pointer_mut("/sim/seed") {
            Some(slot) => *slot = seed.into(),
            None => return Err(CliError::Config("--seed-override given but config has no sim.seed".into())),
        }
    }
    let rows = run_document(&document, args.mode.into(), args.sweep_limit)?;
    let stderr = io::stderr();
    let mut report = stderr.lock();
    for (point, outcome) in &rows {
        report.write_all(render_report(point, outcome).as_bytes())?;
    }
    match &args.out {
        Some(path) => write_csv(BufWriter::new(File::create(path)?), &rows),
        None => write_csv(io::stdout().lock(), &rows),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&args)),
            Err(e) => Err(CliError::Config(format!("--workers: {e}"))),
        },
        None => run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("agpw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
