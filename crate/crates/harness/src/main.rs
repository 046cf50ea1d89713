use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracwave_harness::report::{all_passed, emit, render};
use fracwave_harness::{suites, ExperimentConfig, ExperimentKind, HarnessError, OutputFormat, Result};

#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about = "Verification harness for the time-fractional wave solver")]
struct Cli {
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Report destination; overrides the config, defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, env = "FRACWAVE_JOBS")]
    jobs: Option<usize>,
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(HarnessError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    cfg.validate(cli.kind)?;
    let reports = suites::run(&cfg)?;
    let format = cli.format.or(cfg.output.format).unwrap_or(OutputFormat::Json);
    match cli.out.or_else(|| cfg.output.path.clone()) {
        Some(path) => emit(&reports, format, &path)?,
        None => print!("{}", render(&reports, format)?),
    }
    Ok(all_passed(&reports))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fracwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
