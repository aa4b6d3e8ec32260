use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qed_binding_cli::{
    cmd_constants, cmd_selfenergy, cmd_threshold, cmd_verify, cmd_window, parse_config, persist, CliError,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Threshold,
    Constants,
    Selfenergy,
    Window,
    Verify,
}

/// Enhanced-binding constants, windows and certificates for radial potentials.
#[derive(Debug, Parser)]
#[command(name = "qed-binding", version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the Monte-Carlo oracles; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("QED_BINDING_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("QED_BINDING_THREADS must be a positive integer (got {v:?})"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(args: Args) -> Result<i32, CliError> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))?;
    }
    let mut cfg = parse_config(&args.config)?;
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let output = match args.command {
        Sub::Threshold => cmd_threshold(&cfg),
        Sub::Constants => cmd_constants(&cfg),
        Sub::Selfenergy => cmd_selfenergy(&cfg),
        Sub::Window => cmd_window(&cfg),
        Sub::Verify => cmd_verify(&cfg),
    };
    let written = persist(&output, &cfg.out)?;
    for f in &written {
        eprintln!("wrote {}", f.display());
    }
    for failure in &output.report.status.failures {
        eprintln!("error: {failure}");
    }
    Ok(output.report.status.exit_code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
