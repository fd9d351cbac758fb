//! Command-line front end for the k-Hessian toolkit.
//!
//! ```text
//! hessian-kk <workflow> --config problem.json [--seed N] [--out DIR] [--override key=value]...
//! ```
//!
//! Exit codes: 0 success, 2 validation failure, 3 numeric failure,
//! 4 non-convergence.

mod config;
mod workflows;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{apply_overrides, CliError, Config};

#[derive(Parser, Debug)]
#[command(
    name = "hessian-kk",
    about = "k-Hessian equations with gradient-type terms: transforms, classifiers, radial solvers and non-existence scans",
    version
)]
struct Args {
    /// verify-identity | transform | classify | solve | eigen | pohozaev
    workflow: String,
    /// path to the JSON problem configuration
    #[arg(long)]
    config: PathBuf,
    /// RNG seed; overrides the config field
    #[arg(long)]
    seed: Option<u64>,
    /// output directory; overrides the config field
    #[arg(long)]
    out: Option<PathBuf>,
    /// dot-path config overrides, e.g. --override solver.grid=256
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load_config(args: &Args) -> Result<Config, CliError> {
    let raw = fs::read_to_string(&args.config)
        .map_err(|e| CliError::validation(format!("reading {}: {e}", args.config.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| CliError::validation(format!("config is not valid JSON: {e}")))?;
    let doc = apply_overrides(doc, &args.overrides)?;
    let mut config: Config = serde_json::from_value(doc)
        .map_err(|e| CliError::validation(format!("config field error: {e}")))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

/// HESSIAN_KK_THREADS caps the rayon pool used by grid scans.
fn configure_threads() {
    if let Ok(raw) = std::env::var("HESSIAN_KK_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("warning: HESSIAN_KK_THREADS='{raw}' is not a positive integer; ignored");
            }
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let config = load_config(args)?;
    config.validate(&args.workflow)?;
    let out_dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::validation(format!(
            "creating output directory {}: {e}",
            out_dir.display()
        ))
    })?;
    let output = workflows::dispatch(&args.workflow, &config, &out_dir)?;
    println!("{}", output.summary);
    for file in &output.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    configure_threads();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
