use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand};
use serde_json::json;
use toda_cli::{presets, report, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "toda", version, about = "Run bubbling-solution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file and write <stem>.csv and <stem>.json.
    #[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
    Run {
        preset: Option<Preset>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated eps values (overrides the config).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Worker threads for the eps sweep.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the config file of a preset.
    Config { preset: Preset },
}

/// Exit codes: 0 all checks pass, 1 some check failed, 2 bad input or I/O.
fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e:#}") }));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Config { preset } => {
            print!("{}", ExperimentConfig::preset(preset).to_toml());
            Ok(true)
        }
        Command::Run {
            preset,
            config,
            out,
            eps,
            jobs,
        } => {
            let mut cfg = match (preset, config) {
                (Some(p), _) => ExperimentConfig::preset(p),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    ExperimentConfig::from_toml(&text)?
                }
                (None, None) => unreachable!("clap requires a source"),
            };
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            if let Some(eps) = eps {
                cfg.problem.eps = eps;
            }
            cfg.validate()?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                pool = pool.num_threads(n);
            }
            let rows = pool.build()?.install(|| presets::run(&cfg));
            let (csv, json_path) = report::write_report(&cfg, &rows)?;
            let failures: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            println!(
                "{} checks, {} failed; wrote {} and {}",
                rows.len(),
                failures.len(),
                csv.display(),
                json_path.display()
            );
            if !failures.is_empty() {
                eprintln!("{}", json!({ "failures": failures }));
            }
            Ok(failures.is_empty())
        }
    }
}
