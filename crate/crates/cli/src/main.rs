use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tflocal_core::harness::{self, SuiteConfig, SuiteKind};
use tflocal_core::Error;

#[derive(Parser)]
#[command(name = "tflocal", version, about = "Verification harness for time-frequency localization operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write report.csv, summary.json and binary artifacts.
    Run {
        #[arg(long)]
        suite: String,
        /// TOML configuration; omitted keys take the suite defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the configured `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the suite catalog.
    List,
    /// Print the resolved parameters of one case as JSON.
    Describe {
        case: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn is_config_error(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<Error>(), Some(Error::Config(_)))
}

fn run(suite: &str, config: Option<PathBuf>, out: Option<PathBuf>) -> anyhow::Result<i32> {
    let kind = SuiteKind::parse(suite)?;
    let mut cfg = match config {
        Some(path) => SuiteConfig::load(&path)?,
        None => SuiteConfig::default_for(kind),
    };
    if cfg.suite != kind {
        return Err(Error::Config(format!("--suite {suite} does not match config suite {}", cfg.suite)).into());
    }
    if let Some(dir) = out {
        cfg.output = dir;
    }
    let report = harness::run_suite(&cfg)?;
    report
        .write_to_dir(&cfg.output)
        .with_context(|| format!("writing report to {}", cfg.output.display()))?;
    let s = report.summary();
    println!("suite {}: {} cases, {} passed, {} failed, max ratio {:e}", s.suite, s.cases, s.passed, s.failed, s.max_ratio);
    for f in &s.failures {
        println!("FAIL {}: {}", f.case, f.reason);
    }
    println!("report written to {}", cfg.output.display());
    Ok(harness::exit_code(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { suite, config, out } => run(&suite, config, out),
        Command::List => {
            for e in harness::list_suites() {
                println!("{:<18} {:>4} cases  {}", e.name, e.cases, e.summary);
            }
            Ok(0)
        }
        Command::Describe { case, config } => (|| {
            let cfg = config.map(|p| SuiteConfig::load(&p)).transpose()?;
            let d = harness::describe(&case, cfg.as_ref())?;
            println!("{}", serde_json::to_string_pretty(&d)?);
            Ok(0)
        })(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
