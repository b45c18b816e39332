use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carbon_pulse::pipeline::{self, PowerConfig, ReportStyle, RunConfig};
use carbon_pulse::{Error, Result};

#[derive(Parser)]
#[command(name = "carbon-pulse", version, about = "Daily sectoral CO2 emission estimates from activity data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate every enabled sector and write outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check fixture schemas and invariants.
    Validate {
        dir: PathBuf,
        /// Run config whose power feed schemas apply.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a summary table from run outputs.
    Report {
        #[arg(long)]
        style: String,
        dir: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let summary = pipeline::run(&cfg)?;
            println!("wrote {} files to {}", summary.files.len(), summary.output_dir.display());
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
        Command::Validate { dir, config } => {
            let power = match config {
                Some(p) => RunConfig::load(&p)?.power,
                None => PowerConfig::default(),
            };
            let report = pipeline::validate(&dir, &power)?;
            for v in &report.violations {
                println!("{v}");
            }
            println!("{}", report.summary());
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Report { style, dir } => {
            let style: ReportStyle = style.parse()?;
            print!("{}", pipeline::report(&dir, style)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Error::exit_code(&e) as u8)
        }
    }
}
