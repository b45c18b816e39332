//! Runs the bundled snapshot end to end and prints the regional summary.
//!
//! Usage: `cargo run --example run_pipeline [-- OUTPUT_DIR]`

use std::path::{Path, PathBuf};

use carbon_pulse::pipeline::{report, run, ReportStyle, RunConfig};

fn main() -> carbon_pulse::Result<()> {
    let manifest_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut cfg = RunConfig::load(&manifest_dir.join("fixtures/run.toml"))?;
    if let Some(out) = std::env::args().nth(1) {
        cfg.output_dir = PathBuf::from(out);
    }
    let summary = run(&cfg)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} files in {}\n", summary.files.len(), summary.output_dir.display());
    print!("{}", report(&summary.output_dir, ReportStyle::S2)?);
    Ok(())
}
