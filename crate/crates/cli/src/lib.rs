//! `sdmapkit` command line: OSM ingest, BEV rasterization, node alignment,
//! localization-noise sweeps, metric evaluation and plots.
//!
//! Exit codes: 0 on success, 1 when a computation fails, 2 for usage errors,
//! unreadable files and files whose contents do not decode.

pub mod commands;
mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{AlignArgs, EvaluateArgs, IngestArgs, PerturbArgs, PlotArgs, RasterizeArgs};
use config::ConfigFile;
use error::{CliError, CliResult};

pub use commands::PlotKind;

#[derive(Debug, Parser)]
#[command(name = "sdmapkit", version, about = "SD map priors for BEV perception and lane topology")]
pub struct Cli {
    /// TOML file with one table per subcommand; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Ingest(IngestArgs),
    Rasterize(RasterizeArgs),
    Align(AlignArgs),
    Perturb(PerturbArgs),
    Evaluate(EvaluateArgs),
    Plot(PlotArgs),
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Ingest(a) => commands::ingest(a.merge(config.ingest)),
        Command::Rasterize(a) => commands::rasterize(a.merge(config.rasterize)),
        Command::Align(a) => commands::align(a.merge(config.align)),
        Command::Perturb(a) => commands::perturb(a.merge(config.perturb)),
        Command::Evaluate(a) => commands::evaluate(a.merge(config.evaluate)),
        Command::Plot(a) => commands::plot(a.merge(config.plot)),
    }
}

/// `SDMAPKIT_THREADS` caps the rayon pool. Results do not depend on it.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SDMAPKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SDMAPKIT_THREADS must be a positive integer, got '{value}'")))?;
    // a second call in the same process (tests) finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
