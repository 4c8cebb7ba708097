//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::metrics::CSV_HEADER;
use crate::pipeline::{fuse_files, run_batch, FuseOptions};

#[derive(Debug, Parser)]
#[command(name = "qivif", version, about = "Quaternion infrared/visible image fusion")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override one setting, e.g. `--set visible.qlrd.beta=0.02` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse one visible/infrared pair.
    Fuse {
        #[arg(long)]
        vis: PathBuf,
        #[arg(long)]
        ir: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write per-stage layers and traces.
        #[arg(long)]
        dump_intermediates: bool,
        /// Also write metrics.csv for the fused image.
        #[arg(long)]
        metrics: bool,
    },
    /// Fuse every pair of a tab-separated manifest and write metrics.csv.
    Batch {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = PipelineConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if cli.print_config {
        let _ = write!(stdout, "{}", cfg.to_toml());
        return Ok(0);
    }
    match cli.command {
        None => {
            eprintln!("error: a subcommand is required (try --help)");
            Ok(4)
        }
        Some(Command::Fuse {
            vis,
            ir,
            out,
            dump_intermediates,
            metrics,
        }) => {
            let outcome = fuse_files(
                &vis,
                &ir,
                &out,
                &cfg,
                &FuseOptions {
                    dump_intermediates,
                    metrics,
                },
            )?;
            let _ = writeln!(stdout, "{}", outcome.fused_path.display());
            if let Some(report) = outcome.metrics {
                let _ = writeln!(stdout, "{CSV_HEADER}\n{}", report.csv_row("fused"));
            }
            Ok(0)
        }
        Some(Command::Batch { manifest, out }) => {
            let outcome = run_batch(&manifest, &out, &cfg)?;
            let _ = writeln!(
                stdout,
                "{} ({} fused, {} failed)",
                outcome.csv_path.display(),
                outcome.rows.len(),
                outcome.failures.len()
            );
            Ok(if outcome.failures.is_empty() { 0 } else { 1 })
        }
    }
}

/// Parse arguments and run; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
