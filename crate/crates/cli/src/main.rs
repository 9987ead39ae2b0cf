//! `gencs` command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "GENCS_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "gencs", version, about = "Generative-model compressive sensing for ECG")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` config file. Defaults to $GENCS_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides one config key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic ECG and its true R peaks.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// `r_peak_index` CSV of the true peaks.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Fits a beat template to an annotated snippet.
    Learn {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// QRS band-stop cascade, optionally with detected peaks.
    Filter {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Peaks located on the raw signal.
        #[arg(long)]
        peaks: Option<PathBuf>,
    },
    /// Frame-wise compressed measurements.
    Compress {
        #[arg(long)]
        signal: PathBuf,
        /// Required for gencs: sets the default support limit.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cr: Option<f64>,
        /// gencs or plain_cs.
        #[arg(long)]
        method: Option<String>,
    },
    /// Recovers and, for gencs, re-synthesises a signal from measurements.
    Recover {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Per-frame solver statistics.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Detected R peaks.
        #[arg(long)]
        peaks: Option<PathBuf>,
        /// Recovered filtered signal (gencs only).
        #[arg(long)]
        filtered: Option<PathBuf>,
        /// Original length; defaults to whole frames.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        method: Option<String>,
    },
    /// Encodes a signal against a template, or decodes a stream.
    Gemrem {
        /// Signal to encode.
        #[arg(long, conflicts_with = "stream")]
        signal: Option<PathBuf>,
        #[arg(long, requires = "signal")]
        template: Option<PathBuf>,
        /// Stream to decode.
        #[arg(long)]
        stream: Option<PathBuf>,
        /// Stream file written when encoding.
        #[arg(long, requires = "signal")]
        out: Option<PathBuf>,
        /// Decoded signal.
        #[arg(long)]
        decode: Option<PathBuf>,
    },
    /// Sweeps methods, ratios and seeds into `bench.csv`.
    Bench {
        #[arg(long)]
        out: PathBuf,
        /// Also writes the lifetime table.
        #[arg(long)]
        lifetime: Option<PathBuf>,
    },
    /// Lifetime proxy from a `bench.csv`.
    Lifetime {
        #[arg(long)]
        bench: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mac_budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
