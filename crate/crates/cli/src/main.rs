//! Batch front end for the speech-enhancement pipeline.
//!
//! Subcommands: `mix`, `extract`, `train`, `enhance`, `evaluate`, `info`.
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use afpc_core::features::FeatureSet;

use commands::{enhance, evaluate, extract, info, mix, train};
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "afpc", version, about = "Speech enhancement with compact audio-fingerprint features and an adversarial mask predictor")]
struct Cli {
    /// Configuration file with [stft]/[features]/[train] sections
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for every randomized step
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Feature set: stft, mfcc, nssc, stft+mfcc, stft+nssc, mfcc+nssc
    #[arg(long, global = true, value_name = "SET")]
    feature_set: Option<String>,

    /// Context frames on each side of the current frame
    #[arg(long, global = true, value_name = "J")]
    context: Option<usize>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mix clean utterances with noise at prescribed SNRs
    Mix {
        /// Input manifest: clean<TAB>noise<TAB>snr_db<TAB>split
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// Comma-separated SNR grid overriding the per-entry value, e.g. "-5,0,5"
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        snrs: Option<String>,
    },
    /// Extract feature, spectrogram and mask-target caches
    Extract {
        /// Mixed-corpus manifest written by `mix`
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// Cache directory (defaults to --out)
        #[arg(long, value_name = "DIR")]
        cache_dir: Option<PathBuf>,
    },
    /// Train the adversarial mask predictor
    Train {
        /// Mixed-corpus manifest written by `mix`
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// Cache directory written by `extract` (defaults to --out)
        #[arg(long, value_name = "DIR")]
        cache_dir: Option<PathBuf>,
        /// Checkpoint output path (defaults to <out>/model.ganc)
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Epoch count override
        #[arg(long, value_name = "N")]
        epochs: Option<usize>,
        /// Continue training from an existing checkpoint
        #[arg(long, value_name = "PATH")]
        resume: Option<PathBuf>,
    },
    /// Enhance noisy WAV files with a trained checkpoint
    Enhance {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        /// Input WAV files or directories
        #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Latent policy: "sample" (seeded draws, default) or "zeros"
        #[arg(long, value_name = "POLICY")]
        z_policy: Option<String>,
    },
    /// Score processed files against clean references (SDR, STOI)
    Evaluate {
        /// Directory of clean references paired by file name
        #[arg(long, value_name = "DIR")]
        clean: Option<PathBuf>,
        /// Mixed-corpus manifest for pairing plus noise/SNR grouping
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// Directory of processed (enhanced or noisy) files
        #[arg(long, value_name = "DIR")]
        processed: PathBuf,
        /// CSV report path
        #[arg(long, value_name = "PATH")]
        report: PathBuf,
    },
    /// Print feature dimensions and network parameter counts
    Info,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("afpc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let feature_set = cli
        .feature_set
        .as_deref()
        .map(FeatureSet::from_str)
        .transpose()
        .map_err(CliError::Usage)?;
    let epochs = match &cli.command {
        Command::Train { epochs, .. } => *epochs,
        _ => None,
    };
    cfg.apply_flags(feature_set, cli.context, cli.seed, epochs);

    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let seed = cfg.train.seed;

    match cli.command {
        Command::Mix { manifest, snrs } => {
            let snrs = snrs.map(|list| parse_snr_list(&list)).transpose()?;
            mix::run(&mix::MixArgs { manifest, snrs, out_dir, seed }, &cfg)
        }
        Command::Extract { manifest, cache_dir } => {
            let cache_dir = cache_dir.unwrap_or(out_dir);
            extract::run(&extract::ExtractArgs { manifest, cache_dir }, &cfg)
        }
        Command::Train { manifest, cache_dir, checkpoint, epochs: _, resume } => {
            let cache_dir = cache_dir.unwrap_or_else(|| out_dir.clone());
            let checkpoint = checkpoint.unwrap_or_else(|| out_dir.join("model.ganc"));
            let history = checkpoint.with_extension("loss.csv");
            train::run(&train::TrainArgs { manifest, cache_dir, checkpoint, history, resume }, &cfg)
        }
        Command::Enhance { checkpoint, input, z_policy } => {
            let zeros_z = match z_policy.as_deref() {
                None | Some("sample") => false,
                Some("zeros") => true,
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "unknown z policy `{other}` (expected sample or zeros)"
                    )))
                }
            };
            enhance::run(
                &enhance::EnhanceArgs { checkpoint, inputs: input, out_dir, zeros_z, seed },
                &cfg,
            )
        }
        Command::Evaluate { clean, manifest, processed, report } => evaluate::run(
            &evaluate::EvaluateArgs { clean_dir: clean, manifest, processed_dir: processed, report },
            &cfg,
        ),
        Command::Info => info::run(&cfg),
    }
}

fn parse_snr_list(list: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> =
        list.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|_| CliError::Usage(format!("bad SNR list `{list}`")))?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("bad SNR list `{list}`")));
    }
    Ok(values)
}
