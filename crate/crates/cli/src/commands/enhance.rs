//! Enhance noisy recordings with a trained checkpoint.

use std::path::PathBuf;

use afpc_core::features::{extract_features, FeatureConfig};
use afpc_core::mask::apply_mask_and_reconstruct;
use afpc_core::neural::{infer_mask, load_checkpoint, ZPolicy};
use afpc_core::signal::{read_wav, write_wav, AudioBuffer};
use afpc_core::util::{derive_seed, fnv1a64};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct EnhanceArgs {
    pub checkpoint: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub zeros_z: bool,
    pub seed: u64,
}

/// Expand directories into the WAV files they contain, sorted by name.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut batch: Vec<PathBuf> = std::fs::read_dir(input)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|ext| ext == "wav"))
                .collect();
            batch.sort();
            files.extend(batch);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Data("no input WAV files to enhance".into()));
    }
    Ok(files)
}

pub fn run(args: &EnhanceArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let model = load_checkpoint(&args.checkpoint)?;
    let feature_cfg = FeatureConfig {
        feature_set: model.feature_set,
        context: model.context,
        ..cfg.features.clone()
    };
    std::fs::create_dir_all(&args.out_dir)?;

    let files = collect_inputs(&args.inputs)?;
    for path in &files {
        let noisy = read_wav(path)?;
        let extraction = extract_features(&noisy, &feature_cfg, &cfg.stft)?;
        if extraction.current.cols != model.frame_dim {
            return Err(CliError::Data(format!(
                "feature dimension mismatch for {}: expected {} per frame \
                 (checkpoint: {} features), found {}",
                path.display(),
                model.frame_dim,
                model.feature_set,
                extraction.current.cols
            )));
        }

        let stem = super::stem_of(path);
        let policy = if args.zeros_z {
            ZPolicy::Zeros
        } else {
            ZPolicy::Sample { seed: derive_seed(args.seed, &[fnv1a64(stem.as_bytes())]) }
        };
        let mask = infer_mask(&model, &extraction.context, policy)?;
        let enhanced = apply_mask_and_reconstruct(&mask, &extraction.spectrogram)?;

        // trim or zero-pad the tail so output duration equals input duration
        let mut samples = enhanced.samples;
        samples.resize(noisy.len(), 0.0);
        write_wav(
            &AudioBuffer::new(samples, noisy.sample_rate),
            args.out_dir.join(format!("{stem}.wav")),
        )?;
    }
    println!("enhanced {} files into {}", files.len(), args.out_dir.display());
    Ok(())
}
