//! Extract feature, spectrogram and mask-target caches for a mixed corpus.
//!
//! Caches are keyed by a digest of the inputs and the extraction config:
//! rerunning with unchanged config and data is a no-op, rerunning with a
//! different config against an existing cache directory is an error rather
//! than a silent recompute.

use std::path::PathBuf;

use afpc_core::cache::{write_feature_cache, write_spec_cache, IRM_KIND_ID};
use afpc_core::dsp::stft;
use afpc_core::features::extract_features;
use afpc_core::mask::compute_irm;
use afpc_core::mat::Matrix;
use afpc_core::signal::{read_wav, MixedManifest};
use afpc_core::util::fnv1a64;

use super::{input_digest, CacheMeta, CachePaths};
use crate::config::RunConfig;
use crate::error::CliError;

pub struct ExtractArgs {
    pub manifest: PathBuf,
    pub cache_dir: PathBuf,
}

pub fn run(args: &ExtractArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let manifest = MixedManifest::read(&args.manifest)?;
    if manifest.entries.is_empty() {
        return Err(CliError::Data(format!(
            "empty dataset: mixed manifest {} has no entries",
            args.manifest.display()
        )));
    }
    std::fs::create_dir_all(&args.cache_dir)?;

    let echo = cfg.extraction_echo();
    let config_hash = fnv1a64(echo.as_bytes());
    let mut written = 0usize;
    let mut skipped = 0usize;

    for entry in &manifest.entries {
        let stem = super::stem_of(&entry.noisy);
        let paths = CachePaths::new(&args.cache_dir, &stem);
        let digest = input_digest(&[&entry.noisy, &entry.clean, &entry.noise_scaled])?;

        if paths.meta.exists() {
            let meta = CacheMeta::read(&paths.meta)?;
            if meta.config_hash == config_hash && meta.input_digest == digest && paths.all_exist()
            {
                skipped += 1;
                continue;
            }
            return Err(CliError::Data(format!(
                "cache mismatch for {stem}: existing cache was built with a different \
                 config or inputs; clear {} or use another cache dir",
                args.cache_dir.display()
            )));
        }

        let noisy = read_wav(&entry.noisy)?;
        let clean = read_wav(&entry.clean)?;
        let scaled = read_wav(&entry.noise_scaled)?;
        if noisy.len() != clean.len() || noisy.len() != scaled.len() {
            return Err(CliError::Data(format!(
                "{stem}: noisy/clean/noise lengths disagree ({}, {}, {})",
                noisy.len(),
                clean.len(),
                scaled.len()
            )));
        }

        let extraction = extract_features(&noisy, &cfg.features, &cfg.stft)?;
        let spec_clean = stft(&clean, &cfg.stft)?;
        let spec_noise = stft(&scaled, &cfg.stft)?;
        let irm = compute_irm(&spec_clean, &spec_noise)?;
        let targets = Matrix { rows: irm.frames, cols: irm.bins, data: irm.data };

        if targets.rows != extraction.current.rows {
            return Err(CliError::Data(format!(
                "{stem}: target frames {} disagree with feature frames {}",
                targets.rows, extraction.current.rows
            )));
        }

        let set_id = cfg.features.feature_set.id();
        write_feature_cache(&paths.context, set_id, &extraction.context)?;
        write_feature_cache(&paths.current, set_id, &extraction.current)?;
        write_feature_cache(&paths.targets, IRM_KIND_ID, &targets)?;
        write_spec_cache(&paths.spectrogram, set_id, &extraction.spectrogram)?;
        CacheMeta {
            config_hash,
            input_digest: digest,
            frames: extraction.current.rows,
            frame_dim: extraction.current.cols,
            context_dim: extraction.context.cols,
            bins: targets.cols,
        }
        .write(&paths.meta, &echo)?;
        written += 1;
    }

    println!(
        "extracted {written} cache sets into {} ({skipped} up to date)",
        args.cache_dir.display()
    );
    Ok(())
}
