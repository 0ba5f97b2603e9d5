//! Mix clean utterances with noise at the requested SNRs, writing both the
//! noisy file and the scaled noise so mask targets can be computed later.

use std::path::{Path, PathBuf};

use afpc_core::signal::{
    mix_at_snr, read_wav, synth_noise, write_wav, DatasetManifest, MixedEntry, MixedManifest,
    NoiseSource,
};
use afpc_core::util::derive_seed;

use crate::config::RunConfig;
use crate::error::CliError;

pub struct MixArgs {
    pub manifest: PathBuf,
    pub snrs: Option<Vec<f64>>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

fn snr_label(snr: f64) -> String {
    format!("{snr}").replace('.', "p")
}

pub fn run(args: &MixArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let manifest = DatasetManifest::read(&args.manifest)?;
    if manifest.entries.is_empty() {
        return Err(CliError::Data(format!(
            "empty dataset: manifest {} has no entries",
            args.manifest.display()
        )));
    }
    std::fs::create_dir_all(&args.out_dir)?;

    let mut created: Vec<PathBuf> = Vec::new();
    let result = mix_all(args, cfg, &manifest, &mut created);
    if result.is_err() {
        for path in &created {
            let _ = std::fs::remove_file(path);
        }
    }
    result
}

fn mix_all(
    args: &MixArgs,
    cfg: &RunConfig,
    manifest: &DatasetManifest,
    created: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let noise_dir = args.out_dir.join("noise");
    std::fs::create_dir_all(&noise_dir)?;

    let mut mixed = MixedManifest::default();
    for (entry_idx, entry) in manifest.entries.iter().enumerate() {
        let clean = read_wav(&entry.clean)?;
        if clean.sample_rate != cfg.stft.sample_rate {
            return Err(CliError::Data(format!(
                "{}: sample rate {} does not match the configured {} (resampling is out of scope)",
                entry.clean.display(),
                clean.sample_rate,
                cfg.stft.sample_rate
            )));
        }
        let snrs: Vec<f64> = match &args.snrs {
            Some(list) => list.clone(),
            None => vec![entry.snr_db],
        };
        for (snr_idx, &snr_db) in snrs.iter().enumerate() {
            let noise = match &entry.noise {
                NoiseSource::Kind(kind) => synth_noise(
                    *kind,
                    clean.len(),
                    clean.sample_rate,
                    derive_seed(args.seed, &[entry_idx as u64, snr_idx as u64]),
                ),
                NoiseSource::File(path) => read_wav(path)?,
            };
            let (noisy, scaled) = mix_at_snr(&clean, &noise, snr_db)?;

            let stem = format!(
                "{}__{}__snr{}dB",
                super::stem_of(&entry.clean),
                entry.noise.label(),
                snr_label(snr_db)
            );
            let noisy_path = args.out_dir.join(format!("{stem}.wav"));
            let scaled_path = noise_dir.join(format!("{stem}.wav"));
            write_wav(&noisy, &noisy_path)?;
            created.push(noisy_path.clone());
            write_wav(&scaled, &scaled_path)?;
            created.push(scaled_path.clone());

            mixed.entries.push(MixedEntry {
                noisy: noisy_path,
                clean: entry.clean.clone(),
                noise_scaled: scaled_path,
                noise_label: entry.noise.label(),
                snr_db,
                split: entry.split,
            });
        }
    }
    let manifest_path = mixed_manifest_path(&args.out_dir);
    mixed.write(&manifest_path)?;
    created.push(manifest_path.clone());
    println!(
        "mixed {} files into {} (manifest {})",
        mixed.entries.len(),
        args.out_dir.display(),
        manifest_path.display()
    );
    Ok(())
}

pub fn mixed_manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("mixed.tsv")
}
