//! Score processed files against clean references: plain SDR and STOI, with
//! per-noise/per-SNR aggregates when manifest metadata is available.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use afpc_core::metrics::{sdr, stoi};
use afpc_core::signal::{read_wav, AudioBuffer, MixedManifest};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct EvaluateArgs {
    /// Directory of clean references, paired with processed files by equal
    /// file name. Mutually optional with `manifest`.
    pub clean_dir: Option<PathBuf>,
    /// Mixed-corpus manifest providing clean paths plus noise/SNR metadata.
    pub manifest: Option<PathBuf>,
    pub processed_dir: PathBuf,
    pub report: PathBuf,
}

struct Pair {
    name: String,
    clean: PathBuf,
    processed: PathBuf,
    snr_db: Option<f64>,
    noise: Option<String>,
}

struct Row {
    name: String,
    snr_db: Option<f64>,
    noise: Option<String>,
    sdr_db: f64,
    stoi: f64,
}

pub fn run(args: &EvaluateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let pairs = build_pairs(args)?;
    let mut rows = Vec::new();
    for pair in &pairs {
        let clean = read_wav(&pair.clean)?;
        let processed = read_wav(&pair.processed)?;
        let (clean, processed) = align(&pair.name, clean, processed, cfg.stft.frame_size)?;
        rows.push(Row {
            name: pair.name.clone(),
            snr_db: pair.snr_db,
            noise: pair.noise.clone(),
            sdr_db: sdr(&clean, &processed)?,
            stoi: stoi(&clean, &processed)?,
        });
    }
    write_report(&args.report, &rows)?;
    println!("evaluated {} pairs; report {}", rows.len(), args.report.display());
    Ok(())
}

/// Equalize lengths. Differences up to one analysis frame come from frame
/// padding and are trimmed; anything larger is a data error.
fn align(
    name: &str,
    clean: AudioBuffer,
    processed: AudioBuffer,
    frame_size: usize,
) -> Result<(AudioBuffer, AudioBuffer), CliError> {
    let (a, b) = (clean.len(), processed.len());
    if a.abs_diff(b) > frame_size {
        return Err(CliError::Data(format!(
            "{name}: length mismatch beyond one frame: {a} vs {b} samples"
        )));
    }
    let n = a.min(b);
    Ok((
        AudioBuffer::new(clean.samples[..n].to_vec(), clean.sample_rate),
        AudioBuffer::new(processed.samples[..n].to_vec(), processed.sample_rate),
    ))
}

fn build_pairs(args: &EvaluateArgs) -> Result<Vec<Pair>, CliError> {
    match (&args.manifest, &args.clean_dir) {
        (Some(manifest), _) => pairs_from_manifest(manifest, &args.processed_dir),
        (None, Some(clean_dir)) => pairs_by_name(clean_dir, &args.processed_dir),
        (None, None) => {
            Err(CliError::Usage("evaluate needs either --manifest or --clean".into()))
        }
    }
}

fn pairs_from_manifest(manifest: &Path, processed_dir: &Path) -> Result<Vec<Pair>, CliError> {
    let manifest = MixedManifest::read(manifest)?;
    let mut pairs = Vec::new();
    for entry in &manifest.entries {
        let name = format!("{}.wav", super::stem_of(&entry.noisy));
        let processed = processed_dir.join(&name);
        if !processed.exists() {
            return Err(CliError::Data(format!(
                "unpaired file: {} has no processed counterpart {}",
                entry.noisy.display(),
                processed.display()
            )));
        }
        pairs.push(Pair {
            name,
            clean: entry.clean.clone(),
            processed,
            snr_db: Some(entry.snr_db),
            noise: Some(entry.noise_label.clone()),
        });
    }
    if pairs.is_empty() {
        return Err(CliError::Data("empty dataset: manifest has no entries".into()));
    }
    pairs.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(pairs)
}

fn pairs_by_name(clean_dir: &Path, processed_dir: &Path) -> Result<Vec<Pair>, CliError> {
    let mut names: Vec<String> = std::fs::read_dir(clean_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".wav"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Data(format!("no WAV files in {}", clean_dir.display())));
    }
    let mut pairs = Vec::new();
    for name in names {
        let processed = processed_dir.join(&name);
        if !processed.exists() {
            return Err(CliError::Data(format!(
                "unpaired file: {} has no counterpart in {}",
                clean_dir.join(&name).display(),
                processed_dir.display()
            )));
        }
        pairs.push(Pair {
            name: name.clone(),
            clean: clean_dir.join(&name),
            processed,
            snr_db: None,
            noise: None,
        });
    }
    Ok(pairs)
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn write_report(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = String::from("file,snr_db,noise,sdr_db,stoi\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            row.name,
            fmt_opt_f64(row.snr_db),
            row.noise.clone().unwrap_or_default(),
            row.sdr_db,
            row.stoi
        ));
    }

    // per-(noise, snr) aggregates when metadata is present
    let mut groups: BTreeMap<(String, String), Vec<&Row>> = BTreeMap::new();
    for row in rows {
        if let (Some(snr), Some(noise)) = (row.snr_db, &row.noise) {
            groups.entry((noise.clone(), format!("{snr}"))).or_default().push(row);
        }
    }
    if groups.len() > 1 {
        for ((noise, snr), members) in &groups {
            let (s, t) = means(members.iter().copied());
            text.push_str(&format!("AGGREGATE,{snr},{noise},{s:.6},{t:.6}\n"));
        }
    }

    let (s, t) = means(rows.iter());
    text.push_str(&format!("AGGREGATE,,,{s:.6},{t:.6}\n"));
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn means<'a>(rows: impl Iterator<Item = &'a Row>) -> (f64, f64) {
    let mut n = 0usize;
    let mut sdr_sum = 0.0;
    let mut stoi_sum = 0.0;
    for row in rows {
        n += 1;
        sdr_sum += row.sdr_db;
        stoi_sum += row.stoi;
    }
    (sdr_sum / n as f64, stoi_sum / n as f64)
}
