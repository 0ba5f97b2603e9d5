//! Train the adversarial mask predictor from extracted caches.

use std::path::PathBuf;

use afpc_core::cache::{read_feature_cache, IRM_KIND_ID};
use afpc_core::mat::Matrix;
use afpc_core::neural::{
    load_checkpoint, resume_training, save_checkpoint, train as train_gan, EpochStats,
    TrainingData,
};
use afpc_core::signal::{MixedManifest, Split};
use afpc_core::util::fnv1a64;

use super::{CacheMeta, CachePaths};
use crate::config::RunConfig;
use crate::error::CliError;

pub struct TrainArgs {
    pub manifest: PathBuf,
    pub cache_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub resume: Option<PathBuf>,
}

pub fn run(args: &TrainArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let manifest = MixedManifest::read(&args.manifest)?;
    let stems: Vec<String> = manifest
        .entries
        .iter()
        .filter(|e| e.split == Split::Train)
        .map(|e| super::stem_of(&e.noisy))
        .collect();
    if stems.is_empty() {
        return Err(CliError::Data("empty dataset: no train-split entries in manifest".into()));
    }

    let data = load_training_pool(&stems, args, cfg)?;
    let bins = cfg.stft.bins();

    let (model, history) = match &args.resume {
        Some(path) => {
            let mut model = load_checkpoint(path)?;
            if model.feature_set != cfg.features.feature_set {
                return Err(CliError::Data(format!(
                    "checkpoint feature set {} does not match configured {}",
                    model.feature_set, cfg.features.feature_set
                )));
            }
            if cfg.train.epochs > model.config.epochs {
                model.config.epochs = cfg.train.epochs;
            }
            let history = resume_training(&mut model, &data)?;
            (model, history)
        }
        None => train_gan(&data, cfg.features.feature_set, cfg.features.context, bins, &cfg.train)?,
    };

    if let Some(parent) = args.checkpoint.parent() {
        std::fs::create_dir_all(parent)?;
    }
    save_checkpoint(&model, &args.checkpoint)?;
    write_history(&args.history, &history, model.config.lambda_l1)?;
    println!(
        "trained {} epochs on {} frames; checkpoint {} ({} generator parameters)",
        model.epochs_done,
        data.targets.rows,
        args.checkpoint.display(),
        model.generator.parameter_count()
    );
    Ok(())
}

fn load_training_pool(
    stems: &[String],
    args: &TrainArgs,
    cfg: &RunConfig,
) -> Result<TrainingData, CliError> {
    let echo = cfg.extraction_echo();
    let config_hash = fnv1a64(echo.as_bytes());

    let mut context_rows: Vec<Matrix> = Vec::new();
    let mut current_rows: Vec<Matrix> = Vec::new();
    let mut target_rows: Vec<Matrix> = Vec::new();
    for stem in stems {
        let paths = CachePaths::new(&args.cache_dir, stem);
        if !paths.all_exist() {
            return Err(CliError::Data(format!(
                "missing cache files for {stem} in {}; run `afpc extract` first",
                args.cache_dir.display()
            )));
        }
        let meta = CacheMeta::read(&paths.meta)?;
        if meta.config_hash != config_hash {
            return Err(CliError::Data(format!(
                "cache mismatch for {stem}: caches were extracted with a different config"
            )));
        }

        let (ctx_id, context) = read_feature_cache(&paths.context)?;
        let (cur_id, current) = read_feature_cache(&paths.current)?;
        let (tgt_id, targets) = read_feature_cache(&paths.targets)?;
        let expect_id = cfg.features.feature_set.id();
        if ctx_id != expect_id || cur_id != expect_id {
            return Err(CliError::Data(format!(
                "cache mismatch for {stem}: feature-set id {} in cache, {} requested",
                ctx_id, expect_id
            )));
        }
        if tgt_id != IRM_KIND_ID {
            return Err(CliError::Data(format!(
                "cache mismatch for {stem}: target cache has kind id {tgt_id}"
            )));
        }
        if context.rows != meta.frames || current.rows != meta.frames || targets.rows != meta.frames
        {
            return Err(CliError::Data(format!(
                "cache mismatch for {stem}: frame counts disagree with the sidecar"
            )));
        }
        context_rows.push(context);
        current_rows.push(current);
        target_rows.push(targets);
    }

    Ok(TrainingData {
        context: vstack(context_rows),
        current: vstack(current_rows),
        targets: vstack(target_rows),
    })
}

fn vstack(parts: Vec<Matrix>) -> Matrix {
    let cols = parts.first().map_or(0, |m| m.cols);
    let rows = parts.iter().map(|m| m.rows).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for part in parts {
        assert_eq!(part.cols, cols, "ragged cache widths");
        data.extend(part.data);
    }
    Matrix { rows, cols, data }
}

fn write_history(path: &PathBuf, history: &[EpochStats], lambda: f64) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = String::from("epoch,d_loss,g_adv,g_l1,g_loss,seconds\n");
    for e in history {
        text.push_str(&format!(
            "{},{:.9},{:.9},{:.9},{:.9},{:.3}\n",
            e.epoch,
            e.d_loss,
            e.g_adv,
            e.g_l1,
            e.g_loss(lambda),
            e.seconds
        ));
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
