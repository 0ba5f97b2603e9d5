//! Three-step adversarial training: push the discriminator toward 1 on real
//! mask/feature pairs, toward 0 on generated pairs, then update the
//! generator through the frozen discriminator.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::linalg::hconcat;
use super::network::{Activation, DenseNetwork, Gradients, Mode};
use super::{mean_l1, sample_z, GanModel, NeuralError, NormStats, TrainConfig};
use crate::features::FeatureSet;
use crate::mat::Matrix;
use crate::util::derive_seed;

/// Frame-aligned training pool: context-stacked conditioning vectors for the
/// generator, current-frame vectors for the discriminator, and target masks.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub context: Matrix,
    pub current: Matrix,
    pub targets: Matrix,
}

impl TrainingData {
    fn validate(&self, context_frames: usize) -> Result<(), NeuralError> {
        if self.context.rows == 0 {
            return Err(NeuralError::EmptyDataset);
        }
        if self.current.rows != self.context.rows || self.targets.rows != self.context.rows {
            return Err(NeuralError::CacheMismatch(format!(
                "frame counts disagree: context {}, current {}, targets {}",
                self.context.rows, self.current.rows, self.targets.rows
            )));
        }
        let expected = (2 * context_frames + 1) * self.current.cols;
        if self.context.cols != expected {
            return Err(NeuralError::CacheMismatch(format!(
                "context width {} does not equal (2*{context_frames}+1) * frame width {}",
                self.context.cols, self.current.cols
            )));
        }
        Ok(())
    }
}

/// Per-epoch loss summary and wall-clock time.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean discriminator objective over the epoch's batches.
    pub d_loss: f64,
    /// Mean adversarial part of the generator objective.
    pub g_adv: f64,
    /// Mean per-sample L1 mask error (unscaled by lambda).
    pub g_l1: f64,
    pub seconds: f64,
}

impl EpochStats {
    pub fn g_loss(&self, lambda_l1: f64) -> f64 {
        self.g_adv + lambda_l1 * self.g_l1
    }
}

fn hidden_activations(act: Activation, hidden: usize) -> Vec<Activation> {
    let mut v = vec![act; hidden];
    v.push(Activation::Sigmoid);
    v
}

fn dropout_vec(rate: f64, hidden: usize) -> Vec<f64> {
    let mut v = vec![rate; hidden];
    v.push(0.0);
    v
}

/// Train a fresh model on the pooled frames. Deterministic for a given
/// `(seed, data, config)`: weight init, per-epoch shuffles, dropout masks
/// and latent draws all derive from the config seed.
pub fn train(
    data: &TrainingData,
    feature_set: FeatureSet,
    context_frames: usize,
    bins: usize,
    cfg: &TrainConfig,
) -> Result<(GanModel, Vec<EpochStats>), NeuralError> {
    data.validate(context_frames)?;
    if data.targets.cols != bins {
        return Err(NeuralError::CacheMismatch(format!(
            "target width {} does not match {bins} bins",
            data.targets.cols
        )));
    }
    let frame_dim = data.current.cols;

    let mut gen_dims = vec![cfg.z_dim + data.context.cols];
    gen_dims.extend_from_slice(&cfg.hidden_layers);
    gen_dims.push(bins);
    let generator = DenseNetwork::init(
        &gen_dims,
        &hidden_activations(Activation::Relu, cfg.hidden_layers.len()),
        &dropout_vec(cfg.dropout, cfg.hidden_layers.len()),
        derive_seed(cfg.seed, &[0x47]),
    )?;

    let mut disc_dims = vec![bins + frame_dim];
    disc_dims.extend_from_slice(&cfg.hidden_layers);
    disc_dims.push(1);
    let discriminator = DenseNetwork::init(
        &disc_dims,
        &hidden_activations(Activation::LeakyRelu, cfg.hidden_layers.len()),
        &dropout_vec(cfg.dropout, cfg.hidden_layers.len()),
        derive_seed(cfg.seed, &[0x44]),
    )?;

    let norm = cfg.normalize_inputs.then(|| NormStats::fit(&data.current));

    let gen_opt = AdamState::zeros_like(&generator);
    let disc_opt = AdamState::zeros_like(&discriminator);
    let mut model = GanModel {
        generator,
        discriminator,
        gen_opt,
        disc_opt,
        norm,
        feature_set,
        context: context_frames,
        frame_dim,
        bins,
        config: cfg.clone(),
        epochs_done: 0,
    };
    let stats = resume_training(&mut model, data)?;
    Ok((model, stats))
}

/// Continue training an existing model up to its configured epoch count.
/// Resuming from a checkpoint written mid-run reproduces the uninterrupted
/// run exactly, because every epoch reseeds from `(seed, epoch)`.
pub fn resume_training(
    model: &mut GanModel,
    data: &TrainingData,
) -> Result<Vec<EpochStats>, NeuralError> {
    data.validate(model.context)?;
    if data.current.cols != model.frame_dim {
        return Err(NeuralError::CacheMismatch(format!(
            "frame width {} does not match the model's {}",
            data.current.cols, model.frame_dim
        )));
    }

    let (context, current) = match &model.norm {
        Some(stats) => (stats.apply(&data.context), stats.apply(&data.current)),
        None => (data.context.clone(), data.current.clone()),
    };

    let cfg = model.config.clone();
    let mut history = Vec::new();
    for epoch in model.epochs_done + 1..=cfg.epochs {
        let start = Instant::now();
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0xE9, epoch as u64]));
        let mut order: Vec<usize> = (0..data.targets.rows).collect();
        order.shuffle(&mut rng);

        let rate = cfg.rate_for_epoch(epoch);
        let mut d_loss_sum = 0.0;
        let mut g_adv_sum = 0.0;
        let mut g_l1_sum = 0.0;
        let mut weight = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (d_loss, g_adv, g_l1) =
                train_batch(model, &context, &current, &data.targets, batch, rate, &mut rng)?;
            let w = batch.len() as f64;
            d_loss_sum += d_loss * w;
            g_adv_sum += g_adv * w;
            g_l1_sum += g_l1 * w;
            weight += w;
        }
        model.epochs_done = epoch;
        history.push(EpochStats {
            epoch,
            d_loss: d_loss_sum / weight,
            g_adv: g_adv_sum / weight,
            g_l1: g_l1_sum / weight,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(history)
}

fn train_batch(
    model: &mut GanModel,
    context: &Matrix,
    current: &Matrix,
    targets: &Matrix,
    batch: &[usize],
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64), NeuralError> {
    let ctx_b = context.gather(batch);
    let cur_b = current.gather(batch);
    let tgt_b = targets.gather(batch);

    let d_real = disc_step_real(model, &tgt_b, &cur_b, rate, rng)?;
    let d_fake = disc_step_fake(model, &ctx_b, &cur_b, rate, rng)?;
    let d_loss = super::loss_d(&d_real.data, &d_fake.data);
    let (g_adv, g_l1) = gen_step(model, &ctx_b, &cur_b, &tgt_b, rate, rng)?;
    Ok((d_loss, g_adv, g_l1))
}

/// Step 1: discriminator toward 1 on (target mask, current features).
pub(crate) fn disc_step_real(
    model: &mut GanModel,
    tgt_b: &Matrix,
    cur_b: &Matrix,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Matrix, NeuralError> {
    let n = tgt_b.rows as f64;
    let adam = model.config.adam;
    let real_in = hconcat(tgt_b, cur_b);
    let (d_real, tape) = model.discriminator.forward_batch(&real_in, Mode::Train, Some(rng))?;
    let grad = scale_shift_grad(&d_real, 1.0, n);
    let (grads, _) = model.discriminator.backward(&tape, &grad, true)?;
    adam_step(&mut model.discriminator, &grads.unwrap(), &mut model.disc_opt, &adam, rate)?;
    Ok(d_real)
}

/// Step 2: discriminator toward 0 on (generated mask, current features).
pub(crate) fn disc_step_fake(
    model: &mut GanModel,
    ctx_b: &Matrix,
    cur_b: &Matrix,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Matrix, NeuralError> {
    let n = ctx_b.rows as f64;
    let adam = model.config.adam;
    let z = sample_z(rng, ctx_b.rows, model.config.z_dim);
    let g_in = hconcat(&z, ctx_b);
    let (g_out, _) = model.generator.forward_batch(&g_in, Mode::Train, Some(rng))?;
    let fake_in = hconcat(&g_out, cur_b);
    let (d_fake, tape) = model.discriminator.forward_batch(&fake_in, Mode::Train, Some(rng))?;
    let grad = scale_shift_grad(&d_fake, 0.0, n);
    let (grads, _) = model.discriminator.backward(&tape, &grad, true)?;
    adam_step(&mut model.discriminator, &grads.unwrap(), &mut model.disc_opt, &adam, rate)?;
    Ok(d_fake)
}

/// Step 3: generator through the discriminator with the discriminator's
/// parameters frozen.
pub(crate) fn gen_step(
    model: &mut GanModel,
    ctx_b: &Matrix,
    cur_b: &Matrix,
    tgt_b: &Matrix,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64), NeuralError> {
    let n = ctx_b.rows as f64;
    let cfg_adam = model.config.adam;
    let lambda_per = model.config.lambda_l1 / n;

    let z = sample_z(rng, ctx_b.rows, model.config.z_dim);
    let g_in = hconcat(&z, ctx_b);
    let (g_out, g_tape) = model.generator.forward_batch(&g_in, Mode::Train, Some(rng))?;
    let fake_in = hconcat(&g_out, cur_b);
    let (d_out, d_tape) =
        model.discriminator.forward_batch(&fake_in, Mode::Train, Some(rng))?;
    let grad_d = scale_shift_grad(&d_out, 1.0, n);
    let (_, grad_d_in) = model.discriminator.backward(&d_tape, &grad_d, false)?;

    let mut grad_g_out = Matrix::zeros(g_out.rows, g_out.cols);
    for r in 0..g_out.rows {
        let adv = &grad_d_in.row(r)[..model.bins];
        let row = grad_g_out.row_mut(r);
        for (c, g) in row.iter_mut().enumerate() {
            let diff = g_out.row(r)[c] - tgt_b.row(r)[c];
            *g = adv[c] + lambda_per * sign(diff);
        }
    }
    let (g_grads, _) = model.generator.backward(&g_tape, &grad_g_out, true)?;
    adam_step(&mut model.generator, &g_grads.unwrap(), &mut model.gen_opt, &cfg_adam, rate)?;

    let g_adv: f64 = d_out.data.iter().map(|d| (d - 1.0) * (d - 1.0)).sum::<f64>() / n;
    let g_l1 = mean_l1(&g_out, tgt_b);
    Ok((g_adv, g_l1))
}

/// Gradient of `mean((d - target)^2)` with respect to `d`.
fn scale_shift_grad(d: &Matrix, target: f64, n: f64) -> Matrix {
    let mut g = d.clone();
    for v in g.data.iter_mut() {
        *v = 2.0 * (*v - target) / n;
    }
    g
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Value and parameter gradients of the full discriminator objective
/// (both terms) at fixed inputs, dropout inactive. Used for gradient
/// verification.
pub fn disc_loss_and_grads(
    disc: &DenseNetwork,
    real_in: &Matrix,
    fake_in: &Matrix,
) -> Result<(f64, Gradients), NeuralError> {
    let n_real = real_in.rows as f64;
    let n_fake = fake_in.rows as f64;
    let (d_real, tape_r) = disc.forward_batch(real_in, Mode::Eval, None)?;
    let (d_fake, tape_f) = disc.forward_batch(fake_in, Mode::Eval, None)?;
    let loss = super::loss_d(&d_real.data, &d_fake.data);

    let grad_r = scale_shift_grad(&d_real, 1.0, n_real);
    let (grads_r, _) = disc.backward(&tape_r, &grad_r, true)?;
    let grad_f = scale_shift_grad(&d_fake, 0.0, n_fake);
    let (grads_f, _) = disc.backward(&tape_f, &grad_f, true)?;

    let mut grads = grads_r.unwrap();
    grads.add_assign(&grads_f.unwrap());
    Ok((loss, grads))
}

/// Value and generator-parameter gradients of the generator objective with
/// the discriminator frozen, dropout inactive. Used for gradient
/// verification.
pub fn gen_loss_and_grads(
    gen: &DenseNetwork,
    disc: &DenseNetwork,
    z: &Matrix,
    ctx: &Matrix,
    cond: &Matrix,
    targets: &Matrix,
    lambda_l1: f64,
) -> Result<(f64, Gradients), NeuralError> {
    let n = z.rows as f64;
    let g_in = hconcat(z, ctx);
    let (g_out, g_tape) = gen.forward_batch(&g_in, Mode::Eval, None)?;
    let fake_in = hconcat(&g_out, cond);
    let (d_out, d_tape) = disc.forward_batch(&fake_in, Mode::Eval, None)?;
    let loss = super::loss_g(&d_out.data, &g_out, targets, lambda_l1);

    let grad_d = scale_shift_grad(&d_out, 1.0, n);
    let (_, grad_d_in) = disc.backward(&d_tape, &grad_d, false)?;
    let bins = g_out.cols;
    let mut grad_g_out = Matrix::zeros(g_out.rows, g_out.cols);
    for r in 0..g_out.rows {
        for c in 0..bins {
            let diff = g_out.row(r)[c] - targets.row(r)[c];
            grad_g_out.row_mut(r)[c] = grad_d_in.row(r)[c] + lambda_l1 / n * sign(diff);
        }
    }
    let (grads, _) = gen.backward(&g_tape, &grad_g_out, true)?;
    Ok((loss, grads.unwrap()))
}

impl Gradients {
    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy_data(frames: usize, dim: usize, bins: usize, j: usize, seed: u64) -> TrainingData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let current = Matrix {
            rows: frames,
            cols: dim,
            data: (0..frames * dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
        };
        let context = crate::features::add_context(&current, j);
        let targets = Matrix {
            rows: frames,
            cols: bins,
            data: (0..frames * bins).map(|_| rng.random_range(0.05..0.95)).collect(),
        };
        TrainingData { context, current, targets }
    }

    fn tiny_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 16,
            lr_schedule: crate::neural::half_split_schedule(epochs, 1e-3, 1e-4),
            hidden_layers: vec![24, 24],
            z_dim: 4,
            seed: 11,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_the_initialized_model_with_empty_history() {
        let data = toy_data(40, 6, 5, 1, 1);
        let (model, history) =
            train(&data, FeatureSet::MfccNssc, 1, 5, &tiny_config(0)).unwrap();
        assert!(history.is_empty());
        assert_eq!(model.epochs_done, 0);
        assert_eq!(model.gen_opt.step, 0);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = TrainingData {
            context: Matrix::zeros(0, 18),
            current: Matrix::zeros(0, 6),
            targets: Matrix::zeros(0, 5),
        };
        assert!(matches!(
            train(&data, FeatureSet::MfccNssc, 1, 5, &tiny_config(1)),
            Err(NeuralError::EmptyDataset)
        ));
    }

    #[test]
    fn misaligned_caches_are_rejected() {
        let mut data = toy_data(40, 6, 5, 1, 2);
        data.targets = Matrix::zeros(39, 5);
        assert!(matches!(
            train(&data, FeatureSet::MfccNssc, 1, 5, &tiny_config(1)),
            Err(NeuralError::CacheMismatch(_))
        ));
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let data = toy_data(60, 6, 5, 1, 3);
        let cfg = tiny_config(3);
        let (a, ha) = train(&data, FeatureSet::MfccNssc, 1, 5, &cfg).unwrap();
        let (b, hb) = train(&data, FeatureSet::MfccNssc, 1, 5, &cfg).unwrap();
        assert_eq!(a.generator, b.generator);
        assert_eq!(a.discriminator, b.discriminator);
        assert_eq!(a.gen_opt, b.gen_opt);
        for (x, y) in ha.iter().zip(&hb) {
            assert_eq!(x.d_loss, y.d_loss);
            assert_eq!(x.g_adv, y.g_adv);
            assert_eq!(x.g_l1, y.g_l1);
        }
    }

    #[test]
    fn generator_step_never_mutates_the_discriminator() {
        let data = toy_data(20, 6, 5, 1, 4);
        let cfg = tiny_config(1);
        let (mut model, _) =
            train(&data, FeatureSet::MfccNssc, 1, 5, &TrainConfig { epochs: 0, ..cfg.clone() })
                .unwrap();
        model.config = cfg;

        let context = model.norm.as_ref().unwrap().apply(&data.context);
        let current = model.norm.as_ref().unwrap().apply(&data.current);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch: Vec<usize> = (0..16).collect();
        let ctx_b = context.gather(&batch);
        let cur_b = current.gather(&batch);
        let tgt_b = data.targets.gather(&batch);

        disc_step_real(&mut model, &tgt_b, &cur_b, 1e-3, &mut rng).unwrap();
        disc_step_fake(&mut model, &ctx_b, &cur_b, 1e-3, &mut rng).unwrap();
        let disc_before = model.discriminator.clone();
        let disc_opt_before = model.disc_opt.clone();
        let gen_before = model.generator.clone();

        gen_step(&mut model, &ctx_b, &cur_b, &tgt_b, 1e-3, &mut rng).unwrap();
        assert_eq!(model.discriminator, disc_before, "G step touched D parameters");
        assert_eq!(model.disc_opt, disc_opt_before, "G step touched D optimizer state");
        assert_ne!(model.generator, gen_before, "G step did not update G");
        assert_eq!(model.disc_opt.step, 2);
        assert_eq!(model.gen_opt.step, 1);
    }

    #[test]
    fn toy_regression_reduces_l1_error() {
        // constant target mask 0.8 learned from random features
        let mut data = toy_data(200, 6, 5, 1, 5);
        data.targets.data.fill(0.8);
        let cfg = TrainConfig {
            epochs: 10,
            batch_size: 32,
            lr_schedule: crate::neural::half_split_schedule(10, 1e-3, 1e-3),
            hidden_layers: vec![32, 32],
            z_dim: 4,
            seed: 6,
            ..TrainConfig::default()
        };
        let (_, history) = train(&data, FeatureSet::MfccNssc, 1, 5, &cfg).unwrap();
        let first = history.first().unwrap().g_l1;
        let last = history.last().unwrap().g_l1;
        assert!(last < first, "L1 did not improve: {first} -> {last}");
    }

    #[test]
    fn resume_matches_uninterrupted_run_exactly() {
        let data = toy_data(50, 6, 5, 1, 7);
        let cfg = tiny_config(4);

        let (full, history_full) = train(&data, FeatureSet::MfccNssc, 1, 5, &cfg).unwrap();

        let half_cfg = TrainConfig { epochs: 2, ..cfg.clone() };
        let (mut resumed, mut history) =
            train(&data, FeatureSet::MfccNssc, 1, 5, &half_cfg).unwrap();
        resumed.config = cfg;
        history.extend(resume_training(&mut resumed, &data).unwrap());

        assert_eq!(full.generator, resumed.generator);
        assert_eq!(full.discriminator, resumed.discriminator);
        assert_eq!(full.gen_opt, resumed.gen_opt);
        assert_eq!(full.disc_opt, resumed.disc_opt);
        for (a, b) in history_full.iter().zip(&history) {
            assert_eq!((a.d_loss, a.g_adv, a.g_l1), (b.d_loss, b.g_adv, b.g_l1));
        }
    }
}
