//! Conditional least-squares GAN: dense generator and discriminator,
//! adversarial losses with an L1 term, ADAM training, inference and
//! checkpointing.

pub mod adam;
pub mod checkpoint;
pub mod linalg;
pub mod network;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use network::{Activation, DenseNetwork, Gradients, Layer, Mode, Tape, LEAKY_SLOPE};
pub use train::{
    disc_loss_and_grads, gen_loss_and_grads, resume_training, train, EpochStats, TrainingData,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::features::FeatureSet;
use crate::mask::IrmSpectrogram;
use crate::mat::Matrix;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tape mismatch: {0}")]
    TapeMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("cache mismatch: {0}")]
    CacheMismatch(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint version mismatch: file has {found}, supported {supported}")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("checkpoint checksum mismatch")]
    ChecksumMismatch,
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
}

/// Discriminator objective: `mean((D_real - 1)^2) + mean(D_fake^2)`, the
/// expectation realized as the batch mean.
pub fn loss_d(d_real: &[f64], d_fake: &[f64]) -> f64 {
    let real: f64 = d_real.iter().map(|d| (d - 1.0) * (d - 1.0)).sum::<f64>() / d_real.len() as f64;
    let fake: f64 = d_fake.iter().map(|d| d * d).sum::<f64>() / d_fake.len() as f64;
    real + fake
}

/// Generator objective: `mean((D_fake - 1)^2)` plus `lambda` times the batch
/// mean of the per-sample L1 distance between predicted and target masks.
pub fn loss_g(d_fake: &[f64], mask_hat: &Matrix, mask: &Matrix, lambda_l1: f64) -> f64 {
    assert_eq!(mask_hat.rows, mask.rows);
    assert_eq!(mask_hat.cols, mask.cols);
    let adv: f64 =
        d_fake.iter().map(|d| (d - 1.0) * (d - 1.0)).sum::<f64>() / d_fake.len() as f64;
    adv + lambda_l1 * mean_l1(mask_hat, mask)
}

pub(crate) fn mean_l1(a: &Matrix, b: &Matrix) -> f64 {
    let total: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).sum();
    total / a.rows as f64
}

/// Per-dimension z-score statistics of the conditioning features.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Population statistics over the rows, with the standard deviation
    /// floored at 1e-8.
    pub fn fit(data: &Matrix) -> Self {
        let n = data.rows.max(1) as f64;
        let dim = data.cols;
        let mut mean = vec![0.0f64; dim];
        for r in 0..data.rows {
            for (m, &v) in mean.iter_mut().zip(data.row(r)) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0f64; dim];
        for r in 0..data.rows {
            for (s, (&v, &m)) in var.iter_mut().zip(data.row(r).iter().zip(&mean)) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(1e-8)).collect();
        Self { mean, std }
    }

    /// Normalize rows whose width is a whole multiple of the stats
    /// dimension; context-stacked vectors are normalized segment by
    /// segment with the same per-dimension statistics.
    pub fn apply(&self, data: &Matrix) -> Matrix {
        let dim = self.mean.len();
        assert!(
            dim > 0 && data.cols.is_multiple_of(dim),
            "row width {} is not a multiple of the stats dimension {dim}",
            data.cols
        );
        let mut out = data.clone();
        for r in 0..out.rows {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                let d = c % dim;
                *v = (*v - self.mean[d]) / self.std[d];
            }
        }
        out
    }
}

/// How the latent vector is drawn at inference time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZPolicy {
    /// All-zeros latent input, for strict determinism across environments.
    Zeros,
    /// Standard-normal draws from a seeded generator, one vector per frame.
    Sample { seed: u64 },
}

/// Hyperparameters for one training run. Defaults: 50 epochs at batch 128,
/// learning rate 1e-4 for the first half of the epochs and 1e-5 for the
/// second, lambda 100, three hidden layers of 512 with dropout 0.2, and a
/// 15-element latent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_schedule: Vec<LrSpan>,
    pub lambda_l1: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    pub normalize_inputs: bool,
    pub z_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub dropout: f64,
}

/// Learning rate over an inclusive 1-based epoch range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSpan {
    pub from_epoch: usize,
    pub to_epoch: usize,
    pub rate: f64,
}

/// Rate `hi` for the first half of the epochs, `lo` for the second.
pub fn half_split_schedule(epochs: usize, hi: f64, lo: f64) -> Vec<LrSpan> {
    let first = epochs.div_ceil(2);
    let mut spans = Vec::new();
    if first >= 1 {
        spans.push(LrSpan { from_epoch: 1, to_epoch: first, rate: hi });
    }
    if epochs > first {
        spans.push(LrSpan { from_epoch: first + 1, to_epoch: epochs, rate: lo });
    }
    spans
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 128,
            lr_schedule: half_split_schedule(50, 1e-4, 1e-5),
            lambda_l1: 100.0,
            adam: AdamConfig::default(),
            seed: 0,
            normalize_inputs: true,
            z_dim: 15,
            hidden_layers: vec![512, 512, 512],
            dropout: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn rate_for_epoch(&self, epoch: usize) -> f64 {
        for span in &self.lr_schedule {
            if (span.from_epoch..=span.to_epoch).contains(&epoch) {
                return span.rate;
            }
        }
        self.lr_schedule.last().map_or(1e-4, |s| s.rate)
    }

    pub fn schedule_string(&self) -> String {
        self.lr_schedule
            .iter()
            .map(|s| format!("{}-{}:{}", s.from_epoch, s.to_epoch, s.rate))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Trained generator/discriminator pair with optimizer state, input
/// normalization, and the configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub generator: DenseNetwork,
    pub discriminator: DenseNetwork,
    pub gen_opt: AdamState,
    pub disc_opt: AdamState,
    pub norm: Option<NormStats>,
    pub feature_set: FeatureSet,
    /// Context frames on each side (`j`).
    pub context: usize,
    /// Current-frame conditioning width.
    pub frame_dim: usize,
    /// Mask width (`M/2 + 1`).
    pub bins: usize,
    pub config: TrainConfig,
    pub epochs_done: usize,
}

impl GanModel {
    pub fn context_dim(&self) -> usize {
        (2 * self.context + 1) * self.frame_dim
    }

    /// Generator input width: latent vector plus context-stacked features.
    pub fn generator_input_dim(&self) -> usize {
        self.config.z_dim + self.context_dim()
    }
}

pub(crate) fn sample_z(rng: &mut ChaCha8Rng, rows: usize, z_dim: usize) -> Matrix {
    let data = (0..rows * z_dim).map(|_| StandardNormal.sample(rng)).collect();
    Matrix { rows, cols: z_dim, data }
}

/// Predict a mask for every frame of one utterance. The generator runs in
/// eval mode (no dropout); the generator input per frame is the latent
/// vector followed by the normalized context features.
pub fn infer_mask(
    model: &GanModel,
    context: &Matrix,
    z_policy: ZPolicy,
) -> Result<IrmSpectrogram, NeuralError> {
    if context.cols != model.context_dim() {
        return Err(NeuralError::DimensionMismatch {
            expected: model.context_dim(),
            found: context.cols,
        });
    }
    let normed = match &model.norm {
        Some(stats) => stats.apply(context),
        None => context.clone(),
    };
    let frames = context.rows;
    let z = match z_policy {
        ZPolicy::Zeros => Matrix::zeros(frames, model.config.z_dim),
        ZPolicy::Sample { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_z(&mut rng, frames, model.config.z_dim)
        }
    };
    let g_in = linalg::hconcat(&z, &normed);
    let (out, _) = model.generator.forward_batch(&g_in, Mode::Eval, None)?;
    Ok(IrmSpectrogram::new(frames, model.bins, out.data))
}
