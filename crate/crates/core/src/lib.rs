//! Speech enhancement built on compact audio-fingerprint features.
//!
//! The pipeline: mix clean speech with noise at a prescribed SNR, extract
//! per-frame features (STFT magnitudes, MFCC, normalized spectral subband
//! centroids and their time deltas), train a conditional least-squares GAN
//! to predict the ideal ratio mask, apply the predicted mask to the noisy
//! STFT magnitude and resynthesize with the noisy phase. Objective quality
//! is measured with plain SDR and STOI.
//!
//! All numerics are `f64` and deterministic for a given seed. With the
//! default `parallel` feature, per-frame transforms and batch linear algebra
//! run on rayon; outputs are bit-identical to the sequential fallback
//! (`--no-default-features`), which every hot kernel also exposes as a
//! `*_sequential` variant for comparison benches.

// indexed loops over frames/bins read better in DSP code
#![allow(clippy::needless_range_loop)]

pub mod cache;
pub mod dsp;
pub mod features;
pub mod mask;
pub mod mat;
pub mod metrics;
pub mod neural;
pub mod signal;
pub mod util;

pub use dsp::{ComplexSpectrogram, StftConfig};
pub use features::{FeatureConfig, FeatureSet};
pub use mask::IrmSpectrogram;
pub use mat::Matrix;
pub use neural::{DenseNetwork, GanModel, TrainConfig};
pub use signal::AudioBuffer;
