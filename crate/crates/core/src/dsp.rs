//! Framing, windowing, pre-emphasis, forward STFT and weighted overlap-add
//! inverse STFT.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::signal::AudioBuffer;

/// Analysis/synthesis parameters. The FFT size equals the frame size and the
/// window is the periodic (DFT-even) Hann window, which sums to a constant at
/// 50% overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub frame_size: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl StftConfig {
    pub fn new(frame_size: usize, hop: usize, sample_rate: u32) -> Self {
        assert!(frame_size.is_multiple_of(2), "frame size must be even");
        assert!(hop > 0 && hop <= frame_size, "need 0 < hop <= frame size");
        Self { frame_size, hop, sample_rate }
    }

    /// 512-sample (32 ms) frames with 50% overlap at 16 kHz.
    pub fn default_16k() -> Self {
        Self::new(512, 256, 16_000)
    }

    pub fn bins(&self) -> usize {
        self.frame_size / 2 + 1
    }

    pub fn num_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_size {
            0
        } else {
            (n_samples - self.frame_size) / self.hop + 1
        }
    }
}

/// Frames-by-bins complex STFT coefficients (bins `0..=M/2` of a real
/// signal).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<Complex64>,
    pub config: StftConfig,
}

impl ComplexSpectrogram {
    pub fn zeros(frames: usize, config: StftConfig) -> Self {
        let bins = config.bins();
        Self { frames, bins, data: vec![Complex64::new(0.0, 0.0); frames * bins], config }
    }

    #[inline]
    pub fn frame(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.bins..(k + 1) * self.bins]
    }

    #[inline]
    pub fn frame_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.data[k * self.bins..(k + 1) * self.bins]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.frames == other.frames && self.bins == other.bins && self.config == other.config
    }
}

#[derive(Debug, Error)]
pub enum DspError {
    #[error("input too short: {got} samples, need at least {need}")]
    InputTooShort { got: usize, need: usize },
}

/// Periodic (DFT-even) Hann window of length `m`.
pub fn hann_periodic(m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / m as f64).cos()))
        .collect()
}

/// First-order high-pass `y'[m] = y[m] - alpha * y[m-1]` with `y[-1] = 0`.
pub fn preemphasis(x: &AudioBuffer, alpha: f64) -> AudioBuffer {
    let mut out = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &s in &x.samples {
        out.push(s - alpha * prev);
        prev = s;
    }
    AudioBuffer::new(out, x.sample_rate)
}

fn windowed_frame(samples: &[f64], window: &[f64], start: usize) -> Vec<Complex64> {
    samples[start..start + window.len()]
        .iter()
        .zip(window)
        .map(|(&s, &w)| Complex64::new(s * w, 0.0))
        .collect()
}

/// Forward STFT. Frame `k` covers samples `[k*hop, k*hop + frame_size)`;
/// bins above `M/2` are dropped (real-input symmetry).
pub fn stft(x: &AudioBuffer, cfg: &StftConfig) -> Result<ComplexSpectrogram, DspError> {
    #[cfg(feature = "parallel")]
    {
        stft_par(x, cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        stft_sequential(x, cfg)
    }
}

/// Sequential reference path for [`stft`]; outputs are bit-identical.
pub fn stft_sequential(x: &AudioBuffer, cfg: &StftConfig) -> Result<ComplexSpectrogram, DspError> {
    let (window, fft, frames) = stft_setup(x, cfg)?;
    let mut spec = ComplexSpectrogram::zeros(frames, *cfg);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for k in 0..frames {
        let mut buf = windowed_frame(&x.samples, &window, k * cfg.hop);
        fft.process_with_scratch(&mut buf, &mut scratch);
        spec.frame_mut(k).copy_from_slice(&buf[..cfg.bins()]);
    }
    Ok(spec)
}

#[cfg(feature = "parallel")]
fn stft_par(x: &AudioBuffer, cfg: &StftConfig) -> Result<ComplexSpectrogram, DspError> {
    let (window, fft, frames) = stft_setup(x, cfg)?;
    let mut spec = ComplexSpectrogram::zeros(frames, *cfg);
    let bins = cfg.bins();
    spec.data
        .par_chunks_mut(bins)
        .enumerate()
        .for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, (k, out)| {
                let mut buf = windowed_frame(&x.samples, &window, k * cfg.hop);
                fft.process_with_scratch(&mut buf, scratch);
                out.copy_from_slice(&buf[..bins]);
            },
        );
    Ok(spec)
}

type FftHandle = std::sync::Arc<dyn rustfft::Fft<f64>>;

fn stft_setup(x: &AudioBuffer, cfg: &StftConfig) -> Result<(Vec<f64>, FftHandle, usize), DspError> {
    if x.len() < cfg.frame_size {
        return Err(DspError::InputTooShort { got: x.len(), need: cfg.frame_size });
    }
    let window = hann_periodic(cfg.frame_size);
    let fft = FftPlanner::new().plan_fft_forward(cfg.frame_size);
    Ok((window, fft, cfg.num_frames(x.len())))
}

/// Inverse STFT by weighted overlap-add: conjugate-symmetric extension,
/// inverse transform, synthesis window, then per-sample division by the
/// overlap-added squared window. The divisor is floored at 0.25 so the edge
/// ramp attenuates instead of amplifying; interior samples (where the
/// squared-window sum is at least 0.5) are untouched by the floor. Output
/// length is `(frames-1)*hop + frame_size`.
pub fn istft(spec: &ComplexSpectrogram) -> AudioBuffer {
    #[cfg(feature = "parallel")]
    {
        let frames = istft_frames_par(spec);
        istft_overlap_add(spec, frames)
    }
    #[cfg(not(feature = "parallel"))]
    {
        istft_sequential(spec)
    }
}

/// Sequential reference path for [`istft`]; outputs are bit-identical.
pub fn istft_sequential(spec: &ComplexSpectrogram) -> AudioBuffer {
    let frames = istft_frames_seq(spec);
    istft_overlap_add(spec, frames)
}

fn expand_symmetric(frame: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut full = Vec::with_capacity(m);
    full.extend_from_slice(frame);
    for f in (1..m / 2).rev() {
        full.push(frame[f].conj());
    }
    full
}

fn istft_frames_seq(spec: &ComplexSpectrogram) -> Vec<Vec<f64>> {
    let m = spec.config.frame_size;
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
    (0..spec.frames)
        .map(|k| {
            let mut full = expand_symmetric(spec.frame(k), m);
            ifft.process_with_scratch(&mut full, &mut scratch);
            full.iter().map(|c| c.re / m as f64).collect()
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn istft_frames_par(spec: &ComplexSpectrogram) -> Vec<Vec<f64>> {
    let m = spec.config.frame_size;
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    (0..spec.frames)
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()],
            |scratch, k| {
                let mut full = expand_symmetric(spec.frame(k), m);
                ifft.process_with_scratch(&mut full, scratch);
                full.iter().map(|c| c.re / m as f64).collect()
            },
        )
        .collect()
}

fn istft_overlap_add(spec: &ComplexSpectrogram, frames: Vec<Vec<f64>>) -> AudioBuffer {
    let m = spec.config.frame_size;
    let hop = spec.config.hop;
    let out_len = if spec.frames == 0 { 0 } else { (spec.frames - 1) * hop + m };
    let window = hann_periodic(m);

    let mut num = vec![0.0f64; out_len];
    let mut den = vec![0.0f64; out_len];
    for (k, frame) in frames.iter().enumerate() {
        let start = k * hop;
        for i in 0..m {
            num[start + i] += window[i] * frame[i];
            den[start + i] += window[i] * window[i];
        }
    }
    let samples = num.iter().zip(&den).map(|(&n, &d)| n / d.max(0.25)).collect();
    AudioBuffer::new(samples, spec.config.sample_rate)
}
