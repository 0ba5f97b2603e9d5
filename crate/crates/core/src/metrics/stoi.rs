//! Short-time objective intelligibility.
//!
//! The standard recipe: resample both signals to 10 kHz, drop frames more
//! than 40 dB below the loudest clean frame, take 256-sample frames with a
//! 512-point transform at 50% overlap, group bins into 15 one-third-octave
//! bands from 150 Hz, then correlate clean and (normalized, clipped)
//! degraded band envelopes over 384 ms segments and average.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::resample::resample;
use super::MetricError;
use crate::signal::AudioBuffer;

const FS: u32 = 10_000;
const FRAME: usize = 256;
const HOP: usize = 128;
const NFFT: usize = 512;
const NUM_BANDS: usize = 15;
const MIN_FREQ: f64 = 150.0;
/// Segment length in frames (384 ms at 10 kHz with 128-sample hop).
const SEG: usize = 30;
const DYN_RANGE_DB: f64 = 40.0;
const BETA_DB: f64 = -15.0;

/// Symmetric Hann window without zero endpoints, as in the reference
/// formulation.
fn hanning(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * (i + 1) as f64 / (n + 1) as f64).cos()))
        .collect()
}

/// STOI between a clean reference and a degraded estimate of equal length.
/// The result is clamped to `[0, 1]`.
pub fn stoi(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<f64, MetricError> {
    if reference.len() != estimate.len() {
        return Err(MetricError::LengthMismatch {
            left: reference.len(),
            right: estimate.len(),
        });
    }
    let x = resample(&reference.samples, reference.sample_rate, FS);
    let y = resample(&estimate.samples, estimate.sample_rate, FS);

    let (x, y) = remove_silent_frames(&x, &y)?;
    let x_bands = band_envelopes(&x);
    let y_bands = band_envelopes(&y);
    let frames = x_bands.len() / NUM_BANDS;
    if frames < SEG {
        return Err(MetricError::TooShort { got: x.len(), need: (SEG - 1) * HOP + FRAME });
    }

    let clip = 10f64.powf(-BETA_DB / 20.0);
    let mut total = 0.0;
    let mut count = 0usize;
    for m in SEG..=frames {
        for band in 0..NUM_BANDS {
            let xs: Vec<f64> =
                (m - SEG..m).map(|f| x_bands[f * NUM_BANDS + band]).collect();
            let ys: Vec<f64> =
                (m - SEG..m).map(|f| y_bands[f * NUM_BANDS + band]).collect();
            let ex: f64 = xs.iter().map(|v| v * v).sum();
            let ey: f64 = ys.iter().map(|v| v * v).sum();
            let alpha = if ey > 0.0 { (ex / ey).sqrt() } else { 0.0 };
            let clipped: Vec<f64> =
                ys.iter().zip(&xs).map(|(&yv, &xv)| (alpha * yv).min(xv * (1.0 + clip))).collect();
            total += correlation(&xs, &clipped);
            count += 1;
        }
    }
    Ok((total / count as f64).clamp(0.0, 1.0))
}

/// Keep only frames within 40 dB of the loudest clean frame; both signals
/// are rebuilt by overlap-adding the kept windowed frames.
fn remove_silent_frames(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MetricError> {
    if x.len() < FRAME {
        return Err(MetricError::TooShort { got: x.len(), need: (SEG - 1) * HOP + FRAME });
    }
    let w = hanning(FRAME);
    let n_frames = (x.len() - FRAME) / HOP + 1;

    let energies_db: Vec<f64> = (0..n_frames)
        .map(|f| {
            let start = f * HOP;
            let e: f64 = (0..FRAME).map(|i| (x[start + i] * w[i]).powi(2)).sum();
            20.0 * (e.sqrt() / (FRAME as f64).sqrt()).log10()
        })
        .collect();
    let max_db = energies_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = (0..n_frames)
        .filter(|&f| energies_db[f] - max_db + DYN_RANGE_DB > 0.0)
        .collect();
    if kept.is_empty() {
        return Err(MetricError::TooShort { got: 0, need: (SEG - 1) * HOP + FRAME });
    }

    let out_len = (kept.len() - 1) * HOP + FRAME;
    let mut xs = vec![0.0f64; out_len];
    let mut ys = vec![0.0f64; out_len];
    for (slot, &f) in kept.iter().enumerate() {
        let src = f * HOP;
        let dst = slot * HOP;
        for i in 0..FRAME {
            xs[dst + i] += x[src + i] * w[i];
            ys[dst + i] += y[src + i] * w[i];
        }
    }
    Ok((xs, ys))
}

/// One-third-octave band envelopes, frame-major: `sqrt(sum |X(f)|^2)` over
/// the bins of each band.
fn band_envelopes(signal: &[f64]) -> Vec<f64> {
    let bands = third_octave_bands();
    let w = hanning(FRAME);
    let fft = FftPlanner::new().plan_fft_forward(NFFT);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let n_frames = if signal.len() < FRAME { 0 } else { (signal.len() - FRAME) / HOP + 1 };
    let mut out = Vec::with_capacity(n_frames * NUM_BANDS);
    for f in 0..n_frames {
        let start = f * HOP;
        let mut buf: Vec<Complex64> = (0..NFFT)
            .map(|i| {
                if i < FRAME {
                    Complex64::new(signal[start + i] * w[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (lo, hi) in &bands {
            let power: f64 = buf[*lo..*hi].iter().map(|c| c.norm_sqr()).sum();
            out.push(power.sqrt());
        }
    }
    out
}

/// Band edges as half-open bin ranges `[lo, hi)`. Centers are
/// `150 * 2^(k/3)`; edges sit a sixth of an octave either side, mapped to
/// the nearest bin of the 512-point transform at 10 kHz.
fn third_octave_bands() -> Vec<(usize, usize)> {
    let bin_hz = FS as f64 / NFFT as f64;
    (0..NUM_BANDS)
        .map(|k| {
            let cf = MIN_FREQ * 2f64.powf(k as f64 / 3.0);
            let lo = cf * 2f64.powf(-1.0 / 6.0);
            let hi = cf * 2f64.powf(1.0 / 6.0);
            ((lo / bin_hz).round() as usize, (hi / bin_hz).round() as usize)
        })
        .collect()
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let u = a - mx;
        let v = b - my;
        num += u * v;
        dx += u * u;
        dy += v * v;
    }
    let den = (dx * dy).sqrt();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}
