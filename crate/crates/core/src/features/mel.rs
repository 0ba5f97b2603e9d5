//! Mel filterbank, subband energies, MFCC, and (normalized) spectral
//! subband centroids.

use rustfft::num_complex::Complex64;

use super::FeatureError;
use crate::dsp::StftConfig;

/// Energy floor applied to subband energies before any downstream logarithm.
pub const SSE_FLOOR: f64 = 1e-10;

pub fn mel_from_hz(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn hz_from_mel(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// One triangular band. `low` and `high` are the corner bins (zero weight),
/// `apex` carries weight exactly 1, and `weights[i]` is the weight of bin
/// `low + i` for `i == 0 ..= high - low`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelBand {
    pub low: usize,
    pub apex: usize,
    pub high: usize,
    pub weights: Vec<f64>,
}

impl MelBand {
    #[inline]
    pub fn weight_at(&self, bin: usize) -> f64 {
        if bin < self.low || bin > self.high {
            0.0
        } else {
            self.weights[bin - self.low]
        }
    }

    pub fn width(&self) -> f64 {
        (self.high - self.low) as f64
    }

    pub fn midpoint(&self) -> f64 {
        (self.low + self.high) as f64 / 2.0
    }
}

/// Bank of triangular filters with peak frequencies equally spaced on the
/// mel scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub bands: Vec<MelBand>,
    pub f_min: f64,
    pub f_max: f64,
}

impl MelFilterbank {
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

/// Build `n_bands` triangular filters between `f_min` and `f_max`. The
/// `n_bands + 2` corner frequencies are equally spaced in mel and mapped to
/// the nearest FFT bin; band `b` rises from corner `b` to a peak of exactly 1
/// at corner `b+1` and falls to zero at corner `b+2`.
pub fn build_mel_filterbank(
    n_bands: usize,
    f_min: f64,
    f_max: f64,
    cfg: &StftConfig,
) -> Result<MelFilterbank, FeatureError> {
    let nyquist = cfg.sample_rate as f64 / 2.0;
    if !(0.0 <= f_min && f_min < f_max && f_max <= nyquist) {
        return Err(FeatureError::ConfigMismatch(format!(
            "need 0 <= f_min < f_max <= {nyquist} Hz, got [{f_min}, {f_max}]"
        )));
    }

    let mel_lo = mel_from_hz(f_min);
    let mel_hi = mel_from_hz(f_max);
    let corners: Vec<usize> = (0..n_bands + 2)
        .map(|i| {
            let mel = mel_lo + (mel_hi - mel_lo) * i as f64 / (n_bands + 1) as f64;
            let hz = hz_from_mel(mel);
            (hz * cfg.frame_size as f64 / cfg.sample_rate as f64).round() as usize
        })
        .collect();

    for w in corners.windows(2) {
        if w[1] <= w[0] {
            return Err(FeatureError::DegenerateBand { bin: w[0] });
        }
    }

    let bands = (0..n_bands)
        .map(|b| {
            let (low, apex, high) = (corners[b], corners[b + 1], corners[b + 2]);
            let weights = (low..=high)
                .map(|f| {
                    if f <= apex {
                        (f - low) as f64 / (apex - low) as f64
                    } else {
                        (high - f) as f64 / (high - apex) as f64
                    }
                })
                .collect();
            MelBand { low, apex, high, weights }
        })
        .collect();

    Ok(MelFilterbank { bands, f_min, f_max })
}

/// Filter-weighted power per band, floored at [`SSE_FLOOR`].
pub fn compute_sse(spec_frame: &[Complex64], fb: &MelFilterbank) -> Vec<f64> {
    fb.bands
        .iter()
        .map(|band| {
            let sum: f64 = (band.low..=band.high.min(spec_frame.len() - 1))
                .map(|f| band.weight_at(f) * spec_frame[f].norm_sqr())
                .sum();
            sum.max(SSE_FLOOR)
        })
        .collect()
}

/// Cosine transform of the log subband energies:
/// `MFCC(p) = sqrt(2/B) * sum_b log10(SSE(b)) * cos(p*pi/B * (b - 0.5))`.
pub fn compute_mfcc(sse: &[f64], n_coeffs: usize) -> Vec<f64> {
    let b_count = sse.len() as f64;
    let scale = (2.0 / b_count).sqrt();
    (0..n_coeffs)
        .map(|p| {
            let mut acc = 0.0;
            for (b, &e) in sse.iter().enumerate() {
                let angle = p as f64 * std::f64::consts::PI / b_count * (b as f64 - 0.5);
                acc += e.log10() * angle.cos();
            }
            scale * acc
        })
        .collect()
}

/// Energy-weighted mean bin index per band. A band with (near) zero energy
/// falls back to its midpoint `(l_b + h_b) / 2`.
pub fn compute_ssc(spec_frame: &[Complex64], fb: &MelFilterbank) -> Vec<f64> {
    fb.bands
        .iter()
        .map(|band| {
            let mut num = 0.0;
            let mut den = 0.0;
            for f in band.low..=band.high.min(spec_frame.len() - 1) {
                let w = band.weight_at(f) * spec_frame[f].norm_sqr();
                num += f as f64 * w;
                den += w;
            }
            if den < 1e-20 {
                band.midpoint()
            } else {
                num / den
            }
        })
        .collect()
}

/// Centroids rescaled as `(SSC(b) - (h_b - l_b)) / (h_b - l_b)`; only the
/// lowest-frequency `keep` bands are retained.
pub fn compute_nssc(ssc: &[f64], fb: &MelFilterbank, keep: usize) -> Vec<f64> {
    ssc.iter()
        .zip(&fb.bands)
        .take(keep)
        .map(|(&c, band)| (c - band.width()) / band.width())
        .collect()
}
