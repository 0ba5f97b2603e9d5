//! Ideal ratio mask targets and masked reconstruction.

use thiserror::Error;

use crate::dsp::{self, ComplexSpectrogram};
use crate::signal::AudioBuffer;

/// Per-cell ratio mask in `[0, 1]`, frames by bins.
#[derive(Debug, Clone, PartialEq)]
pub struct IrmSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<f64>,
}

impl IrmSpectrogram {
    pub fn new(frames: usize, bins: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), frames * bins);
        Self { frames, bins, data }
    }

    #[inline]
    pub fn frame(&self, k: usize) -> &[f64] {
        &self.data[k * self.bins..(k + 1) * self.bins]
    }
}

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
}

fn shape_of(frames: usize, bins: usize) -> String {
    format!("{frames}x{bins}")
}

/// Ratio mask from the known clean and noise spectrograms:
/// `sqrt(|S|^2 / (|S|^2 + |N|^2))`, with 0.5 for cells where both are
/// (near) zero.
pub fn compute_irm(
    clean: &ComplexSpectrogram,
    noise: &ComplexSpectrogram,
) -> Result<IrmSpectrogram, MaskError> {
    if !clean.same_shape(noise) {
        return Err(MaskError::ShapeMismatch {
            left: shape_of(clean.frames, clean.bins),
            right: shape_of(noise.frames, noise.bins),
        });
    }
    let data = clean
        .data
        .iter()
        .zip(&noise.data)
        .map(|(s, n)| {
            let ps = s.norm_sqr();
            let pn = n.norm_sqr();
            if ps + pn < 1e-20 {
                0.5
            } else {
                (ps / (ps + pn)).sqrt()
            }
        })
        .collect();
    Ok(IrmSpectrogram::new(clean.frames, clean.bins, data))
}

/// Scale the noisy magnitude by the mask, keep the noisy phase, and
/// resynthesize. Output length is `(frames-1)*hop + frame_size`; callers
/// trim or pad as needed.
pub fn apply_mask_and_reconstruct(
    mask: &IrmSpectrogram,
    noisy: &ComplexSpectrogram,
) -> Result<AudioBuffer, MaskError> {
    if mask.frames != noisy.frames || mask.bins != noisy.bins {
        return Err(MaskError::ShapeMismatch {
            left: shape_of(mask.frames, mask.bins),
            right: shape_of(noisy.frames, noisy.bins),
        });
    }
    let mut masked = noisy.clone();
    for (c, &m) in masked.data.iter_mut().zip(&mask.data) {
        *c *= m; // |S_hat| = m * |Y| with the phase of Y preserved
    }
    Ok(dsp::istft(&masked))
}
