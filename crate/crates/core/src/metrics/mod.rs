//! Objective evaluation: plain energy-ratio SDR and STOI.

pub mod resample;
mod stoi;

pub use stoi::stoi;

use thiserror::Error;

use crate::signal::AudioBuffer;

/// Returned instead of +inf when the error energy underflows (estimate
/// numerically equal to the reference).
pub const SDR_SENTINEL_DB: f64 = 200.0;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero-energy reference signal")]
    ZeroReference,
    #[error("signal too short for STOI: {got} samples at 10 kHz, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("unpaired file: {0}")]
    UnpairedFile(String),
}

/// Per-file evaluation scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub sdr_db: f64,
    pub stoi: f64,
}

/// Plain signal-to-distortion ratio `10*log10(sum(s^2) / sum((s-s_hat)^2))`.
///
/// This is the scale-sensitive form: `sdr(s, c*s)` is finite for `c != 1`.
/// When the error energy is below `1e-20` of the signal energy the sentinel
/// [`SDR_SENTINEL_DB`] is returned.
pub fn sdr(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<f64, MetricError> {
    if reference.len() != estimate.len() {
        return Err(MetricError::LengthMismatch {
            left: reference.len(),
            right: estimate.len(),
        });
    }
    let signal: f64 = reference.samples.iter().map(|s| s * s).sum();
    if signal <= 0.0 {
        return Err(MetricError::ZeroReference);
    }
    let error: f64 = reference
        .samples
        .iter()
        .zip(&estimate.samples)
        .map(|(s, e)| (s - e) * (s - e))
        .sum();
    if error < 1e-20 * signal {
        return Ok(SDR_SENTINEL_DB);
    }
    Ok(10.0 * (signal / error).log10())
}
