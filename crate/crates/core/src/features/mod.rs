//! Per-frame feature vectors: subband energies, MFCC, normalized subband
//! centroids, their regression deltas, and context-frame concatenation.

mod delta;
mod mel;

pub use delta::{compute_delta, compute_deltas};
pub use mel::{
    build_mel_filterbank, compute_mfcc, compute_nssc, compute_sse, compute_ssc, hz_from_mel,
    mel_from_hz, MelBand, MelFilterbank, SSE_FLOOR,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dsp::{self, ComplexSpectrogram, DspError, StftConfig};
use crate::mat::Matrix;
use crate::signal::AudioBuffer;

/// Which feature segments a model is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    Stft,
    Mfcc,
    Nssc,
    StftMfcc,
    StftNssc,
    MfccNssc,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 6] = [
        FeatureSet::Stft,
        FeatureSet::Mfcc,
        FeatureSet::Nssc,
        FeatureSet::StftMfcc,
        FeatureSet::StftNssc,
        FeatureSet::MfccNssc,
    ];

    pub fn has_stft(self) -> bool {
        matches!(self, FeatureSet::Stft | FeatureSet::StftMfcc | FeatureSet::StftNssc)
    }

    pub fn has_mfcc(self) -> bool {
        matches!(self, FeatureSet::Mfcc | FeatureSet::StftMfcc | FeatureSet::MfccNssc)
    }

    pub fn has_nssc(self) -> bool {
        matches!(self, FeatureSet::Nssc | FeatureSet::StftNssc | FeatureSet::MfccNssc)
    }

    /// Stable id used in cache file headers.
    pub fn id(self) -> u8 {
        match self {
            FeatureSet::Stft => 0,
            FeatureSet::Mfcc => 1,
            FeatureSet::Nssc => 2,
            FeatureSet::StftMfcc => 3,
            FeatureSet::StftNssc => 4,
            FeatureSet::MfccNssc => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FeatureSet::Stft => "stft",
            FeatureSet::Mfcc => "mfcc",
            FeatureSet::Nssc => "nssc",
            FeatureSet::StftMfcc => "stft+mfcc",
            FeatureSet::StftNssc => "stft+nssc",
            FeatureSet::MfccNssc => "mfcc+nssc",
        };
        f.write_str(name)
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stft" => Ok(FeatureSet::Stft),
            "mfcc" => Ok(FeatureSet::Mfcc),
            "nssc" => Ok(FeatureSet::Nssc),
            "stft+mfcc" | "mfcc+stft" => Ok(FeatureSet::StftMfcc),
            "stft+nssc" | "nssc+stft" => Ok(FeatureSet::StftNssc),
            "mfcc+nssc" | "nssc+mfcc" => Ok(FeatureSet::MfccNssc),
            other => Err(format!(
                "unknown feature set `{other}` (expected stft, mfcc, nssc, stft+mfcc, stft+nssc or mfcc+nssc)"
            )),
        }
    }
}

/// Feature extraction parameters. Defaults: 64 mel bands between 0 and
/// 8 kHz, 22 MFCC, 22 NSSC, pre-emphasis 0.97, delta window 2, one context
/// frame on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub feature_set: FeatureSet,
    pub bands: usize,
    pub mfcc_count: usize,
    pub nssc_keep: usize,
    pub preemphasis: f64,
    pub delta_window: usize,
    pub context: usize,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            feature_set: FeatureSet::MfccNssc,
            bands: 64,
            mfcc_count: 22,
            nssc_keep: 22,
            preemphasis: 0.97,
            delta_window: 2,
            context: 1,
            f_min: 0.0,
            f_max: 8000.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| Err(FeatureError::ConfigMismatch(msg));
        if self.bands == 0 {
            return bad("bands must be positive".into());
        }
        if !(1..=self.bands).contains(&self.mfcc_count) {
            return bad(format!("mfcc_count must be in 1..={}", self.bands));
        }
        if !(1..=self.bands).contains(&self.nssc_keep) {
            return bad(format!("nssc_keep must be in 1..={}", self.bands));
        }
        if !(0.0..=1.0).contains(&self.preemphasis) {
            return bad("preemphasis must be in [0, 1]".into());
        }
        if self.delta_window == 0 {
            return bad("delta_window must be at least 1".into());
        }
        Ok(())
    }

    /// Per-frame vector length for this feature set.
    pub fn frame_dim(&self, bins: usize) -> usize {
        let set = self.feature_set;
        (if set.has_stft() { bins } else { 0 })
            + (if set.has_mfcc() { 3 * self.mfcc_count } else { 0 })
            + (if set.has_nssc() { 3 * self.nssc_keep } else { 0 })
    }

    /// Length after context concatenation: `(2j+1) * frame_dim`.
    pub fn context_dim(&self, bins: usize) -> usize {
        (2 * self.context + 1) * self.frame_dim(bins)
    }

    pub fn layout(&self, bins: usize) -> Vec<Segment> {
        let mut segs = Vec::new();
        if self.feature_set.has_stft() {
            segs.push(Segment { kind: SegmentKind::StftMag, len: bins });
        }
        if self.feature_set.has_mfcc() {
            segs.push(Segment { kind: SegmentKind::Mfcc, len: self.mfcc_count });
            segs.push(Segment { kind: SegmentKind::MfccDelta, len: self.mfcc_count });
            segs.push(Segment { kind: SegmentKind::MfccDelta2, len: self.mfcc_count });
        }
        if self.feature_set.has_nssc() {
            segs.push(Segment { kind: SegmentKind::Nssc, len: self.nssc_keep });
            segs.push(Segment { kind: SegmentKind::NsscDelta, len: self.nssc_keep });
            segs.push(Segment { kind: SegmentKind::NsscDelta2, len: self.nssc_keep });
        }
        segs
    }
}

/// Named slice of an assembled feature vector. Segment order is fixed per
/// feature set: STFT magnitude first when present, then MFCC with its deltas,
/// then NSSC with its deltas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    StftMag,
    Mfcc,
    MfccDelta,
    MfccDelta2,
    Nssc,
    NsscDelta,
    NsscDelta2,
}

/// Raw per-frame measurements before assembly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureFrame {
    pub stft_mag: Vec<f64>,
    pub sse: Vec<f64>,
    pub mfcc: Vec<f64>,
    pub ssc: Vec<f64>,
    pub nssc: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("degenerate mel band: two corner frequencies map to bin {bin}")]
    DegenerateBand { bin: usize },
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

/// Concatenate base, delta and double-delta segments for every frame in the
/// fixed layout order.
pub fn assemble_feature_vectors(
    frames: &[FeatureFrame],
    cfg: &FeatureConfig,
    bins: usize,
) -> Result<Matrix, FeatureError> {
    cfg.validate()?;
    let k = frames.len();
    let dim = cfg.frame_dim(bins);
    let mut out = Matrix::zeros(k, dim);
    if k == 0 {
        return Ok(out);
    }

    let set = cfg.feature_set;
    for (t, frame) in frames.iter().enumerate() {
        if set.has_stft() && frame.stft_mag.len() != bins {
            return Err(FeatureError::ConfigMismatch(format!(
                "frame {t}: stft segment has {} values, expected {bins}",
                frame.stft_mag.len()
            )));
        }
        if set.has_mfcc() && frame.mfcc.len() != cfg.mfcc_count {
            return Err(FeatureError::ConfigMismatch(format!(
                "frame {t}: {} mfcc values, expected {}",
                frame.mfcc.len(),
                cfg.mfcc_count
            )));
        }
        if set.has_nssc() && frame.nssc.len() != cfg.nssc_keep {
            return Err(FeatureError::ConfigMismatch(format!(
                "frame {t}: {} nssc values, expected {}",
                frame.nssc.len(),
                cfg.nssc_keep
            )));
        }
    }

    let mfcc_deltas = set.has_mfcc().then(|| {
        let traj = Matrix::from_rows(frames.iter().map(|f| f.mfcc.clone()).collect());
        let (d, dd) = compute_deltas(&traj, cfg.delta_window);
        (traj, d, dd)
    });
    let nssc_deltas = set.has_nssc().then(|| {
        let traj = Matrix::from_rows(frames.iter().map(|f| f.nssc.clone()).collect());
        let (d, dd) = compute_deltas(&traj, cfg.delta_window);
        (traj, d, dd)
    });

    for t in 0..k {
        let row = out.row_mut(t);
        let mut at = 0;
        if set.has_stft() {
            row[at..at + bins].copy_from_slice(&frames[t].stft_mag);
            at += bins;
        }
        if let Some((traj, d, dd)) = &mfcc_deltas {
            for part in [traj.row(t), d.row(t), dd.row(t)] {
                row[at..at + part.len()].copy_from_slice(part);
                at += part.len();
            }
        }
        if let Some((traj, d, dd)) = &nssc_deltas {
            for part in [traj.row(t), d.row(t), dd.row(t)] {
                row[at..at + part.len()].copy_from_slice(part);
                at += part.len();
            }
        }
        debug_assert_eq!(at, dim);
    }
    Ok(out)
}

/// Concatenate each frame with its `j` neighbours on both sides, replicating
/// edge frames.
pub fn add_context(vectors: &Matrix, j: usize) -> Matrix {
    if j == 0 {
        return vectors.clone();
    }
    let k = vectors.rows;
    let dim = vectors.cols;
    let mut out = Matrix::zeros(k, (2 * j + 1) * dim);
    for t in 0..k as isize {
        let row = out.row_mut(t as usize);
        for (slot, off) in (-(j as isize)..=j as isize).enumerate() {
            let src = (t + off).clamp(0, k as isize - 1) as usize;
            row[slot * dim..(slot + 1) * dim].copy_from_slice(vectors.row(src));
        }
    }
    out
}

/// Everything extracted from one utterance: context-stacked conditioning
/// vectors, current-frame vectors, and the unemphasized spectrogram the mask
/// will be applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureExtraction {
    pub context: Matrix,
    pub current: Matrix,
    pub spectrogram: ComplexSpectrogram,
}

/// Full per-utterance extraction. MFCC/NSSC segments come from the
/// pre-emphasized spectrum; the STFT magnitude segment and the returned
/// spectrogram come from the unemphasized signal, since the mask is applied
/// to the raw noisy magnitude.
pub fn extract_features(
    x: &AudioBuffer,
    cfg: &FeatureConfig,
    stft_cfg: &StftConfig,
) -> Result<FeatureExtraction, FeatureError> {
    extract_impl(x, cfg, stft_cfg, cfg!(feature = "parallel"))
}

/// Sequential reference path for [`extract_features`]; outputs are
/// bit-identical.
pub fn extract_features_sequential(
    x: &AudioBuffer,
    cfg: &FeatureConfig,
    stft_cfg: &StftConfig,
) -> Result<FeatureExtraction, FeatureError> {
    extract_impl(x, cfg, stft_cfg, false)
}

fn extract_impl(
    x: &AudioBuffer,
    cfg: &FeatureConfig,
    stft_cfg: &StftConfig,
    parallel: bool,
) -> Result<FeatureExtraction, FeatureError> {
    cfg.validate()?;
    let spec_plain = if parallel {
        dsp::stft(x, stft_cfg)?
    } else {
        dsp::stft_sequential(x, stft_cfg)?
    };

    let needs_mel = cfg.feature_set.has_mfcc() || cfg.feature_set.has_nssc();
    let spec_emph = if needs_mel {
        let emphasized = dsp::preemphasis(x, cfg.preemphasis);
        Some(if parallel {
            dsp::stft(&emphasized, stft_cfg)?
        } else {
            dsp::stft_sequential(&emphasized, stft_cfg)?
        })
    } else {
        None
    };
    let fb = needs_mel
        .then(|| build_mel_filterbank(cfg.bands, cfg.f_min, cfg.f_max, stft_cfg))
        .transpose()?;

    let per_frame = |k: usize| -> FeatureFrame {
        let mut frame = FeatureFrame::default();
        if cfg.feature_set.has_stft() {
            frame.stft_mag = spec_plain.frame(k).iter().map(|c| c.norm()).collect();
        }
        if let (Some(spec), Some(fb)) = (&spec_emph, &fb) {
            let emph_frame = spec.frame(k);
            if cfg.feature_set.has_mfcc() {
                frame.sse = compute_sse(emph_frame, fb);
                frame.mfcc = compute_mfcc(&frame.sse, cfg.mfcc_count);
            }
            if cfg.feature_set.has_nssc() {
                frame.ssc = compute_ssc(emph_frame, fb);
                frame.nssc = compute_nssc(&frame.ssc, fb, cfg.nssc_keep);
            }
        }
        frame
    };

    let frames: Vec<FeatureFrame> = if parallel {
        #[cfg(feature = "parallel")]
        {
            (0..spec_plain.frames).into_par_iter().map(per_frame).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..spec_plain.frames).map(per_frame).collect()
        }
    } else {
        (0..spec_plain.frames).map(per_frame).collect()
    };

    let current = assemble_feature_vectors(&frames, cfg, stft_cfg.bins())?;
    let context = add_context(&current, cfg.context);
    Ok(FeatureExtraction { context, current, spectrogram: spec_plain })
}
