//! Binary caches for extracted features, spectrograms and mask targets.
//!
//! Feature cache (`AFPC` magic): format version (u32 LE), feature-set id
//! (u8), frame count (u32 LE), dimension (u32 LE), then frame-major 32-bit
//! little-endian IEEE-754 floats. The companion spectrogram cache uses the
//! `SPEC` magic with the same header scheme and interleaved real/imaginary
//! 32-bit floats. Mask-target caches reuse the feature container with the
//! reserved id 255.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::dsp::{ComplexSpectrogram, StftConfig};
use crate::mat::Matrix;

pub const FEATURE_MAGIC: &[u8; 4] = b"AFPC";
pub const SPEC_MAGIC: &[u8; 4] = b"SPEC";
pub const CACHE_VERSION: u32 = 1;
/// Feature-set id used for ideal-ratio-mask target caches.
pub const IRM_KIND_ID: u8 = 255;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic in {path}: expected {expected}")]
    BadMagic { path: String, expected: String },
    #[error("cache version mismatch in {path}: file has {found}, supported {supported}")]
    VersionMismatch { path: String, found: u32, supported: u32 },
    #[error("truncated cache file {path}")]
    Truncated { path: String },
}

fn io_err(path: &Path, source: std::io::Error) -> CacheError {
    CacheError::Io { path: path.display().to_string(), source }
}

fn header(magic: &[u8; 4], kind_id: u8, frames: u32, dim: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(17);
    out.extend_from_slice(magic);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.push(kind_id);
    out.extend_from_slice(&frames.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    out
}

struct Header {
    kind_id: u8,
    frames: usize,
    dim: usize,
    body: Vec<f32>,
}

fn parse(path: &Path, magic: &[u8; 4], values_per_cell: usize) -> Result<Header, CacheError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 17 {
        return Err(CacheError::Truncated { path: path.display().to_string() });
    }
    if &bytes[0..4] != magic {
        return Err(CacheError::BadMagic {
            path: path.display().to_string(),
            expected: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(CacheError::VersionMismatch {
            path: path.display().to_string(),
            found: version,
            supported: CACHE_VERSION,
        });
    }
    let kind_id = bytes[8];
    let frames = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[13..17].try_into().unwrap()) as usize;
    let expected = frames * dim * values_per_cell * 4;
    if bytes.len() != 17 + expected {
        return Err(CacheError::Truncated { path: path.display().to_string() });
    }
    let body = bytes[17..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Header { kind_id, frames, dim, body })
}

/// Write a frame-major real-valued cache (features or mask targets).
pub fn write_feature_cache(
    path: impl AsRef<Path>,
    kind_id: u8,
    matrix: &Matrix,
) -> Result<(), CacheError> {
    let path = path.as_ref();
    let mut out = header(FEATURE_MAGIC, kind_id, matrix.rows as u32, matrix.cols as u32);
    out.reserve(matrix.data.len() * 4);
    for &v in &matrix.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read a feature cache back as (`kind_id`, frame-major matrix).
pub fn read_feature_cache(path: impl AsRef<Path>) -> Result<(u8, Matrix), CacheError> {
    let path = path.as_ref();
    let h = parse(path, FEATURE_MAGIC, 1)?;
    let data = h.body.iter().map(|&v| v as f64).collect();
    Ok((h.kind_id, Matrix { rows: h.frames, cols: h.dim, data }))
}

/// Write a complex spectrogram with interleaved real/imaginary parts.
pub fn write_spec_cache(
    path: impl AsRef<Path>,
    kind_id: u8,
    spec: &ComplexSpectrogram,
) -> Result<(), CacheError> {
    let path = path.as_ref();
    let mut out = header(SPEC_MAGIC, kind_id, spec.frames as u32, spec.bins as u32);
    out.reserve(spec.data.len() * 8);
    for c in &spec.data {
        out.extend_from_slice(&(c.re as f32).to_le_bytes());
        out.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read a spectrogram cache. The STFT config is not stored in the file, so
/// the caller supplies it.
pub fn read_spec_cache(
    path: impl AsRef<Path>,
    config: StftConfig,
) -> Result<(u8, ComplexSpectrogram), CacheError> {
    let path = path.as_ref();
    let h = parse(path, SPEC_MAGIC, 2)?;
    let mut spec = ComplexSpectrogram::zeros(h.frames, config);
    spec.bins = h.dim;
    spec.data = h
        .body
        .chunks_exact(2)
        .map(|p| rustfft::num_complex::Complex64::new(p[0] as f64, p[1] as f64))
        .collect();
    Ok((h.kind_id, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::stft;
    use crate::signal::synth_speech_like;

    #[test]
    fn feature_cache_round_trips_f32_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.afpc");
        let m = Matrix::from_rows(vec![vec![0.25, -1.5, 3.0], vec![0.0, 0.5, 2.0f64.sqrt()]]);
        write_feature_cache(&path, 5, &m).unwrap();
        let (id, back) = read_feature_cache(&path).unwrap();
        assert_eq!(id, 5);
        assert_eq!(back.rows, 2);
        assert_eq!(back.cols, 3);
        for (a, b) in m.data.iter().zip(&back.data) {
            assert_eq!(*a as f32, *b as f32); // exact at f32 precision
        }
        // byte-level header check
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"AFPC");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), CACHE_VERSION);
        assert_eq!(bytes[8], 5);
        assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 3);
    }

    #[test]
    fn spec_cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.spec");
        let cfg = StftConfig::default_16k();
        let spec = stft(&synth_speech_like(0.3, 16_000, 77), &cfg).unwrap();
        write_spec_cache(&path, 0, &spec).unwrap();
        let (_, back) = read_spec_cache(&path, cfg).unwrap();
        assert_eq!(back.frames, spec.frames);
        assert_eq!(back.bins, spec.bins);
        for (a, b) in spec.data.iter().zip(&back.data) {
            assert_eq!(a.re as f32, b.re as f32);
            assert_eq!(a.im as f32, b.im as f32);
        }
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"SPEC");
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_feature_cache(&path), Err(CacheError::Truncated { .. })));

        let m = Matrix::zeros(1, 4);
        write_feature_cache(&path, 0, &m).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_feature_cache(&path), Err(CacheError::BadMagic { .. })));

        write_feature_cache(&path, 0, &m).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_feature_cache(&path),
            Err(CacheError::VersionMismatch { found: 99, .. })
        ));

        write_feature_cache(&path, 0, &m).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(read_feature_cache(&path), Err(CacheError::Truncated { .. })));
    }
}
