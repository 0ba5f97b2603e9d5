//! Minimal RIFF/WAVE reader and writer for 16-bit PCM mono files.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{AudioBuffer, SignalError};

const PCM_SCALE: f64 = 32768.0;

fn io_err(path: &Path, source: std::io::Error) -> SignalError {
    SignalError::IoFailure { path: path.display().to_string(), source }
}

/// Read a 16-bit PCM mono WAV file. Samples are scaled to `[-1, 1)` by
/// dividing by 32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, SignalError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    parse_wav(&bytes)
}

fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer, SignalError> {
    let malformed = |what: &str| SignalError::MalformedHeader(what.to_string());

    if bytes.len() < 12 {
        return Err(malformed("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing WAVE form type"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            return Err(malformed("chunk size exceeds file length"));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed("fmt chunk too small"));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {} // skip unknown chunks (LIST, fact, ...)
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| malformed("missing fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("missing data chunk"))?;

    if format != 1 {
        return Err(SignalError::UnsupportedFormat(format!("format tag {format}, want PCM (1)")));
    }
    if channels != 1 {
        return Err(SignalError::UnsupportedFormat(format!("{channels} channels, want mono")));
    }
    if bits != 16 {
        return Err(SignalError::UnsupportedFormat(format!("{bits} bits per sample, want 16")));
    }
    if rate == 0 {
        return Err(malformed("zero sample rate"));
    }
    if data.len() % 2 != 0 {
        return Err(malformed("odd data chunk length for 16-bit samples"));
    }

    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / PCM_SCALE)
        .collect();
    Ok(AudioBuffer::new(samples, rate))
}

/// Write a 16-bit PCM mono WAV file. Samples are clamped to
/// `[-1, 1 - 1/32768]` before quantization.
pub fn write_wav(buf: &AudioBuffer, path: impl AsRef<Path>) -> Result<(), SignalError> {
    let path = path.as_ref();
    let data_len = (buf.len() * 2) as u32;
    let byte_rate = buf.sample_rate * 2;

    let mut out = Vec::with_capacity(44 + buf.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&buf.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buf.samples {
        let q = (s.clamp(-1.0, (PCM_SCALE - 1.0) / PCM_SCALE) * PCM_SCALE).round() as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }

    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&out).map_err(|e| io_err(path, e))?;
    Ok(())
}
