//! Waveform I/O, synthetic corpus generation, and SNR mixing.

mod manifest;
mod synth;
mod wav;

pub use manifest::{DatasetManifest, ManifestEntry, MixedEntry, MixedManifest, NoiseSource, Split};
pub use synth::{synth_babble_like, synth_noise, synth_pink_like, synth_speech_like, synth_white, NoiseKind};
pub use wav::{read_wav, write_wav};

use thiserror::Error;

/// Mono sampled waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: u32, right: u32 },
    #[error("zero-energy input: {0}")]
    ZeroEnergyInput(&'static str),
    #[error("noise shorter than clean signal ({noise} < {clean} samples)")]
    NoiseTooShort { noise: usize, clean: usize },
    #[error("manifest parse error at line {line}: {reason}")]
    ManifestParse { line: usize, reason: String },
}

/// Scale `noise` so that mixing it with `clean` yields the requested SNR,
/// then return the mixture and the scaled noise.
///
/// The gain is `g = sqrt((sum(s^2)/sum(n^2)) * 10^(-snr_db/10))`, i.e. SNR is
/// defined over full-utterance energy. Noise longer than the clean signal is
/// truncated to the leading segment; shorter noise is an error. Both outputs
/// are returned so mask targets can later be computed from the known clean
/// and noise parts of the mixture.
pub fn mix_at_snr(
    clean: &AudioBuffer,
    noise: &AudioBuffer,
    snr_db: f64,
) -> Result<(AudioBuffer, AudioBuffer), SignalError> {
    if clean.sample_rate != noise.sample_rate {
        return Err(SignalError::SampleRateMismatch {
            left: clean.sample_rate,
            right: noise.sample_rate,
        });
    }
    if noise.len() < clean.len() {
        return Err(SignalError::NoiseTooShort { noise: noise.len(), clean: clean.len() });
    }
    let noise_lead = &noise.samples[..clean.len()];

    let clean_energy = clean.energy();
    if clean_energy <= 0.0 {
        return Err(SignalError::ZeroEnergyInput("clean"));
    }
    let noise_energy: f64 = noise_lead.iter().map(|s| s * s).sum();
    if noise_energy <= 0.0 {
        return Err(SignalError::ZeroEnergyInput("noise"));
    }

    let gain = (clean_energy / noise_energy * 10f64.powf(-snr_db / 10.0)).sqrt();
    let scaled: Vec<f64> = noise_lead.iter().map(|s| gain * s).collect();
    let noisy: Vec<f64> =
        clean.samples.iter().zip(&scaled).map(|(s, n)| s + n).collect();

    Ok((
        AudioBuffer::new(noisy, clean.sample_rate),
        AudioBuffer::new(scaled, clean.sample_rate),
    ))
}

/// SNR in dB between a clean signal and a noise signal of equal length.
pub fn measured_snr_db(clean: &AudioBuffer, noise: &AudioBuffer) -> f64 {
    10.0 * (clean.energy() / noise.energy()).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_buffer(seed: u64, len: usize) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioBuffer::new((0..len).map(|_| rng.random_range(-0.5..0.5)).collect(), 16_000)
    }

    #[test]
    fn equal_energy_at_0db_gives_unit_gain() {
        let clean = AudioBuffer::new(vec![0.5, -0.5, 0.5, -0.5], 16_000);
        let noise = AudioBuffer::new(vec![-0.5, 0.5, -0.5, 0.5], 16_000);
        let (noisy, scaled) = mix_at_snr(&clean, &noise, 0.0).unwrap();
        assert_eq!(scaled.samples, noise.samples);
        assert_eq!(noisy.samples, vec![0.0; 4]);
    }

    #[test]
    fn snr_60_db_leaves_one_millionth_noise_energy() {
        let clean = random_buffer(1, 4000);
        let noise = random_buffer(2, 4000);
        let (_, scaled) = mix_at_snr(&clean, &noise, 60.0).unwrap();
        let ratio = scaled.energy() / clean.energy();
        assert!((ratio - 1e-6).abs() < 1e-12, "ratio {ratio}");
    }

    #[test]
    fn achieved_snr_matches_request_to_nano_db() {
        let clean = random_buffer(3, 16_000);
        let noise = random_buffer(4, 16_000);
        for &snr in &[-5.0, 0.0, 5.0, 12.5] {
            let (_, scaled) = mix_at_snr(&clean, &noise, snr).unwrap();
            let measured = measured_snr_db(&clean, &scaled);
            assert!((measured - snr).abs() < 1e-9, "requested {snr}, measured {measured}");
        }
    }

    #[test]
    fn gain_absorbs_power_of_two_noise_scaling_bit_exactly() {
        let clean = random_buffer(5, 8000);
        let noise = random_buffer(6, 8000);
        let doubled =
            AudioBuffer::new(noise.samples.iter().map(|s| 2.0 * s).collect(), 16_000);
        let (noisy_a, _) = mix_at_snr(&clean, &noise, 5.0).unwrap();
        let (noisy_b, _) = mix_at_snr(&clean, &doubled, 5.0).unwrap();
        assert_eq!(noisy_a.samples, noisy_b.samples);
    }

    #[test]
    fn longer_noise_is_truncated_shorter_is_an_error() {
        let clean = random_buffer(7, 1000);
        let long_noise = random_buffer(8, 1500);
        let (noisy, scaled) = mix_at_snr(&clean, &long_noise, 0.0).unwrap();
        assert_eq!(noisy.len(), 1000);
        assert_eq!(scaled.len(), 1000);

        let short_noise = random_buffer(8, 999);
        assert!(matches!(
            mix_at_snr(&clean, &short_noise, 0.0),
            Err(SignalError::NoiseTooShort { .. })
        ));
    }

    #[test]
    fn rate_mismatch_and_zero_energy_are_rejected() {
        let clean = random_buffer(9, 100);
        let mut noise = random_buffer(10, 100);
        noise.sample_rate = 8000;
        assert!(matches!(
            mix_at_snr(&clean, &noise, 0.0),
            Err(SignalError::SampleRateMismatch { .. })
        ));

        let silent = AudioBuffer::new(vec![0.0; 100], 16_000);
        let noise = random_buffer(10, 100);
        assert!(matches!(
            mix_at_snr(&silent, &noise, 0.0),
            Err(SignalError::ZeroEnergyInput("clean"))
        ));
        assert!(matches!(
            mix_at_snr(&clean, &silent, 0.0),
            Err(SignalError::ZeroEnergyInput("noise"))
        ));
    }

    proptest! {
        #[test]
        fn mixing_is_near_invariant_to_arbitrary_noise_prescaling(
            seed in 0u64..1000, scale in 0.1f64..10.0
        ) {
            let clean = random_buffer(seed, 512);
            let noise = random_buffer(seed.wrapping_add(1), 512);
            let rescaled =
                AudioBuffer::new(noise.samples.iter().map(|s| scale * s).collect(), 16_000);
            let (a, _) = mix_at_snr(&clean, &noise, 3.0).unwrap();
            let (b, _) = mix_at_snr(&clean, &rescaled, 3.0).unwrap();
            for (x, y) in a.samples.iter().zip(&b.samples) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
