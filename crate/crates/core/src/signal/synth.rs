//! Seeded synthetic signal generators, so the whole pipeline runs with zero
//! external data.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::AudioBuffer;

/// Built-in noise generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    White,
    PinkLike,
    BabbleLike,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::PinkLike => "pink_like",
            NoiseKind::BabbleLike => "babble_like",
        }
    }
}

impl FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "white" => Ok(NoiseKind::White),
            "pink_like" | "pink" => Ok(NoiseKind::PinkLike),
            "babble_like" | "babble" => Ok(NoiseKind::BabbleLike),
            other => Err(format!("unknown noise kind `{other}`")),
        }
    }
}

/// Synthesize `n_samples` of the given noise kind, deterministically.
pub fn synth_noise(kind: NoiseKind, n_samples: usize, sample_rate: u32, seed: u64) -> AudioBuffer {
    match kind {
        NoiseKind::White => synth_white(n_samples, sample_rate, seed),
        NoiseKind::PinkLike => synth_pink_like(n_samples, sample_rate, seed),
        NoiseKind::BabbleLike => synth_babble_like(n_samples, sample_rate, seed),
    }
}

/// Gaussian white noise with RMS about 0.1.
pub fn synth_white(n_samples: usize, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_samples)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            0.1 * v
        })
        .collect();
    AudioBuffer::new(samples, sample_rate)
}

/// Approximately 1/f noise: white noise through three leaky integrators
/// (Kellet economy filter).
pub fn synth_pink_like(n_samples: usize, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    let samples = (0..n_samples)
        .map(|_| {
            let white: f64 = StandardNormal.sample(&mut rng);
            b0 = 0.99765 * b0 + white * 0.0990460;
            b1 = 0.96300 * b1 + white * 0.2965164;
            b2 = 0.57000 * b2 + white * 1.0526913;
            0.03 * (b0 + b1 + b2 + white * 0.1848)
        })
        .collect();
    AudioBuffer::new(samples, sample_rate)
}

/// Crowd-chatter stand-in. A large crowd sums to speech-shaped noise with
/// shallow syllabic-rate modulation and no resolvable harmonic lines, so
/// that is what gets synthesized: 1/f-shaped noise, low-passed near 2.5 kHz,
/// with two slow amplitude modulations at randomized rates.
pub fn synth_babble_like(n_samples: usize, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let am1_rate: f64 = rng.random_range(2.0..4.0);
    let am2_rate: f64 = rng.random_range(5.0..8.0);
    let am1_phase: f64 = rng.random_range(0.0..TAU);
    let am2_phase: f64 = rng.random_range(0.0..TAU);

    let dt = 1.0 / sample_rate as f64;
    let lp_alpha = 1.0 - (-TAU * 2500.0 * dt).exp();
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    let mut lp = 0.0;
    let samples = (0..n_samples)
        .map(|i| {
            let white: f64 = StandardNormal.sample(&mut rng);
            b0 = 0.99765 * b0 + white * 0.0990460;
            b1 = 0.96300 * b1 + white * 0.2965164;
            b2 = 0.57000 * b2 + white * 1.0526913;
            let shaped = b0 + b1 + b2 + white * 0.1848;
            lp += lp_alpha * (shaped - lp);

            let t = i as f64 * dt;
            let am = (0.75 + 0.25 * (TAU * am1_rate * t + am1_phase).sin())
                * (0.85 + 0.15 * (TAU * am2_rate * t + am2_phase).sin());
            0.04 * am * lp
        })
        .collect();
    AudioBuffer::new(samples, sample_rate)
}

/// Speech-like test signal: voiced bursts of 3-5 harmonics on a drifting
/// fundamental (100-300 Hz), amplitude-modulated at 2-8 Hz, separated by
/// short silences. The harmonic peaks give subband-centroid features
/// something to lock onto at desk scale.
pub fn synth_speech_like(duration_secs: f64, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (duration_secs * sample_rate as f64).round() as usize;
    let dt = 1.0 / sample_rate as f64;
    let mut samples = vec![0.0f64; n];

    let mut pos = 0usize;
    while pos < n {
        // voiced burst
        let burst_len = (rng.random_range(0.25..0.7) * sample_rate as f64) as usize;
        let burst_end = (pos + burst_len).min(n);

        let n_harm: usize = rng.random_range(3..=5);
        let mut f0: f64 = rng.random_range(100.0..300.0);
        let drift: f64 = rng.random_range(-40.0..40.0); // Hz per second
        let am_rate: f64 = rng.random_range(2.0..8.0);
        let am_phase: f64 = rng.random_range(0.0..TAU);
        let mut phases: Vec<f64> = (0..n_harm).map(|_| rng.random_range(0.0..TAU)).collect();
        let amps: Vec<f64> = (0..n_harm).map(|k| 0.5 / (k + 1) as f64).collect();

        for (i, s) in samples[pos..burst_end].iter_mut().enumerate() {
            let t = i as f64 * dt;
            f0 = (f0 + drift * dt).clamp(100.0, 300.0);
            let am = 0.55 + 0.45 * (TAU * am_rate * t + am_phase).sin();
            let mut v = 0.0;
            for (k, phase) in phases.iter_mut().enumerate() {
                *phase += TAU * f0 * (k + 1) as f64 * dt;
                v += amps[k] * phase.sin();
            }
            // gentle attack/decay to avoid clicks at burst edges
            let fade = ((i as f64) / 160.0).min(1.0)
                * (((burst_end - pos - i) as f64) / 160.0).min(1.0);
            *s = 0.45 * am * v * fade;
        }
        pos = burst_end;

        // silence gap
        let gap = (rng.random_range(0.06..0.18) * sample_rate as f64) as usize;
        pos = (pos + gap).min(n);
    }

    AudioBuffer::new(samples, sample_rate)
}
