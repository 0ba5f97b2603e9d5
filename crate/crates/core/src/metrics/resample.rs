//! Windowed-sinc resampler.
//!
//! 64-tap kernel: a sinc low-pass cut at the smaller Nyquist frequency,
//! shaped by a Blackman window and renormalized per output sample for unit
//! DC gain. Purely arithmetic, so results are reproducible bit-for-bit.

const HALF_TAPS: isize = 32;

/// Resample `input` from `from_rate` to `to_rate`. Output length is
/// `floor(len * to_rate / from_rate)`.
pub fn resample(input: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    assert!(from_rate > 0 && to_rate > 0);
    if from_rate == to_rate {
        return input.to_vec();
    }
    let ratio = from_rate as f64 / to_rate as f64;
    let cutoff = 0.5 * (to_rate as f64 / from_rate as f64).min(1.0);
    let out_len = (input.len() as u64 * to_rate as u64 / from_rate as u64) as usize;

    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let t = n as f64 * ratio;
        let center = t.floor() as isize;
        let mut acc = 0.0;
        let mut norm = 0.0;
        for i in center - HALF_TAPS + 1..=center + HALF_TAPS {
            let x = t - i as f64;
            let h = 2.0 * cutoff * sinc(2.0 * cutoff * x) * blackman(x);
            norm += h;
            if i >= 0 && (i as usize) < input.len() {
                acc += h * input[i as usize];
            }
        }
        out.push(acc / norm);
    }
    out
}

#[inline]
fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-12 {
        1.0
    } else {
        let pu = std::f64::consts::PI * u;
        pu.sin() / pu
    }
}

#[inline]
fn blackman(x: f64) -> f64 {
    let half = HALF_TAPS as f64;
    if x.abs() >= half {
        return 0.0;
    }
    let arg = std::f64::consts::PI * x / half;
    0.42 + 0.5 * arg.cos() + 0.08 * (2.0 * arg).cos()
}
