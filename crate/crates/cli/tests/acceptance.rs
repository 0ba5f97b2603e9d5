//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! through the harness. Run with `cargo test -p afpc-cli --test acceptance`.
//!
//! The expected values asserted here were computed from independent oracles
//! (closed-form parameter arithmetic, brute-force formula evaluation,
//! finite differences) before being frozen into the tests.

// the brute-force oracles intentionally spell out their index loops
#![allow(clippy::needless_range_loop)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::LazyLock;

use afpc_core::dsp::{stft, StftConfig};
use afpc_core::features::{
    build_mel_filterbank, compute_delta, compute_mfcc, compute_nssc, compute_sse, compute_ssc,
    extract_features, FeatureConfig, FeatureSet,
};
use afpc_core::mask::{apply_mask_and_reconstruct, compute_irm};
use afpc_core::mat::Matrix;
use afpc_core::metrics::{sdr, stoi, SDR_SENTINEL_DB};
use afpc_core::neural::{
    disc_loss_and_grads, gen_loss_and_grads, infer_mask, train, Activation, DenseNetwork,
    Gradients, TrainConfig, TrainingData, ZPolicy,
};
use afpc_core::signal::{
    measured_snr_db, mix_at_snr, synth_babble_like, synth_speech_like, synth_white, write_wav,
    AudioBuffer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn afpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afpc")).args(args).output().expect("spawn afpc")
}

fn info_field(feature_set: &str, field: &str) -> i64 {
    let out = afpc(&["info", "--feature-set", feature_set, "--context", "1"]);
    assert!(out.status.success(), "info failed for {feature_set}");
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for line in text.lines() {
        if let Some(value) = line.strip_prefix(&format!("{field} = ")) {
            return value.trim().parse().expect("numeric field");
        }
    }
    panic!("field {field} missing from info output:\n{text}");
}

/// Criterion 1: per-frame feature dimensions reported by `info`.
#[test]
fn c01_feature_sizes_match_the_documented_table() {
    let expectations = [
        ("stft", 257),
        ("stft+nssc", 323),
        ("stft+mfcc", 323),
        ("mfcc+nssc", 132),
    ];
    for (set, dim) in expectations {
        let got = info_field(set, "frame_dim");
        assert_eq!(got, dim, "feature set {set}");
    }
    println!("c01: frame dims 257/323/323/132 confirmed");
}

/// Criterion 2: generator parameter counts. The oracle is the closed form
/// sum(fan_in*fan_out + fan_out); each count must also round to the
/// headline 1.06M / 1.16M / 1.16M / 870K figures at 10k granularity.
#[test]
fn c02_generator_parameter_counts() {
    fn closed_form(dims: &[usize]) -> i64 {
        dims.windows(2).map(|w| (w[0] * w[1] + w[1]) as i64).sum()
    }
    // contexts of 3 frames plus a 15-element latent vector
    let rows: [(&str, usize, i64); 4] = [
        ("stft", 257 * 3 + 15, 1_060_000),
        ("stft+nssc", 323 * 3 + 15, 1_160_000),
        ("stft+mfcc", 323 * 3 + 15, 1_160_000),
        ("mfcc+nssc", 132 * 3 + 15, 870_000),
    ];
    for (set, input_dim, headline) in rows {
        let dims = vec![input_dim, 512, 512, 512, 257];
        let oracle = closed_form(&dims);
        let reported = info_field(set, "generator_params");
        assert_eq!(reported, oracle, "{set}: info disagrees with the closed form");

        // the same count must fall out of an actually constructed network
        let acts =
            [Activation::Relu, Activation::Relu, Activation::Relu, Activation::Sigmoid];
        let net = DenseNetwork::init(&dims, &acts, &[0.2, 0.2, 0.2, 0.0], 0).unwrap();
        assert_eq!(net.parameter_count() as i64, oracle, "{set}: init count");

        let rounded = (oracle as f64 / 10_000.0).round() as i64 * 10_000;
        assert_eq!(rounded, headline, "{set}: rounding to the headline figure");
    }
    let frozen: Vec<i64> = ["stft", "stft+nssc", "stft+mfcc", "mfcc+nssc"]
        .iter()
        .map(|s| info_field(s, "generator_params"))
        .collect();
    assert_eq!(frozen, vec![1_060_097, 1_161_473, 1_161_473, 868_097]);
    println!("c02: generator params 1060097/1161473/1161473/868097 confirmed");
}

/// Criterion 3: analysis/synthesis round trip on a random one-second signal.
#[test]
fn c03_stft_round_trip_interior_error() {
    let cfg = StftConfig::default_16k();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let x = AudioBuffer::new(
        (0..16_000).map(|_| rng.random_range(-0.8..0.8)).collect(),
        16_000,
    );
    let spec = stft(&x, &cfg).unwrap();
    let back = afpc_core::dsp::istft(&spec);
    let lo = cfg.frame_size;
    let hi = (spec.frames - 1) * cfg.hop;
    let mut err = 0.0;
    let mut norm = 0.0;
    for i in lo..hi {
        err += (back.samples[i] - x.samples[i]).powi(2);
        norm += x.samples[i].powi(2);
    }
    let rel = (err / norm).sqrt();
    assert!(rel < 1e-6, "interior relative L2 error {rel}");
    println!("c03: round-trip interior error {rel:.3e}");
}

/// Criterion 4: subband energies, MFCC, centroids, normalized centroids and
/// regression deltas against brute-force evaluation at B=8.
#[test]
fn c04_feature_math_matches_brute_force_oracles() {
    let cfg = StftConfig::default_16k();
    let fb = build_mel_filterbank(8, 0.0, 8000.0, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let frame: Vec<Complex64> = (0..257)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let rel_ok = |got: f64, want: f64| (got - want).abs() <= 1e-12 * want.abs().max(1e-12);

    // subband energies: direct double loop over bands and bins
    let sse = compute_sse(&frame, &fb);
    for (b, band) in fb.bands.iter().enumerate() {
        let mut acc = 0.0;
        for f in 0..257 {
            acc += band.weight_at(f) * (frame[f].re.powi(2) + frame[f].im.powi(2));
        }
        acc = acc.max(1e-10);
        assert!(rel_ok(sse[b], acc), "sse band {b}: {} vs {acc}", sse[b]);
    }

    // cepstral coefficients: term-by-term cosine transform of the logs
    let mfcc = compute_mfcc(&sse, 8);
    for p in 0..8 {
        let mut acc = 0.0;
        for (b, &e) in sse.iter().enumerate() {
            acc += e.log10() * (p as f64 * std::f64::consts::PI / 8.0 * (b as f64 - 0.5)).cos();
        }
        acc *= (2.0f64 / 8.0).sqrt();
        assert!(rel_ok(mfcc[p], acc), "mfcc {p}: {} vs {acc}", mfcc[p]);
    }

    // centroids: weighted mean bin with the midpoint fallback
    let ssc = compute_ssc(&frame, &fb);
    for (b, band) in fb.bands.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for f in 0..257usize {
            let w = band.weight_at(f) * (frame[f].re.powi(2) + frame[f].im.powi(2));
            num += f as f64 * w;
            den += w;
        }
        let want = if den < 1e-20 {
            (band.low + band.high) as f64 / 2.0
        } else {
            num / den
        };
        assert!(rel_ok(ssc[b], want), "ssc band {b}: {} vs {want}", ssc[b]);
    }

    // normalized centroids: the printed affine rescaling per band
    let nssc = compute_nssc(&ssc, &fb, 8);
    for (b, band) in fb.bands.iter().enumerate() {
        let width = (band.high - band.low) as f64;
        let want = (ssc[b] - width) / width;
        assert!(rel_ok(nssc[b], want), "nssc band {b}: {} vs {want}", nssc[b]);
    }

    // regression deltas with replicated edges, window 2
    let k = 10;
    let traj = Matrix {
        rows: k,
        cols: 3,
        data: (0..k * 3).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let delta = compute_delta(&traj, 2);
    let norm = 2.0 * (1.0 + 4.0);
    for t in 0..k {
        for c in 0..3 {
            let at = |idx: isize| traj.row(idx.clamp(0, k as isize - 1) as usize)[c];
            let want = (1.0 * (at(t as isize + 1) - at(t as isize - 1))
                + 2.0 * (at(t as isize + 2) - at(t as isize - 2)))
                / norm;
            assert!(rel_ok(delta.row(t)[c], want), "delta[{t}][{c}]");
        }
    }
    println!("c04: SSE/MFCC/SSC/NSSC/delta oracles all within 1e-12");
}

/// Criterion 5: analytic gradients against central finite differences for
/// both objectives at lambda 0 and 100, dropout off.
#[test]
fn c05_gradient_check_against_finite_differences() {
    const H: f64 = 1e-6;

    fn get(net: &DenseNetwork, mut i: usize) -> (usize, bool, usize) {
        for (l, layer) in net.layers.iter().enumerate() {
            if i < layer.weights.data.len() {
                return (l, true, i);
            }
            i -= layer.weights.data.len();
            if i < layer.biases.len() {
                return (l, false, i);
            }
            i -= layer.biases.len();
        }
        panic!("index out of range");
    }
    fn read(net: &DenseNetwork, i: usize) -> f64 {
        let (l, w, k) = get(net, i);
        if w {
            net.layers[l].weights.data[k]
        } else {
            net.layers[l].biases[k]
        }
    }
    fn write(net: &mut DenseNetwork, i: usize, v: f64) {
        let (l, w, k) = get(net, i);
        if w {
            net.layers[l].weights.data[k] = v;
        } else {
            net.layers[l].biases[k] = v;
        }
    }
    fn grad(grads: &Gradients, mut i: usize) -> f64 {
        for (w, b) in grads.weights.iter().zip(&grads.biases) {
            if i < w.data.len() {
                return w.data[i];
            }
            i -= w.data.len();
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("index out of range");
    }

    let g_acts = [Activation::Relu, Activation::Relu, Activation::Relu, Activation::Sigmoid];
    let d_acts = [
        Activation::LeakyRelu,
        Activation::LeakyRelu,
        Activation::LeakyRelu,
        Activation::Sigmoid,
    ];
    let no_drop = [0.0; 4];
    // reduced shapes: generator input 20, hidden width 8
    let gen = DenseNetwork::init(&[20, 8, 8, 8, 5], &g_acts, &no_drop, 505).unwrap();
    let disc = DenseNetwork::init(&[14, 8, 8, 8, 1], &d_acts, &no_drop, 506).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(507);
    let mut rand_matrix = |rows: usize, cols: usize, lo: f64, hi: f64| Matrix {
        rows,
        cols,
        data: (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect(),
    };
    let z = rand_matrix(4, 3, -1.0, 1.0);
    let ctx = rand_matrix(4, 17, -1.0, 1.0);
    let cond = rand_matrix(4, 9, -1.0, 1.0);
    let targets = rand_matrix(4, 5, 0.05, 0.95);
    let real_in = rand_matrix(4, 14, -1.0, 1.0);
    let fake_in = rand_matrix(4, 14, -1.0, 1.0);

    // discriminator objective
    let (_, analytic) = disc_loss_and_grads(&disc, &real_in, &fake_in).unwrap();
    let mut worst_d = 0.0f64;
    for i in 0..disc.parameter_count() {
        let base = read(&disc, i);
        let mut plus = disc.clone();
        write(&mut plus, i, base + H);
        let (lp, _) = disc_loss_and_grads(&plus, &real_in, &fake_in).unwrap();
        let mut minus = disc.clone();
        write(&mut minus, i, base - H);
        let (lm, _) = disc_loss_and_grads(&minus, &real_in, &fake_in).unwrap();
        let numeric = (lp - lm) / (2.0 * H);
        let a = grad(&analytic, i);
        worst_d = worst_d.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
    }
    assert!(worst_d < 1e-4, "discriminator objective: max relative error {worst_d}");

    // generator objective at both lambdas
    let mut worst_g = 0.0f64;
    for lambda in [0.0, 100.0] {
        let (_, analytic) =
            gen_loss_and_grads(&gen, &disc, &z, &ctx, &cond, &targets, lambda).unwrap();
        for i in 0..gen.parameter_count() {
            let base = read(&gen, i);
            let mut plus = gen.clone();
            write(&mut plus, i, base + H);
            let (lp, _) =
                gen_loss_and_grads(&plus, &disc, &z, &ctx, &cond, &targets, lambda).unwrap();
            let mut minus = gen.clone();
            write(&mut minus, i, base - H);
            let (lm, _) =
                gen_loss_and_grads(&minus, &disc, &z, &ctx, &cond, &targets, lambda).unwrap();
            let numeric = (lp - lm) / (2.0 * H);
            let a = grad(&analytic, i);
            worst_g = worst_g.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
        }
    }
    assert!(worst_g < 1e-4, "generator objective: max relative error {worst_g}");
    println!("c05: max relative gradient errors D {worst_d:.2e}, G {worst_g:.2e}");
}

/// Criterion 6: the oracle mask on a 0 dB white-noise mixture gains at
/// least 5 dB of SDR over the noisy input.
#[test]
fn c06_oracle_mask_gains_at_least_5_db() {
    let cfg = StftConfig::default_16k();
    let clean = synth_speech_like(2.0, 16_000, 606);
    let noise = synth_white(clean.len(), 16_000, 607);
    let (noisy, scaled) = mix_at_snr(&clean, &noise, 0.0).unwrap();

    let spec_y = stft(&noisy, &cfg).unwrap();
    let spec_s = stft(&clean, &cfg).unwrap();
    let spec_n = stft(&scaled, &cfg).unwrap();
    let irm = compute_irm(&spec_s, &spec_n).unwrap();
    let enhanced = apply_mask_and_reconstruct(&irm, &spec_y).unwrap();

    let mut trimmed = enhanced.samples;
    trimmed.resize(clean.len(), 0.0);
    let enhanced = AudioBuffer::new(trimmed, 16_000);

    let noisy_sdr = sdr(&clean, &noisy).unwrap();
    let enhanced_sdr = sdr(&clean, &enhanced).unwrap();
    let gain = enhanced_sdr - noisy_sdr;
    assert!(gain >= 5.0, "oracle mask gained {gain:.2} dB (noisy {noisy_sdr:.2}, enhanced {enhanced_sdr:.2})");
    println!("c06: oracle-mask SDR gain {gain:.2} dB");
}

/// Desk-scale pipeline shared by criteria 7 and 10: 20 training utterances
/// (about two minutes) mixed with white and babble-like noise at
/// -5/0/+5 dB, MFCC+NSSC features with one context frame, 10 epochs at
/// batch 128, then enhancement of a held-out 0 dB test set.
struct DeskScale {
    noisy_sdr: f64,
    enhanced_sdr: f64,
    noisy_stoi: f64,
    enhanced_stoi: f64,
    mask_min: f64,
    mask_max: f64,
}

type NoiseSynth = fn(usize, u32, u64) -> AudioBuffer;

static DESK: LazyLock<DeskScale> = LazyLock::new(run_desk_scale);

fn run_desk_scale() -> DeskScale {
    let stft_cfg = StftConfig::default_16k();
    let feat_cfg = FeatureConfig { feature_set: FeatureSet::MfccNssc, ..Default::default() };
    let noises: [(&str, NoiseSynth); 2] =
        [("white", synth_white), ("babble", synth_babble_like)];
    let snrs = [-5.0, 0.0, 5.0];

    // training pool: each utterance mixed once, cycling noise x SNR
    let mut ctx_parts = Vec::new();
    let mut cur_parts = Vec::new();
    let mut tgt_parts = Vec::new();
    for i in 0..20usize {
        let clean = synth_speech_like(6.0, 16_000, 7000 + i as u64);
        let (_, synth) = noises[i % 2];
        let noise = synth(clean.len(), 16_000, 7100 + i as u64);
        let snr = snrs[(i / 2) % 3];
        let (noisy, scaled) = mix_at_snr(&clean, &noise, snr).unwrap();

        let extraction = extract_features(&noisy, &feat_cfg, &stft_cfg).unwrap();
        let spec_s = stft(&clean, &stft_cfg).unwrap();
        let spec_n = stft(&scaled, &stft_cfg).unwrap();
        let irm = compute_irm(&spec_s, &spec_n).unwrap();
        ctx_parts.push(extraction.context);
        cur_parts.push(extraction.current);
        tgt_parts.push(Matrix { rows: irm.frames, cols: irm.bins, data: irm.data });
    }
    let vstack = |parts: Vec<Matrix>| {
        let cols = parts[0].cols;
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend(p.data);
        }
        Matrix { rows, cols, data }
    };
    let data = TrainingData {
        context: vstack(ctx_parts),
        current: vstack(cur_parts),
        targets: vstack(tgt_parts),
    };

    // a desk-scale run sees ~590 optimizer steps, not the ~130k of a full
    // corpus run, so the learning rate is scaled up one decade
    let train_cfg = TrainConfig {
        epochs: 10,
        batch_size: 128,
        lr_schedule: afpc_core::neural::half_split_schedule(10, 1e-3, 1e-4),
        seed: 42,
        ..TrainConfig::default()
    };
    let (model, history) =
        train(&data, FeatureSet::MfccNssc, 1, stft_cfg.bins(), &train_cfg).unwrap();
    eprintln!(
        "desk-scale: {} frames, final epoch d_loss {:.4} g_l1 {:.4}",
        data.targets.rows,
        history.last().unwrap().d_loss,
        history.last().unwrap().g_l1
    );

    // held-out 0 dB test set: three white, three babble
    let mut noisy_sdr = 0.0;
    let mut enhanced_sdr = 0.0;
    let mut noisy_stoi = 0.0;
    let mut enhanced_stoi = 0.0;
    let mut mask_min = f64::MAX;
    let mut mask_max = f64::MIN;
    let n_test = 6usize;
    for i in 0..n_test {
        let clean = synth_speech_like(6.0, 16_000, 9000 + i as u64);
        let (noise_name, synth) = noises[i % 2];
        let noise = synth(clean.len(), 16_000, 9100 + i as u64);
        let (noisy, _) = mix_at_snr(&clean, &noise, 0.0).unwrap();

        let extraction = extract_features(&noisy, &feat_cfg, &stft_cfg).unwrap();
        let mask = infer_mask(&model, &extraction.context, ZPolicy::Zeros).unwrap();
        for &v in &mask.data {
            mask_min = mask_min.min(v);
            mask_max = mask_max.max(v);
        }
        let enhanced = apply_mask_and_reconstruct(&mask, &extraction.spectrogram).unwrap();
        let mut samples = enhanced.samples;
        samples.resize(noisy.len(), 0.0);
        let enhanced = AudioBuffer::new(samples, 16_000);

        let n_sdr = sdr(&clean, &noisy).unwrap();
        let e_sdr = sdr(&clean, &enhanced).unwrap();
        let n_stoi = stoi(&clean, &noisy).unwrap();
        let e_stoi = stoi(&clean, &enhanced).unwrap();
        eprintln!(
            "desk-scale test {i} ({noise_name}): SDR {n_sdr:.2} -> {e_sdr:.2} dB, \
             STOI {n_stoi:.3} -> {e_stoi:.3}"
        );
        noisy_sdr += n_sdr / n_test as f64;
        enhanced_sdr += e_sdr / n_test as f64;
        noisy_stoi += n_stoi / n_test as f64;
        enhanced_stoi += e_stoi / n_test as f64;
    }
    DeskScale { noisy_sdr, enhanced_sdr, noisy_stoi, enhanced_stoi, mask_min, mask_max }
}

/// Criterion 7: the trained model improves mean SDR at 0 dB by at least
/// 1 dB and does not lose more than 0.01 mean STOI.
#[test]
fn c07_desk_scale_learning_gate() {
    let d = &*DESK;
    let gain = d.enhanced_sdr - d.noisy_sdr;
    println!(
        "c07: SDR {:.2} -> {:.2} dB (gain {gain:.2}), STOI {:.3} -> {:.3}",
        d.noisy_sdr, d.enhanced_sdr, d.noisy_stoi, d.enhanced_stoi
    );
    assert!(gain >= 1.0, "mean SDR gain {gain:.2} dB below the 1 dB gate");
    assert!(
        d.enhanced_stoi >= d.noisy_stoi - 0.01,
        "STOI dropped from {:.3} to {:.3}",
        d.noisy_stoi,
        d.enhanced_stoi
    );
}

/// Criterion 8: two full pipeline runs with the same seed produce
/// bit-identical caches, checkpoints and enhanced files.
#[test]
fn c08_full_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir_all(&corpus).unwrap();
    let mut manifest = String::new();
    for i in 0..6usize {
        let wav = synth_speech_like(1.5, 16_000, 800 + i as u64);
        let path = corpus.join(format!("utt{i}.wav"));
        write_wav(&wav, &path).unwrap();
        let noise = if i % 2 == 0 { "white" } else { "babble_like" };
        manifest.push_str(&format!("{}\t{noise}\t0\ttrain\n", path.display()));
    }
    let manifest_path = corpus.join("manifest.tsv");
    std::fs::write(&manifest_path, &manifest).unwrap();
    let cfg_path = dir.path().join("small.cfg");
    std::fs::write(&cfg_path, "[train]\nhidden_layers = 24,24\nz_dim = 4\n").unwrap();

    let run_pipeline = |tag: &str| -> PathBuf {
        let root = dir.path().join(tag);
        let mixed = root.join("mixed");
        let cache = root.join("cache");
        let ckpt = root.join("model.ganc");
        let enhanced = root.join("enhanced");
        for args in [
            vec![
                "mix".to_string(),
                format!("--manifest={}", manifest_path.display()),
                format!("--out={}", mixed.display()),
                "--seed=11".into(),
            ],
            vec![
                "extract".into(),
                format!("--manifest={}", mixed.join("mixed.tsv").display()),
                format!("--cache-dir={}", cache.display()),
                "--seed=11".into(),
            ],
            vec![
                "train".into(),
                format!("--manifest={}", mixed.join("mixed.tsv").display()),
                format!("--cache-dir={}", cache.display()),
                format!("--checkpoint={}", ckpt.display()),
                "--epochs=2".into(),
                format!("--config={}", cfg_path.display()),
                "--seed=11".into(),
            ],
            vec![
                "enhance".into(),
                format!("--checkpoint={}", ckpt.display()),
                format!("--input={}", mixed.display()),
                format!("--out={}", enhanced.display()),
                "--seed=11".into(),
            ],
        ] {
            let out = Command::new(env!("CARGO_BIN_EXE_afpc"))
                .args(&args)
                .output()
                .expect("spawn afpc");
            assert!(
                out.status.success(),
                "{tag} {args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        root
    };

    let a = run_pipeline("a");
    let b = run_pipeline("b");

    let compare_dir = |sub: &str| {
        let dir_a = a.join(sub);
        let mut names: Vec<String> = std::fs::read_dir(&dir_a)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        assert!(!names.is_empty(), "no files under {sub}");
        for name in names {
            let fa = std::fs::read(dir_a.join(&name)).unwrap();
            let fb = std::fs::read(b.join(sub).join(&name)).unwrap();
            assert_eq!(fa, fb, "{sub}/{name} differs between identical runs");
        }
    };
    compare_dir("cache");
    compare_dir("enhanced");
    let ckpt_a = std::fs::read(a.join("model.ganc")).unwrap();
    let ckpt_b = std::fs::read(b.join("model.ganc")).unwrap();
    assert_eq!(ckpt_a, ckpt_b, "checkpoints differ between identical runs");
    println!("c08: caches, checkpoint and enhanced files bit-identical across reruns");
}

/// Criterion 9: metric sanity. The SNR leg checks the mixing gain on the
/// in-memory buffers, before any 16-bit quantization.
#[test]
fn c09_metric_sanity() {
    let s = synth_speech_like(3.0, 16_000, 909);
    let v = stoi(&s, &s).unwrap();
    assert!(v >= 0.999, "stoi(s,s) = {v}");

    assert_eq!(sdr(&s, &s).unwrap(), SDR_SENTINEL_DB);

    let noise = synth_white(s.len(), 16_000, 910);
    for snr in [-5.0, 0.0, 5.0, 17.25] {
        let (_, scaled) = mix_at_snr(&s, &noise, snr).unwrap();
        let measured = measured_snr_db(&s, &scaled);
        assert!(
            (measured - snr).abs() < 1e-9,
            "requested {snr} dB, measured {measured} dB"
        );
    }
    println!("c09: stoi(s,s), SDR sentinel and 1e-9 dB mixing accuracy confirmed");
}

/// Criterion 10: every generated mask value lies strictly inside (0, 1)
/// across the desk-scale test set.
#[test]
fn c10_mask_range_invariant() {
    let d = &*DESK;
    assert!(
        d.mask_min > 0.0 && d.mask_max < 1.0,
        "mask range [{}, {}] escapes (0, 1)",
        d.mask_min,
        d.mask_max
    );
    println!(
        "c10: generated masks within (0,1): min {:.3e}, 1 - max {:.3e}",
        d.mask_min,
        1.0 - d.mask_max
    );
}
