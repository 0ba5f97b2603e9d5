//! Generate a small corpus of clean speech-like WAV files plus a starter
//! manifest, so the CLI pipeline can run without any external data.
//!
//! Usage: synth_corpus <out_dir> [count] [seconds] [seed]

use std::path::PathBuf;

use afpc_core::signal::{synth_speech_like, write_wav};

fn main() {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "corpus".into()));
    let count: usize = args.next().and_then(|v| v.parse().ok()).unwrap_or(10);
    let seconds: f64 = args.next().and_then(|v| v.parse().ok()).unwrap_or(4.0);
    let seed: u64 = args.next().and_then(|v| v.parse().ok()).unwrap_or(0);

    std::fs::create_dir_all(&out_dir).expect("create output dir");
    let noises = ["white", "babble_like", "pink_like"];
    let mut manifest = String::from("# clean\tnoise\tsnr_db\tsplit\n");
    for i in 0..count {
        let wav = synth_speech_like(seconds, 16_000, seed.wrapping_add(i as u64));
        let path = out_dir.join(format!("utt{i:03}.wav"));
        write_wav(&wav, &path).expect("write wav");
        let split = if i % 5 == 4 { "test" } else { "train" };
        manifest.push_str(&format!(
            "{}\t{}\t0\t{}\n",
            path.display(),
            noises[i % noises.len()],
            split
        ));
    }
    let manifest_path = out_dir.join("manifest.tsv");
    std::fs::write(&manifest_path, manifest).expect("write manifest");
    println!("wrote {count} utterances and {}", manifest_path.display());
}
