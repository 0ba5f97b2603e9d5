//! Run configuration: sectioned `key = value` text files with CLI flag
//! overrides. Defaults are the standard recipe: 512/256 STFT at 16 kHz,
//! 64 mel bands, 22 MFCC + 22 NSSC with one context frame each side,
//! 50 epochs at batch 128 with lambda 100.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use afpc_core::dsp::StftConfig;
use afpc_core::features::{FeatureConfig, FeatureSet};
use afpc_core::neural::checkpoint::parse_schedule;
use afpc_core::neural::{half_split_schedule, TrainConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stft: StftConfig,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    /// True when the schedule came from a file or flag rather than the
    /// half-split default, so epoch overrides know whether to rebuild it.
    schedule_pinned: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default_16k(),
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
            schedule_pinned: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            self.set(&section, key, value).map_err(|msg| {
                CliError::Usage(format!("config line {}: {msg}", lineno + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("bad value `{value}` for `{key}`"))
        }
        match (section, key) {
            ("stft", "frame_size") => self.stft.frame_size = parse(key, value)?,
            ("stft", "hop") => self.stft.hop = parse(key, value)?,
            ("stft", "sample_rate") => self.stft.sample_rate = parse(key, value)?,
            ("features", "feature_set") => {
                self.features.feature_set = FeatureSet::from_str(value)?
            }
            ("features", "bands") => self.features.bands = parse(key, value)?,
            ("features", "mfcc_count") => self.features.mfcc_count = parse(key, value)?,
            ("features", "nssc_keep") => self.features.nssc_keep = parse(key, value)?,
            ("features", "preemphasis") => self.features.preemphasis = parse(key, value)?,
            ("features", "delta_window") => self.features.delta_window = parse(key, value)?,
            ("features", "context") => self.features.context = parse(key, value)?,
            ("features", "f_min") => self.features.f_min = parse(key, value)?,
            ("features", "f_max") => self.features.f_max = parse(key, value)?,
            ("train", "epochs") => {
                self.train.epochs = parse(key, value)?;
                if !self.schedule_pinned {
                    self.train.lr_schedule = half_split_schedule(self.train.epochs, 1e-4, 1e-5);
                }
            }
            ("train", "batch_size") => self.train.batch_size = parse(key, value)?,
            ("train", "lr_schedule") => {
                self.train.lr_schedule =
                    parse_schedule(value).map_err(|e| e.to_string())?;
                self.schedule_pinned = true;
            }
            ("train", "lambda_l1") => self.train.lambda_l1 = parse(key, value)?,
            ("train", "beta1") => self.train.adam.beta1 = parse(key, value)?,
            ("train", "beta2") => self.train.adam.beta2 = parse(key, value)?,
            ("train", "epsilon") => self.train.adam.epsilon = parse(key, value)?,
            ("train", "seed") => self.train.seed = parse(key, value)?,
            ("train", "normalize_inputs") => self.train.normalize_inputs = parse(key, value)?,
            ("train", "z_dim") => self.train.z_dim = parse(key, value)?,
            ("train", "hidden_layers") => {
                self.train.hidden_layers = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| format!("bad hidden layer `{v}`")))
                    .collect::<Result<_, _>>()?
            }
            ("train", "dropout") => self.train.dropout = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}` in section `[{section}]`")),
        }
        Ok(())
    }

    /// Apply the shared CLI flags on top of file values.
    pub fn apply_flags(
        &mut self,
        feature_set: Option<FeatureSet>,
        context: Option<usize>,
        seed: Option<u64>,
        epochs: Option<usize>,
    ) {
        if let Some(set) = feature_set {
            self.features.feature_set = set;
        }
        if let Some(j) = context {
            self.features.context = j;
        }
        if let Some(s) = seed {
            self.train.seed = s;
        }
        if let Some(e) = epochs {
            self.train.epochs = e;
            if !self.schedule_pinned {
                self.train.lr_schedule = half_split_schedule(e, 1e-4, 1e-5);
            }
        }
    }

    /// Canonical text echo of everything that affects extraction outputs;
    /// hashed into cache sidecars so config changes are detected.
    pub fn extraction_echo(&self) -> String {
        let f = &self.features;
        let s = &self.stft;
        let mut out = String::new();
        let _ = write!(
            out,
            "stft={}|{}|{} set={} bands={} mfcc={} nssc={} preemph={} deltaw={} ctx={} fmin={} fmax={}",
            s.frame_size,
            s.hop,
            s.sample_rate,
            f.feature_set,
            f.bands,
            f.mfcc_count,
            f.nssc_keep,
            f.preemphasis,
            f.delta_window,
            f.context,
            f.f_min,
            f.f_max
        );
        out
    }
}
