//! Checkpoint file: `GANC` magic, format version, a UTF-8 metadata block
//! (dims, activations, feature set, context, normalization statistics and
//! the config echo), parameter tensors as 64-bit little-endian floats in
//! declaration order, optimizer state, and a trailing CRC-32 of all
//! preceding bytes.
//!
//! Floats in the metadata block are written with Rust's shortest
//! round-trippable decimal formatting, so save/load is bit-exact.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::adam::{AdamConfig, AdamState};
use super::network::{Activation, DenseNetwork, Layer};
use super::{GanModel, LrSpan, NeuralError, NormStats, TrainConfig};
use crate::features::FeatureSet;
use crate::mat::Matrix;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"GANC";
pub const CHECKPOINT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> NeuralError {
    NeuralError::IoFailure { path: path.display().to_string(), source }
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
}

fn network_meta(prefix: &str, net: &DenseNetwork, out: &mut String) {
    out.push_str(&format!("{prefix}_dims = {}\n", join(net.dims(), ",")));
    out.push_str(&format!(
        "{prefix}_activations = {}\n",
        join(net.layers.iter().map(|l| l.activation.name()), ",")
    ));
    out.push_str(&format!(
        "{prefix}_dropouts = {}\n",
        join(net.layers.iter().map(|l| l.dropout), ",")
    ));
}

fn push_f64s(bytes: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
}

fn push_network(bytes: &mut Vec<u8>, net: &DenseNetwork) {
    for layer in &net.layers {
        push_f64s(bytes, &layer.weights.data);
        push_f64s(bytes, &layer.biases);
    }
}

fn push_opt(bytes: &mut Vec<u8>, state: &AdamState) {
    bytes.extend_from_slice(&state.step.to_le_bytes());
    for m in &state.m_weights {
        push_f64s(bytes, &m.data);
    }
    for v in &state.v_weights {
        push_f64s(bytes, &v.data);
    }
    for m in &state.m_biases {
        push_f64s(bytes, m);
    }
    for v in &state.v_biases {
        push_f64s(bytes, v);
    }
}

pub fn save_checkpoint(model: &GanModel, path: impl AsRef<Path>) -> Result<(), NeuralError> {
    let path = path.as_ref();
    let mut meta = String::new();
    meta.push_str(&format!("feature_set = {}\n", model.feature_set));
    meta.push_str(&format!("context = {}\n", model.context));
    meta.push_str(&format!("frame_dim = {}\n", model.frame_dim));
    meta.push_str(&format!("bins = {}\n", model.bins));
    meta.push_str(&format!("epochs_done = {}\n", model.epochs_done));
    network_meta("gen", &model.generator, &mut meta);
    network_meta("disc", &model.discriminator, &mut meta);
    match &model.norm {
        Some(stats) => {
            meta.push_str("normalized = true\n");
            meta.push_str(&format!("norm_mean = {}\n", join(stats.mean.iter(), " ")));
            meta.push_str(&format!("norm_std = {}\n", join(stats.std.iter(), " ")));
        }
        None => meta.push_str("normalized = false\n"),
    }
    let cfg = &model.config;
    meta.push_str(&format!("cfg_epochs = {}\n", cfg.epochs));
    meta.push_str(&format!("cfg_batch_size = {}\n", cfg.batch_size));
    meta.push_str(&format!("cfg_lr_schedule = {}\n", cfg.schedule_string()));
    meta.push_str(&format!("cfg_lambda_l1 = {}\n", cfg.lambda_l1));
    meta.push_str(&format!("cfg_beta1 = {}\n", cfg.adam.beta1));
    meta.push_str(&format!("cfg_beta2 = {}\n", cfg.adam.beta2));
    meta.push_str(&format!("cfg_epsilon = {}\n", cfg.adam.epsilon));
    meta.push_str(&format!("cfg_seed = {}\n", cfg.seed));
    meta.push_str(&format!("cfg_normalize_inputs = {}\n", cfg.normalize_inputs));
    meta.push_str(&format!("cfg_z_dim = {}\n", cfg.z_dim));
    meta.push_str(&format!("cfg_hidden_layers = {}\n", join(cfg.hidden_layers.iter(), ",")));
    meta.push_str(&format!("cfg_dropout = {}\n", cfg.dropout));

    let mut bytes = Vec::new();
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    bytes.extend_from_slice(meta.as_bytes());
    push_network(&mut bytes, &model.generator);
    push_network(&mut bytes, &model.discriminator);
    push_opt(&mut bytes, &model.gen_opt);
    push_opt(&mut bytes, &model.disc_opt);

    let crc = crc32fast::hash(&bytes);
    bytes.extend_from_slice(&crc.to_le_bytes());
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        if self.pos + n > self.bytes.len() {
            return Err(NeuralError::MalformedCheckpoint("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, NeuralError> {
        let raw = self.take(n * 8)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

struct Meta(HashMap<String, String>);

impl Meta {
    fn parse(text: &str) -> Self {
        let mut map = HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Self(map)
    }

    fn get(&self, key: &str) -> Result<&str, NeuralError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| NeuralError::MalformedCheckpoint(format!("missing key `{key}`")))
    }

    fn parse_value<T: FromStr>(&self, key: &str) -> Result<T, NeuralError> {
        self.get(key)?
            .parse()
            .map_err(|_| NeuralError::MalformedCheckpoint(format!("bad value for `{key}`")))
    }

    fn parse_list<T: FromStr>(&self, key: &str, sep: char) -> Result<Vec<T>, NeuralError> {
        let raw = self.get(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(sep)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| NeuralError::MalformedCheckpoint(format!("bad list `{key}`")))
            })
            .collect()
    }
}

fn read_network(meta: &Meta, prefix: &str, r: &mut Reader) -> Result<DenseNetwork, NeuralError> {
    let dims: Vec<usize> = meta.parse_list(&format!("{prefix}_dims"), ',')?;
    let act_names: Vec<String> = meta.parse_list(&format!("{prefix}_activations"), ',')?;
    let dropouts: Vec<f64> = meta.parse_list(&format!("{prefix}_dropouts"), ',')?;
    if dims.len() < 2 || act_names.len() != dims.len() - 1 || dropouts.len() != dims.len() - 1 {
        return Err(NeuralError::MalformedCheckpoint(format!("inconsistent {prefix} layout")));
    }
    let mut layers = Vec::new();
    for l in 0..dims.len() - 1 {
        let activation = Activation::from_name(&act_names[l]).ok_or_else(|| {
            NeuralError::MalformedCheckpoint(format!("unknown activation `{}`", act_names[l]))
        })?;
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let weights = Matrix { rows: fan_out, cols: fan_in, data: r.f64s(fan_in * fan_out)? };
        let biases = r.f64s(fan_out)?;
        layers.push(Layer { weights, biases, activation, dropout: dropouts[l] });
    }
    Ok(DenseNetwork { layers })
}

fn read_opt(net: &DenseNetwork, r: &mut Reader) -> Result<AdamState, NeuralError> {
    let step = r.u64()?;
    let mut state = AdamState::zeros_like(net);
    state.step = step;
    for m in state.m_weights.iter_mut() {
        m.data = r.f64s(m.data.len())?;
    }
    for v in state.v_weights.iter_mut() {
        v.data = r.f64s(v.data.len())?;
    }
    for m in state.m_biases.iter_mut() {
        *m = r.f64s(m.len())?;
    }
    for v in state.v_biases.iter_mut() {
        *v = r.f64s(v.len())?;
    }
    Ok(state)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<GanModel, NeuralError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 16 {
        return Err(NeuralError::MalformedCheckpoint("file too small".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored_crc {
        return Err(NeuralError::ChecksumMismatch);
    }
    if &body[0..4] != CHECKPOINT_MAGIC {
        return Err(NeuralError::MalformedCheckpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(NeuralError::VersionMismatch { found: version, supported: CHECKPOINT_VERSION });
    }
    let meta_len = u32::from_le_bytes(body[8..12].try_into().unwrap()) as usize;
    if 12 + meta_len > body.len() {
        return Err(NeuralError::MalformedCheckpoint("metadata block overruns file".into()));
    }
    let meta_text = std::str::from_utf8(&body[12..12 + meta_len])
        .map_err(|_| NeuralError::MalformedCheckpoint("metadata is not UTF-8".into()))?;
    let meta = Meta::parse(meta_text);

    let mut r = Reader { bytes: body, pos: 12 + meta_len };
    let generator = read_network(&meta, "gen", &mut r)?;
    let discriminator = read_network(&meta, "disc", &mut r)?;
    let gen_opt = read_opt(&generator, &mut r)?;
    let disc_opt = read_opt(&discriminator, &mut r)?;
    if r.pos != body.len() {
        return Err(NeuralError::MalformedCheckpoint("trailing bytes after tensors".into()));
    }

    let norm = if meta.parse_value::<bool>("normalized")? {
        Some(NormStats {
            mean: meta.parse_list("norm_mean", ' ')?,
            std: meta.parse_list("norm_std", ' ')?,
        })
    } else {
        None
    };

    let lr_schedule = parse_schedule(meta.get("cfg_lr_schedule")?)?;
    let config = TrainConfig {
        epochs: meta.parse_value("cfg_epochs")?,
        batch_size: meta.parse_value("cfg_batch_size")?,
        lr_schedule,
        lambda_l1: meta.parse_value("cfg_lambda_l1")?,
        adam: AdamConfig {
            beta1: meta.parse_value("cfg_beta1")?,
            beta2: meta.parse_value("cfg_beta2")?,
            epsilon: meta.parse_value("cfg_epsilon")?,
        },
        seed: meta.parse_value("cfg_seed")?,
        normalize_inputs: meta.parse_value("cfg_normalize_inputs")?,
        z_dim: meta.parse_value("cfg_z_dim")?,
        hidden_layers: meta.parse_list("cfg_hidden_layers", ',')?,
        dropout: meta.parse_value("cfg_dropout")?,
    };

    let feature_set = FeatureSet::from_str(meta.get("feature_set")?)
        .map_err(NeuralError::MalformedCheckpoint)?;
    Ok(GanModel {
        generator,
        discriminator,
        gen_opt,
        disc_opt,
        norm,
        feature_set,
        context: meta.parse_value("context")?,
        frame_dim: meta.parse_value("frame_dim")?,
        bins: meta.parse_value("bins")?,
        config,
        epochs_done: meta.parse_value("epochs_done")?,
    })
}

/// Parse `1-25:0.0001,26-50:0.00001`.
pub fn parse_schedule(text: &str) -> Result<Vec<LrSpan>, NeuralError> {
    let bad = || NeuralError::MalformedCheckpoint(format!("bad lr schedule `{text}`"));
    let mut spans = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (range, rate) = part.split_once(':').ok_or_else(bad)?;
        let (from, to) = range.split_once('-').ok_or_else(bad)?;
        spans.push(LrSpan {
            from_epoch: from.trim().parse().map_err(|_| bad())?,
            to_epoch: to.trim().parse().map_err(|_| bad())?,
            rate: rate.trim().parse().map_err(|_| bad())?,
        });
    }
    if spans.is_empty() {
        return Err(bad());
    }
    Ok(spans)
}
