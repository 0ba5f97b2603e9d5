//! Subcommand implementations and the cache-directory layout they share.

pub mod enhance;
pub mod evaluate;
pub mod extract;
pub mod info;
pub mod mix;
pub mod train;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use afpc_core::util::fnv1a64;

use crate::error::CliError;

/// Per-utterance cache file set, keyed by the noisy file's stem.
pub struct CachePaths {
    /// Context-stacked conditioning vectors (`AFPC` container).
    pub context: PathBuf,
    /// Current-frame vectors (`AFPC` container).
    pub current: PathBuf,
    /// Mask targets (`AFPC` container, kind id 255).
    pub targets: PathBuf,
    /// Noisy spectrogram (`SPEC` container).
    pub spectrogram: PathBuf,
    /// Text sidecar with the config echo and input digests.
    pub meta: PathBuf,
}

impl CachePaths {
    pub fn new(cache_dir: &Path, stem: &str) -> Self {
        Self {
            context: cache_dir.join(format!("{stem}.ctx.afpc")),
            current: cache_dir.join(format!("{stem}.cur.afpc")),
            targets: cache_dir.join(format!("{stem}.irm")),
            spectrogram: cache_dir.join(format!("{stem}.spec")),
            meta: cache_dir.join(format!("{stem}.meta")),
        }
    }

    pub fn all_exist(&self) -> bool {
        [&self.context, &self.current, &self.targets, &self.spectrogram, &self.meta]
            .iter()
            .all(|p| p.exists())
    }
}

pub fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

/// Sidecar describing how a cache set was produced.
pub struct CacheMeta {
    pub config_hash: u64,
    pub input_digest: u64,
    pub frames: usize,
    pub frame_dim: usize,
    pub context_dim: usize,
    pub bins: usize,
}

impl CacheMeta {
    pub fn write(&self, path: &Path, config_echo: &str) -> Result<(), CliError> {
        let text = format!(
            "config_echo = {config_echo}\nconfig_hash = {:016x}\ninput_digest = {:016x}\n\
             frames = {}\nframe_dim = {}\ncontext_dim = {}\nbins = {}\n",
            self.config_hash, self.input_digest, self.frames, self.frame_dim, self.context_dim,
            self.bins
        );
        std::fs::write(path, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |key: &str| -> Result<String, CliError> {
            map.get(key).cloned().ok_or_else(|| {
                CliError::Data(format!("cache sidecar {} is missing `{key}`", path.display()))
            })
        };
        let hex = |key: &str| -> Result<u64, CliError> {
            u64::from_str_radix(&get(key)?, 16)
                .map_err(|_| CliError::Data(format!("bad `{key}` in {}", path.display())))
        };
        let num = |key: &str| -> Result<usize, CliError> {
            get(key)?
                .parse()
                .map_err(|_| CliError::Data(format!("bad `{key}` in {}", path.display())))
        };
        Ok(Self {
            config_hash: hex("config_hash")?,
            input_digest: hex("input_digest")?,
            frames: num("frames")?,
            frame_dim: num("frame_dim")?,
            context_dim: num("context_dim")?,
            bins: num("bins")?,
        })
    }
}

/// Digest of the raw bytes of every file that feeds one cache set.
pub fn input_digest(paths: &[&Path]) -> Result<u64, CliError> {
    let mut digest = 0xcbf29ce484222325u64;
    for path in paths {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        digest = digest.rotate_left(7) ^ fnv1a64(&bytes);
    }
    Ok(digest)
}
