//! Dataset manifests.
//!
//! The input manifest is line-oriented text, one entry per line, with
//! tab-separated fields `clean<TAB>noise<TAB>snr_db<TAB>split` and `#`
//! comments. The noise field is either a WAV path or one of the built-in
//! generator names (`white`, `pink_like`, `babble_like`).
//!
//! Mixing writes a companion "mixed" manifest with one line per produced
//! mixture: `noisy<TAB>clean<TAB>scaled_noise<TAB>noise<TAB>snr_db<TAB>split`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{NoiseKind, SignalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("split must be train or test, got `{other}`")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Noise source: a file on disk or a built-in generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoiseSource {
    Kind(NoiseKind),
    File(PathBuf),
}

impl NoiseSource {
    pub fn label(&self) -> String {
        match self {
            NoiseSource::Kind(k) => k.name().to_string(),
            NoiseSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "noise".to_string()),
        }
    }

    pub fn spec_string(&self) -> String {
        match self {
            NoiseSource::Kind(k) => k.name().to_string(),
            NoiseSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub clean: PathBuf,
    pub noise: NoiseSource,
    pub snr_db: f64,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, SignalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SignalError::IoFailure {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SignalError> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |reason: String| SignalError::ManifestParse { line: lineno + 1, reason };
            if fields.len() != 4 {
                return Err(err(format!("expected 4 tab-separated fields, got {}", fields.len())));
            }
            let noise = match NoiseKind::from_str(fields[1]) {
                Ok(kind) => NoiseSource::Kind(kind),
                Err(_) => NoiseSource::File(PathBuf::from(fields[1])),
            };
            let snr_db: f64 =
                fields[2].parse().map_err(|_| err(format!("bad snr_db `{}`", fields[2])))?;
            if !snr_db.is_finite() {
                return Err(err("snr_db must be finite".into()));
            }
            let split = Split::from_str(fields[3]).map_err(err)?;
            entries.push(ManifestEntry { clean: PathBuf::from(fields[0]), noise, snr_db, split });
        }
        Ok(Self { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SignalError> {
        let path = path.as_ref();
        let mut text = String::from("# clean\tnoise\tsnr_db\tsplit\n");
        for e in &self.entries {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.clean.display(),
                e.noise.spec_string(),
                e.snr_db,
                e.split
            ));
        }
        fs::write(path, text).map_err(|e| SignalError::IoFailure {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// One produced mixture: where the noisy and scaled-noise files landed and
/// what went into them.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedEntry {
    pub noisy: PathBuf,
    pub clean: PathBuf,
    pub noise_scaled: PathBuf,
    pub noise_label: String,
    pub snr_db: f64,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MixedManifest {
    pub entries: Vec<MixedEntry>,
}

impl MixedManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, SignalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SignalError::IoFailure {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |reason: String| SignalError::ManifestParse { line: lineno + 1, reason };
            if fields.len() != 6 {
                return Err(err(format!("expected 6 tab-separated fields, got {}", fields.len())));
            }
            entries.push(MixedEntry {
                noisy: PathBuf::from(fields[0]),
                clean: PathBuf::from(fields[1]),
                noise_scaled: PathBuf::from(fields[2]),
                noise_label: fields[3].to_string(),
                snr_db: fields[4].parse().map_err(|_| err(format!("bad snr_db `{}`", fields[4])))?,
                split: Split::from_str(fields[5]).map_err(err)?,
            });
        }
        Ok(Self { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SignalError> {
        let path = path.as_ref();
        let mut text = String::from("# noisy\tclean\tscaled_noise\tnoise\tsnr_db\tsplit\n");
        for e in &self.entries {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                e.noisy.display(),
                e.clean.display(),
                e.noise_scaled.display(),
                e.noise_label,
                e.snr_db,
                e.split
            ));
        }
        fs::write(path, text).map_err(|e| SignalError::IoFailure {
            path: path.display().to_string(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_kinds_and_paths() {
        let text = "# a comment\n\
                    data/a.wav\twhite\t0\ttrain\n\
                    \n\
                    data/b.wav\tnoise/hum.wav\t-5\ttest\n";
        let m = DatasetManifest::parse(text).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[0].noise, NoiseSource::Kind(NoiseKind::White));
        assert_eq!(m.entries[0].split, Split::Train);
        assert_eq!(m.entries[1].noise, NoiseSource::File(PathBuf::from("noise/hum.wav")));
        assert_eq!(m.entries[1].snr_db, -5.0);
    }

    #[test]
    fn reports_line_numbers_on_errors() {
        let text = "data/a.wav\twhite\t0\ttrain\ndata/b.wav\twhite\tNaNX\ttrain\n";
        match DatasetManifest::parse(text) {
            Err(SignalError::ManifestParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "data/a.wav\twhite\t0\tvalidation\n";
        assert!(matches!(
            DatasetManifest::parse(text),
            Err(SignalError::ManifestParse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trips_through_write_and_read() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest {
            entries: vec![ManifestEntry {
                clean: "c.wav".into(),
                noise: NoiseSource::Kind(NoiseKind::BabbleLike),
                snr_db: 5.0,
                split: Split::Test,
            }],
        };
        let path = dir.path().join("m.tsv");
        m.write(&path).unwrap();
        assert_eq!(DatasetManifest::read(&path).unwrap(), m);

        let mixed = MixedManifest {
            entries: vec![MixedEntry {
                noisy: "n.wav".into(),
                clean: "c.wav".into(),
                noise_scaled: "ns.wav".into(),
                noise_label: "white".into(),
                snr_db: -5.0,
                split: Split::Train,
            }],
        };
        let path = dir.path().join("mixed.tsv");
        mixed.write(&path).unwrap();
        assert_eq!(MixedManifest::read(&path).unwrap(), mixed);
    }
}
