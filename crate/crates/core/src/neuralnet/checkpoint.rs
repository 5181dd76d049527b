//! Checkpoint files: one JSON manifest line followed by every parameter
//! array as little-endian `f64`, in manifest order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: &str = "figphm-ckpt-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    /// Scalar type the model was trained in.
    pub scalar: String,
    /// Op graph, one node per entry, e.g. `conv1d(w=3,f=100)`.
    pub graph: Vec<String>,
    pub params: Vec<ParamSpec>,
    pub seed: u64,
    pub hyperparameters: serde_json::Value,
    /// Anything else needed to rebuild the model (vocabulary, ...).
    #[serde(default)]
    pub extra: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub manifest: Manifest,
    pub values: Vec<Vec<f64>>,
}

impl Checkpoint {
    fn validate(&self) -> Result<()> {
        if self.manifest.version != CHECKPOINT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported checkpoint version {:?}",
                self.manifest.version
            )));
        }
        if self.values.len() != self.manifest.params.len() {
            return Err(Error::Shape(format!(
                "{} arrays for {} declared parameters",
                self.values.len(),
                self.manifest.params.len()
            )));
        }
        for (spec, v) in self.manifest.params.iter().zip(&self.values) {
            if spec.len() != v.len() {
                return Err(Error::Shape(format!("parameter {} has {} values, shape {:?}", spec.name, v.len(), spec.shape)));
            }
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        self.validate()?;
        let header = serde_json::to_string(&self.manifest).map_err(|e| Error::invalid(e.to_string()))?;
        let io = |e| Error::io("<checkpoint>", e);
        w.write_all(header.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
        for x in self.values.iter().flatten() {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = BufReader::new(r);
        let io = |e| Error::io("<checkpoint>", e);
        let mut header = String::new();
        r.read_line(&mut header).map_err(io)?;
        let manifest: Manifest =
            serde_json::from_str(header.trim_end()).map_err(|e| Error::parse(1, format!("bad manifest: {e}")))?;
        if manifest.version != CHECKPOINT_VERSION {
            return Err(Error::invalid(format!("unsupported checkpoint version {:?}", manifest.version)));
        }
        let mut values = Vec::with_capacity(manifest.params.len());
        let mut buf = [0u8; 8];
        for spec in &manifest.params {
            let mut v = Vec::with_capacity(spec.len());
            for _ in 0..spec.len() {
                r.read_exact(&mut buf)
                    .map_err(|_| Error::invalid(format!("checkpoint truncated in parameter {}", spec.name)))?;
                v.push(f64::from_le_bytes(buf));
            }
            values.push(v);
        }
        if r.read(&mut buf).map_err(io)? != 0 {
            return Err(Error::invalid("trailing bytes after checkpoint parameters"));
        }
        let ckpt = Checkpoint { manifest, values };
        ckpt.validate()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(f)).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(f).map_err(|e| e.context(path.display().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            manifest: Manifest {
                version: CHECKPOINT_VERSION.into(),
                scalar: "f64".into(),
                graph: vec!["dense(1)".into()],
                params: vec![
                    ParamSpec {
                        name: "w".into(),
                        shape: vec![1, 3],
                    },
                    ParamSpec {
                        name: "b".into(),
                        shape: vec![1],
                    },
                ],
                seed: 7,
                hyperparameters: serde_json::json!({"lr": 0.001}),
                extra: serde_json::Value::Null,
            },
            values: vec![vec![0.1, -2.5, f64::MIN_POSITIVE], vec![3.0]],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        assert!(bytes.contains(&b'\n'));
        let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn layout_is_little_endian_after_manifest() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        assert!(String::from_utf8_lossy(&bytes[..nl]).contains(CHECKPOINT_VERSION));
        let body = &bytes[nl + 1..];
        assert_eq!(body.len(), 4 * 8);
        assert_eq!(&body[..8], &0.1f64.to_le_bytes());
        assert_eq!(&body[24..], &3.0f64.to_le_bytes());
    }

    #[test]
    fn truncated_or_mislabeled_files_error() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        assert!(Checkpoint::read_from(&bytes[..bytes.len() - 3]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Checkpoint::read_from(extra.as_slice()).is_err());
        let mut bad = sample();
        bad.manifest.version = "other".into();
        assert!(bad.write_to(Vec::new()).is_err());
        let mut short = sample();
        short.values[0].pop();
        assert!(short.write_to(Vec::new()).is_err());
    }
}
