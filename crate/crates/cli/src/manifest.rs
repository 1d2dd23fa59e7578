//! Experiment manifests: the complete, hashable description of one command.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tridot::stats::{Budget, Thresholds};

use crate::error::CliError;

pub const SCHEMA: &str = "tridot/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Sample,
    Trace,
    Components,
    Scan,
    Stats,
    Classify,
    Render,
    Oracle,
    Transitions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma22,
    Cor23,
    Extremal,
    Merge,
    Deep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Ascii,
    Svg,
    Pgm,
    Csv,
    Json,
}

/// Command parameters; each command reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Patch file read instead of sampling `measure` on `geometry`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Start cell `k,l`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Inclusive `lo..hi`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hrange: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub depths: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    /// Expected verdict (`tree` or `ribbon`); a mismatch is a property failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<String>,
    /// Trajectories to draw, `k,l:steps`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    /// Cylinder event `k,l=b;...`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    /// Second event for a correlation table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    /// Shifts `k,l` for the correlation table.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
    /// Output path; standard output when absent. Not part of the hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Manifest {
    pub fn new(command: Command, seed: u64) -> Self {
        Self { schema: SCHEMA.into(), command, measure: None, geometry: None, seed, params: Params::default(), output: None }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: malformed manifest: {e}", path.display())))?;
        if m.schema != SCHEMA {
            return Err(CliError::Usage(format!("unsupported schema `{}` (expected {SCHEMA})", m.schema)));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// SHA-256 of the compact JSON form with the output path removed.
    pub fn hash(&self) -> String {
        let canonical = Manifest { output: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_path() {
        let mut a = Manifest::new(Command::Classify, 3);
        a.measure = Some("haar".into());
        let mut b = a.clone();
        b.output = Some("x.json".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn round_trip() {
        let mut a = Manifest::new(Command::Stats, 9);
        a.params.suite = Some(Suite::Merge);
        a.params.n = vec![16, 64];
        let back: Manifest = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rejects_unknown_fields() {
        let r: Result<Manifest, _> = serde_json::from_str(r#"{"schema":"tridot/1","command":"sample","seed":1,"colour":2}"#);
        assert!(r.is_err());
    }
}
