use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Everything needed to reproduce a run and check its outputs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name, without `--out`.
    pub args: Vec<String>,
    /// SHA-256 of each input, keyed by role.
    pub input_hashes: BTreeMap<String, String>,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Pitches, resolutions and scales the run used.
    pub resolutions: BTreeMap<String, Vec<f64>>,
    pub calibration_source: String,
    pub calibration_version: String,
    /// SHA-256 of each output file.
    pub outputs: BTreeMap<String, String>,
    pub wall_time_s: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("manifest at line {} column {}: {e}", e.line(), e.column())))
    }
}

/// Drop `--out DIR` / `--out=DIR` from an argument list.
pub fn strip_out(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_out_flag() {
        let a: Vec<String> = ["frequency", "--out", "d", "--poly", "x", "--out=e"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(strip_out(&a), vec!["frequency", "--poly", "x"]);
    }

    #[test]
    fn roundtrip() {
        let m = RunManifest {
            tool_version: "0".into(),
            command: "zeta".into(),
            args: vec!["zeta".into()],
            input_hashes: BTreeMap::new(),
            seed: 1,
            threads: None,
            resolutions: BTreeMap::new(),
            calibration_source: "embedded".into(),
            calibration_version: "1-x".into(),
            outputs: BTreeMap::new(),
            wall_time_s: 0.5,
            exit_code: 0,
        };
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
    }
}
