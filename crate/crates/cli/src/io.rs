//! Input parsing and hashing.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use zeroset::cloud::PointCloud;
use zeroset::{catalog, MultiPoly};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Comma-separated reals.
pub fn parse_list(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .enumerate()
        .map(|(i, t)| {
            t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                CliError::Input(format!(
                    "--{flag}: entry {} ({:?}) is not a finite number",
                    i + 1,
                    t.trim()
                ))
            })
        })
        .collect()
}

/// A point in `R^n`; a single value is repeated in every coordinate.
pub fn parse_point(flag: &str, text: &str, n: usize) -> CliResult<Vec<f64>> {
    let v = parse_list(flag, text)?;
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        m if m == n => Ok(v),
        m => Err(CliError::Input(format!("--{flag}: expected {n} coordinates, got {m}"))),
    }
}

/// Inputs read during a run, keyed by role, with content hashes.
#[derive(Default)]
pub struct Inputs {
    pub hashes: BTreeMap<String, String>,
}

impl Inputs {
    pub fn poly(&mut self, spec: &str) -> CliResult<MultiPoly> {
        let path = Path::new(spec);
        let (p, bytes) = if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
            let p = MultiPoly::from_json(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
            (p, text.into_bytes())
        } else if let Some(p) = catalog::by_name(spec) {
            let bytes = p.to_json().into_bytes();
            (p, bytes)
        } else {
            return Err(CliError::Input(format!("{spec}: no such file or built-in polynomial")));
        };
        if p.degree() < 1 {
            return Err(CliError::Input(format!("{spec}: polynomial is constant")));
        }
        self.hashes.insert(format!("poly:{spec}"), sha256_hex(&bytes));
        Ok(p)
    }

    pub fn cloud(&mut self, path: &Path) -> CliResult<PointCloud> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let c = PointCloud::from_text(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.hashes
            .insert(format!("cloud:{}", path.display()), sha256_hex(text.as_bytes()));
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_points() {
        assert_eq!(parse_list("x", "1, 0.5,1e-2").unwrap(), vec![1.0, 0.5, 0.01]);
        assert!(parse_list("x", "1,,2").is_err());
        assert!(parse_list("x", "nan").is_err());
        assert_eq!(parse_point("c", "0", 3).unwrap(), vec![0.0; 3]);
        assert_eq!(parse_point("c", "-1,2", 2).unwrap(), vec![-1.0, 2.0]);
        assert!(parse_point("c", "1,2", 3).is_err());
    }

    #[test]
    fn builtin_polys_hash_stably() {
        let mut a = Inputs::default();
        let mut b = Inputs::default();
        a.poly("szulkin").unwrap();
        b.poly("szulkin").unwrap();
        assert_eq!(a.hashes, b.hashes);
        assert!(a.poly("no-such-thing").is_err());
    }
}
