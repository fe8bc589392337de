//! Versioned calibration data: detection thresholds δ̂(n, d, k), empirical
//! lemma constants, and singular-band parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog;
use crate::cloud::sample_zero_set;
use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::theta::{theta_bilateral, ThetaOptions};

/// Bumped whenever the meaning of stored values changes.
pub const CALIBRATION_FORMAT: u32 = 1;

const EMBEDDED: &str = include_str!("../data/calibration.json");

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DeltaEntry {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub delta: f64,
    /// Smallest measured `Θ^{(k)}(0, 1)` over configurations of degree in `(k, d]`.
    pub theta_min: f64,
    /// Configuration attaining `theta_min` (empty when there is none).
    pub witness: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigMeasurement {
    pub name: String,
    pub n: usize,
    pub degree: usize,
    pub k: usize,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Calibration {
    pub format: u32,
    /// Content hash of the stored values.
    pub version: String,
    pub deltas: Vec<DeltaEntry>,
    pub measurements: Vec<ConfigMeasurement>,
    pub constants: BTreeMap<String, f64>,
    /// Singular band `|∇p| <= g0 h`, `|p| <= f0 h²`.
    pub band_g0: f64,
    pub band_f0: f64,
}

impl Calibration {
    pub fn empty() -> Self {
        let mut c = Calibration {
            format: CALIBRATION_FORMAT,
            version: String::new(),
            deltas: Vec::new(),
            measurements: Vec::new(),
            constants: BTreeMap::new(),
            band_g0: 1.0,
            band_f0: 0.5,
        };
        c.version = c.content_version();
        c
    }

    /// The calibration shipped with the library.
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED).expect("embedded calibration parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    /// Hash over everything except the version field itself.
    pub fn content_version(&self) -> String {
        let mut c = self.clone();
        c.version = String::new();
        let digest = Sha256::digest(serde_json::to_vec(&c).expect("calibration serializes"));
        format!("{}-{}", self.format, hex_prefix(&digest))
    }

    /// Usable: right format, consistent version, thresholds present.
    pub fn validate(&self) -> Result<()> {
        if self.format != CALIBRATION_FORMAT {
            return Err(Error::Calibration(format!(
                "format {} does not match expected {}",
                self.format, CALIBRATION_FORMAT
            )));
        }
        if self.version != self.content_version() {
            return Err(Error::Calibration(format!(
                "version {} does not match content {}",
                self.version,
                self.content_version()
            )));
        }
        if self.deltas.is_empty() {
            return Err(Error::Calibration("no detection thresholds".into()));
        }
        Ok(())
    }

    /// δ̂(n, d, k) and whether it was extrapolated from a smaller degree.
    pub fn delta(&self, n: usize, d: usize, k: usize) -> Result<(f64, bool)> {
        if k >= d {
            return Ok((0.5, false));
        }
        if let Some(e) = self.deltas.iter().find(|e| e.n == n && e.d == d && e.k == k) {
            return Ok((e.delta, false));
        }
        self.deltas
            .iter()
            .filter(|e| e.n == n && e.k == k && e.d < d)
            .max_by_key(|e| e.d)
            .map(|e| (e.delta, true))
            .ok_or_else(|| Error::Calibration(format!("no threshold for n={n}, d={d}, k={k}")))
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    /// Thresholds used under `--uncalibrated`: a fixed conservative value.
    pub fn uncalibrated() -> Self {
        let mut c = Self::empty();
        for n in 2..=4 {
            for d in 2..=6 {
                for k in 1..d {
                    c.deltas.push(DeltaEntry {
                        n,
                        d,
                        k,
                        delta: 0.1,
                        theta_min: 0.2,
                        witness: String::new(),
                    });
                }
            }
        }
        c.version = c.content_version();
        c
    }
}

fn hex_prefix(bytes: &[u8]) -> String {
    bytes.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Harmonic cones that are singular at the origin, of degree `2..=d_max`.
pub fn singular_corpus(n: usize, d_max: usize) -> Vec<(String, MultiPoly)> {
    let mut out: Vec<(String, MultiPoly)> = Vec::new();
    let lift = |p: MultiPoly| -> MultiPoly {
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        p.substitute_linear(&rows, n).expect("lift to n variables")
    };
    for j in 2..=d_max as u32 {
        out.push((format!("re_z{j}"), lift(catalog::re_zk(j))));
    }
    if n >= 3 {
        let axes = |m: usize| -> Vec<Vec<f64>> {
            (0..m)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()
        };
        // Rotationally symmetric quadratic cone.
        let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            terms.push((e, if i + 1 == n { -((n - 1) as f64) } else { 1.0 }));
        }
        out.push(("round_cone".into(), MultiPoly::from_terms(n, terms).unwrap()));
        if d_max >= 3 {
            out.push(("coordinate_triple".into(), catalog::product_of_linear(n, &axes(3))));
            if n == 3 {
                out.push(("szulkin".into(), catalog::szulkin()));
            }
        }
        if n >= 4 {
            out.push(("r4_separating".into(), catalog::r4_separating(1.0, 1.0)));
            if d_max >= 4 {
                out.push(("coordinate_quadruple".into(), catalog::product_of_linear(n, &axes(4))));
            }
        }
        if n == 3 && d_max >= 4 {
            let q = catalog::product_of_linear(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
            let r = MultiPoly::from_terms(
                3,
                vec![(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 2], -6.0)],
            )
            .unwrap();
            // x1 x2 (x1² + x2² − 6 x3²) is harmonic.
            out.push(("mixed_quartic".into(), &q * &r));
        }
    }
    out.retain(|(_, p)| p.degree() as usize <= d_max && p.is_harmonic(1e-12));
    out
}

/// Measure `Θ^{(k)}(0, 1)` for every corpus configuration and every `k` below
/// its degree, calling `progress` after each measurement.
pub fn measure_corpus<F: FnMut(&ConfigMeasurement)>(
    n: usize,
    d_max: usize,
    k_max: usize,
    opts: &ThetaOptions,
    mut progress: F,
) -> Result<Vec<ConfigMeasurement>> {
    let mut out = Vec::new();
    for (name, p) in singular_corpus(n, d_max) {
        let deg = p.degree() as usize;
        let cloud = sample_zero_set(&p, &vec![0.0; n], 1.0 + opts.margin, opts.h(n))?;
        for k in 1..deg.min(k_max + 1) {
            let rep = theta_bilateral(&cloud, &vec![0.0; n], 1.0, k, opts, None)?;
            let m = ConfigMeasurement {
                name: name.clone(),
                n,
                degree: deg,
                k,
                theta: rep.theta[0],
            };
            progress(&m);
            out.push(m);
        }
    }
    Ok(out)
}

/// `δ̂(n, d, k) = ½ min Θ^{(k)}` over measured configurations of degree in `(k, d]`.
pub fn deltas_from_measurements(ms: &[ConfigMeasurement]) -> Vec<DeltaEntry> {
    let mut keys: Vec<(usize, usize)> = ms.iter().map(|m| (m.n, m.k)).collect();
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    for (n, k) in keys {
        let d_max = ms
            .iter()
            .filter(|m| m.n == n && m.k == k)
            .map(|m| m.degree)
            .max()
            .unwrap_or(k);
        for d in (k + 1)..=d_max {
            let best = ms
                .iter()
                .filter(|m| m.n == n && m.k == k && m.degree > k && m.degree <= d)
                .min_by(|a, b| a.theta.total_cmp(&b.theta));
            if let Some(b) = best {
                out.push(DeltaEntry {
                    n,
                    d,
                    k,
                    delta: 0.5 * b.theta,
                    theta_min: b.theta,
                    witness: b.name.clone(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_singular_and_harmonic() {
        for n in 2..=4 {
            for (name, p) in singular_corpus(n, 4) {
                assert!(p.is_harmonic(1e-12), "{name}");
                assert!(p.is_homogeneous(), "{name}");
                assert!(p.vanishing_order(&vec![0.0; n], 1e-9).unwrap() >= 2, "{name}");
            }
        }
    }

    #[test]
    fn delta_rule() {
        let ms = vec![
            ConfigMeasurement {
                name: "a".into(),
                n: 2,
                degree: 2,
                k: 1,
                theta: 0.7,
            },
            ConfigMeasurement {
                name: "b".into(),
                n: 2,
                degree: 3,
                k: 1,
                theta: 0.6,
            },
            ConfigMeasurement {
                name: "b".into(),
                n: 2,
                degree: 3,
                k: 2,
                theta: 0.4,
            },
        ];
        let ds = deltas_from_measurements(&ms);
        let find = |d, k| ds.iter().find(|e| e.d == d && e.k == k).unwrap().delta;
        assert!((find(2, 1) - 0.35).abs() < 1e-12);
        assert!((find(3, 1) - 0.30).abs() < 1e-12);
        assert!((find(3, 2) - 0.20).abs() < 1e-12);
    }

    #[test]
    fn versioning() {
        let mut c = Calibration::uncalibrated();
        assert!(c.validate().is_ok());
        assert_eq!(c.delta(2, 3, 3).unwrap().0, 0.5);
        assert_eq!(c.delta(2, 9, 1).unwrap(), (0.1, true));
        c.band_g0 = 2.0;
        assert!(matches!(c.validate(), Err(Error::Calibration(_))));
        let back = Calibration::from_json(&Calibration::uncalibrated().to_json()).unwrap();
        assert!(back.validate().is_ok());
        assert!(Calibration::empty().validate().is_err());
    }
}
