//! Degree detection: the smallest `k` whose approximation number drops below
//! the calibrated threshold δ̂(n, d, k) at some tested scale.

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::cloud::PointCloud;
use crate::error::{check_dim, Error, Result};
use crate::poly::MultiPoly;
use crate::theta::{theta_bilateral, theta_upper_taylor, ThetaOptions};

/// Decade scales `1, 0.1, …, 1e-5`.
pub const DEFAULT_SCALES: [f64; 6] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    DerivativeTest,
    ThetaTest,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Certificate {
    pub criterion: Criterion,
    pub k: usize,
    pub r: f64,
    pub value: f64,
    pub threshold: f64,
}

/// One measured `Θ^{(k)}(x, r)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScaleRecord {
    pub k: usize,
    pub r: f64,
    pub theta: f64,
    pub sentinel: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecayCheck {
    pub r_coarse: f64,
    pub r_fine: f64,
    pub theta_coarse: f64,
    pub theta_fine: f64,
    /// `1.5 (r_fine / r_coarse)^{1/k} θ(r_coarse)`.
    pub bound: f64,
    /// Additive uncertainty of the measurements.
    pub floor: f64,
    pub passed: bool,
    /// Whether either value sits above the floor, so the check says something.
    pub informative: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StrataLabel {
    pub point: Vec<f64>,
    /// `None` when no `k <= k_max` certifies.
    pub k: Option<usize>,
    pub certificate: Option<Certificate>,
    /// The certifying value lies within 10% of its threshold.
    pub near_threshold: bool,
    /// The threshold was extrapolated from a smaller degree.
    pub extrapolated: bool,
    pub decay: Option<DecayCheck>,
    pub records: Vec<ScaleRecord>,
}

impl StrataLabel {
    pub fn is_resolved(&self) -> bool {
        self.k.is_some()
    }
}

/// What is being classified: an exact polynomial, or a cloud with the degree
/// bound `d` of the class it is compared against.
pub enum DetectInput<'a> {
    Poly(&'a MultiPoly),
    Cloud { cloud: &'a PointCloud, degree: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DetectOptions {
    /// Relative sampling pitch for polynomial input.
    pub h_rel: Option<f64>,
    pub theta: ThetaOptions,
    /// Cloud scales below this multiple of the cloud resolution are skipped.
    pub min_scale_resolutions: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            h_rel: None,
            theta: ThetaOptions::default(),
            min_scale_resolutions: 10.0,
        }
    }
}

fn measure(input: &DetectInput<'_>, x: &[f64], r: f64, k: usize, opts: &DetectOptions) -> Result<(f64, bool)> {
    match input {
        DetectInput::Poly(p) => {
            let h = opts.h_rel.unwrap_or_else(|| crate::theta::default_h_rel(p.n()));
            let t = theta_upper_taylor(p, x, r, k, h)?;
            Ok((t.theta, t.sentinel))
        }
        DetectInput::Cloud { cloud, .. } => {
            let rep = theta_bilateral(cloud, x, r, k, &opts.theta, None)?;
            Ok((rep.theta[0], false))
        }
    }
}

fn floor_of(input: &DetectInput<'_>, n: usize, r: f64, opts: &DetectOptions) -> f64 {
    match input {
        DetectInput::Poly(_) => 2.0 * opts.h_rel.unwrap_or_else(|| crate::theta::default_h_rel(n)),
        DetectInput::Cloud { cloud, .. } => 2.0 * cloud.resolution / r,
    }
}

/// Classify `x` by the smallest `k` with `Θ^{(k)}(x, r) < δ̂` at some tested
/// scale. For polynomial input Θ is the Taylor upper bound; for cloud input it
/// is the optimised bilateral value. Scales must be given in descending order.
pub fn detect_degree(
    input: DetectInput<'_>,
    x: &[f64],
    scales: &[f64],
    k_max: usize,
    calib: &Calibration,
    opts: &DetectOptions,
) -> Result<StrataLabel> {
    let (n, d) = match &input {
        DetectInput::Poly(p) => (p.n(), p.degree().max(0) as usize),
        DetectInput::Cloud { cloud, degree } => (cloud.n, *degree),
    };
    check_dim(n, x.len())?;
    if scales.is_empty() || scales.windows(2).any(|w| w[1] >= w[0]) || scales[scales.len() - 1] <= 0.0 {
        return Err(Error::Precondition(
            "scales must be positive and strictly descending".into(),
        ));
    }
    let scales: Vec<f64> = match &input {
        DetectInput::Cloud { cloud, .. } => scales
            .iter()
            .copied()
            .filter(|&r| r >= opts.min_scale_resolutions * cloud.resolution)
            .collect(),
        DetectInput::Poly(_) => scales.to_vec(),
    };
    let mut label = StrataLabel {
        point: x.to_vec(),
        k: None,
        certificate: None,
        near_threshold: false,
        extrapolated: false,
        decay: None,
        records: Vec::new(),
    };
    if scales.is_empty() {
        return Ok(label);
    }
    for k in 1..=k_max.min(d.max(1)) {
        let (delta, extrapolated) = calib.delta(n, d, k)?;
        let mut measured: Vec<(f64, f64)> = Vec::new();
        // Finest first: a certificate at any scale suffices, and the finest
        // two are needed for the decay check anyway.
        for &r in scales.iter().rev() {
            let (theta, sentinel) = measure(&input, x, r, k, opts)?;
            label.records.push(ScaleRecord { k, r, theta, sentinel });
            if sentinel {
                break;
            }
            measured.push((r, theta));
            if theta < delta {
                label.k = Some(k);
                label.certificate = Some(Certificate {
                    criterion: Criterion::ThetaTest,
                    k,
                    r,
                    value: theta,
                    threshold: delta,
                });
                label.near_threshold = theta >= 0.9 * delta;
                label.extrapolated = extrapolated;
                label.decay = Some(decay_check(
                    &input,
                    x,
                    &scales,
                    k,
                    &mut measured,
                    &mut label.records,
                    n,
                    opts,
                )?);
                return Ok(label);
            }
        }
    }
    Ok(label)
}

#[allow(clippy::too_many_arguments)]
fn decay_check(
    input: &DetectInput<'_>,
    x: &[f64],
    scales: &[f64],
    k: usize,
    measured: &mut Vec<(f64, f64)>,
    records: &mut Vec<ScaleRecord>,
    n: usize,
    opts: &DetectOptions,
) -> Result<DecayCheck> {
    let m = scales.len();
    let pick = |r: f64, measured: &mut Vec<(f64, f64)>, records: &mut Vec<ScaleRecord>| -> Result<f64> {
        if let Some(&(_, t)) = measured.iter().find(|(s, _)| *s == r) {
            return Ok(t);
        }
        let (t, sentinel) = measure(input, x, r, k, opts)?;
        records.push(ScaleRecord {
            k,
            r,
            theta: t,
            sentinel,
        });
        measured.push((r, t));
        Ok(t)
    };
    let (rc, rf) = if m >= 2 {
        (scales[m - 2], scales[m - 1])
    } else {
        (scales[0], scales[0])
    };
    let tc = pick(rc, measured, records)?;
    let tf = pick(rf, measured, records)?;
    let bound = 1.5 * (rf / rc).powf(1.0 / k as f64) * tc;
    let floor = floor_of(input, n, rf, opts);
    Ok(DecayCheck {
        r_coarse: rc,
        r_fine: rf,
        theta_coarse: tc,
        theta_fine: tf,
        bound,
        floor,
        passed: tf <= bound + floor,
        informative: tc > floor || tf > floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn calib() -> Calibration {
        let mut c = Calibration::uncalibrated();
        for e in &mut c.deltas {
            e.delta = 0.2;
        }
        c.version = c.content_version();
        c
    }

    #[test]
    fn cross_labels() {
        let p = catalog::cross(2);
        let c = calib();
        let o = DetectOptions::default();
        let l = detect_degree(DetectInput::Poly(&p), &[0.0, 0.0], &DEFAULT_SCALES, 2, &c, &o).unwrap();
        assert_eq!(l.k, Some(2));
        let l = detect_degree(DetectInput::Poly(&p), &[1.0, 0.0], &DEFAULT_SCALES, 2, &c, &o).unwrap();
        assert_eq!(l.k, Some(1));
        assert!(l.decay.unwrap().passed);
    }

    #[test]
    fn szulkin_labels() {
        let p = catalog::szulkin();
        let c = calib();
        let o = DetectOptions::default();
        let scales = [1.0, 0.1, 0.01];
        let l = detect_degree(DetectInput::Poly(&p), &[0.0; 3], &scales, 3, &c, &o).unwrap();
        assert_eq!(l.k, Some(3));
        // (t, 0, s) with t³ + s³ − 1.5 t² s = 0: take s = 1, solve for t.
        let t = 0.5f64;
        let mut s = 1.0;
        for _ in 0..60 {
            let f = t * t * t + s * s * s - 1.5 * t * t * s;
            let g = 3.0 * s * s - 1.5 * t * t;
            s -= f / g;
        }
        let x = [t * 0.5, 0.0, s * 0.5];
        assert!(p.eval_at(&x).abs() < 1e-12);
        let l = detect_degree(DetectInput::Poly(&p), &x, &scales, 3, &c, &o).unwrap();
        assert_eq!(l.k, Some(1));
    }

    #[test]
    fn bad_scales() {
        let p = catalog::cross(2);
        let c = calib();
        assert!(detect_degree(
            DetectInput::Poly(&p),
            &[0.0, 0.0],
            &[0.1, 1.0],
            2,
            &c,
            &DetectOptions::default()
        )
        .is_err());
    }
}
