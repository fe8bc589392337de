//! Stratification of a sampled zero set by vanishing order.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::cloud::{sample_zero_set, PointCloud};
use crate::detect::{detect_degree, DetectInput, DetectOptions, StrataLabel};
use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiPoly, VANISHING_TOL};
use crate::spatial::KdTree;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StratumPoint {
    pub point: Vec<f64>,
    /// Order at the working resolution `h` (see [`order_at_resolution`]).
    pub k: usize,
    /// Exact vanishing order, when the point is on the set to working precision.
    pub k_exact: Option<usize>,
    /// Cross-label from `detect_degree`, present for the checked subsample.
    pub detected: Option<StrataLabel>,
    pub agrees: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Stratification {
    pub n: usize,
    pub degree: usize,
    pub h: f64,
    pub points: Vec<StratumPoint>,
}

impl Stratification {
    /// Cloud of points carrying label `k`.
    pub fn stratum(&self, k: usize) -> PointCloud {
        let pts: Vec<f64> = self
            .points
            .iter()
            .filter(|s| s.k == k)
            .flat_map(|s| s.point.iter().copied())
            .collect();
        PointCloud::new(self.n, pts, vec![0.0; self.n], 0.0, self.h)
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.degree + 1];
        for s in &self.points {
            if s.k < c.len() {
                c[s.k] += 1;
            }
        }
        c
    }

    pub fn all_points(&self) -> PointCloud {
        let pts = self.points.iter().flat_map(|s| s.point.iter().copied()).collect();
        PointCloud::new(self.n, pts, vec![0.0; self.n], 0.0, self.h)
    }
}

#[derive(Clone, Debug)]
pub struct StratifyOptions<'a> {
    /// Cross-label at most this many points (evenly strided) with `detect_degree`.
    pub cross_check: usize,
    pub scales: Vec<f64>,
    pub calibration: Option<&'a Calibration>,
    pub detect: DetectOptions,
}

impl Default for StratifyOptions<'_> {
    fn default() -> Self {
        StratifyOptions {
            cross_check: 0,
            scales: crate::detect::DEFAULT_SCALES.to_vec(),
            calibration: None,
            detect: DetectOptions::default(),
        }
    }
}

/// Vanishing order seen at length scale `h`: the smallest `j >= 1` whose
/// Taylor part at `x`, measured at radius `h`, is at least as large as every
/// higher part. Points within about `h` of a singular point get order >= 2.
pub fn order_at_resolution(p: &MultiPoly, x: &[f64], h: f64) -> Result<usize> {
    check_dim(p.n(), x.len())?;
    let parts = p.taylor_shift(x)?;
    let sizes: Vec<f64> = parts
        .parts
        .iter()
        .enumerate()
        .map(|(j, q)| q.height() * h.powi(j as i32))
        .collect();
    let d = sizes.len() - 1;
    if d == 0 {
        return Err(Error::Precondition("constant polynomial".into()));
    }
    for j in 1..=d {
        if sizes[j] > 0.0 && sizes[j + 1..].iter().all(|&s| sizes[j] >= s) {
            return Ok(j);
        }
    }
    Ok(d)
}

/// Sample `Σ_p ∩ B(center, radius)` at pitch `h` and label every point.
pub fn stratify(
    p: &MultiPoly,
    center: &[f64],
    radius: f64,
    h: f64,
    opts: &StratifyOptions<'_>,
) -> Result<Stratification> {
    let n = p.n();
    check_dim(n, center.len())?;
    if p.degree() < 1 {
        return Err(Error::Precondition("stratify needs a nonconstant polynomial".into()));
    }
    let cloud = sample_zero_set(p, center, radius, h)?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut seen = HashSet::new();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for q in cloud.iter() {
        let key: Vec<u64> = q.iter().map(|v| (v + 0.0).to_bits()).collect();
        if seen.insert(key) {
            pts.push(q.to_vec());
        }
    }
    let stride = if opts.cross_check == 0 {
        usize::MAX
    } else {
        pts.len().div_ceil(opts.cross_check).max(1)
    };
    let mut out = Vec::with_capacity(pts.len());
    for (i, x) in pts.into_iter().enumerate() {
        let k = order_at_resolution(p, &x, h)?;
        let k_exact = p.vanishing_order(&x, VANISHING_TOL).ok();
        let mut detected = None;
        let mut agrees = None;
        if i % stride == 0 {
            if let Some(calib) = opts.calibration {
                let l = detect_degree(
                    DetectInput::Poly(p),
                    &x,
                    &opts.scales,
                    p.degree() as usize,
                    calib,
                    &opts.detect,
                )?;
                agrees = l.k.map(|kd| Some(kd) == k_exact.or(Some(k)));
                detected = Some(l);
            }
        }
        out.push(StratumPoint {
            point: x,
            k,
            k_exact,
            detected,
            agrees,
        });
    }
    Ok(Stratification {
        n,
        degree: p.degree() as usize,
        h,
        points: out,
    })
}

/// Indices of points labeled 1 whose every neighbour within `2h` carries a
/// label >= 2 (isolated regular points).
pub fn openness_violations(s: &Stratification) -> Vec<usize> {
    let flat = s.all_points().points;
    if flat.is_empty() {
        return Vec::new();
    }
    let tree = KdTree::new(s.n, &flat);
    let mut bad = Vec::new();
    for (i, sp) in s.points.iter().enumerate() {
        if sp.k != 1 {
            continue;
        }
        let nb = tree.within(&sp.point, 2.0 * s.h);
        let others: Vec<usize> = nb.into_iter().filter(|&j| j != i).collect();
        if !others.is_empty() && others.iter().all(|&j| s.points[j].k >= 2) {
            bad.push(i);
        }
    }
    bad
}

/// Largest distance from a point labeled >= 2 to the nearest point labeled 1.
pub fn regular_density_gap(s: &Stratification) -> Option<f64> {
    let a1 = s.stratum(1);
    if a1.is_empty() {
        return None;
    }
    let tree = KdTree::new(s.n, &a1.points);
    s.points
        .iter()
        .filter(|sp| sp.k >= 2)
        .map(|sp| {
            tree.nearest(&sp.point)
                .map(|(_, d2)| d2.sqrt())
                .unwrap_or(f64::INFINITY)
        })
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
}
