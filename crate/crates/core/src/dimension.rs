//! Intrinsic covering numbers and Minkowski-dimension fits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::util::{dist2, linear_fit};

/// Residual above which the coarsest scale is dropped from the fit.
pub const BENDING_RESIDUAL: f64 = 0.05;

/// Greedy intrinsic covering: scan the points in order and open a new center
/// at each point farther than `s` from every existing center.
pub fn covering_number(a: &PointCloud, s: f64) -> Result<usize> {
    if a.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("covering scale must be positive, got {s}")));
    }
    let n = a.n;
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut centers: Vec<&[f64]> = Vec::new();
    let offsets = neighbour_offsets(n);
    let s2 = s * s;
    let mut key = vec![0i64; n];
    for q in a.iter() {
        for (k, v) in key.iter_mut().zip(q) {
            *k = (v / s).floor() as i64;
        }
        let covered = offsets.iter().any(|off| {
            let nk: Vec<i64> = key.iter().zip(off).map(|(a, b)| a + b).collect();
            cells
                .get(&nk)
                .is_some_and(|ids| ids.iter().any(|&c| dist2(centers[c], q) <= s2))
        });
        if !covered {
            cells.entry(key.clone()).or_default().push(centers.len());
            centers.push(q);
        }
    }
    Ok(centers.len())
}

fn neighbour_offsets(n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MdimFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the final fit in log space.
    pub residual: f64,
    /// All requested scales with their covering numbers.
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Number of coarse scales dropped before the final fit.
    pub dropped: usize,
}

/// Slope of `log N(s)` against `log(1/s)`. While the fit residual exceeds
/// [`BENDING_RESIDUAL`] and more than three scales remain, the coarsest scale
/// is dropped.
pub fn mdim_estimate(a: &PointCloud, scales: &[f64]) -> Result<MdimFit> {
    if scales.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 scales, got {}",
            scales.len()
        )));
    }
    let mut s: Vec<f64> = scales.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    if s[s.len() - 1] <= 0.0 {
        return Err(Error::Precondition("scales must be positive".into()));
    }
    if s[0] / s[s.len() - 1] < 10.0 * (1.0 - 1e-9) {
        return Err(Error::Precondition("scales must span at least one decade".into()));
    }
    let counts: Vec<usize> = s.iter().map(|&v| covering_number(a, v)).collect::<Result<_>>()?;
    let xs: Vec<f64> = s.iter().map(|v| -v.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let mut start = 0;
    loop {
        let (slope, intercept, residual) = linear_fit(&xs[start..], &ys[start..]);
        if residual > BENDING_RESIDUAL && s.len() - start > 3 {
            start += 1;
            continue;
        }
        return Ok(MdimFit {
            slope,
            intercept,
            residual,
            scales: s,
            counts,
            dropped: start,
        });
    }
}
