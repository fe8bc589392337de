//! Bilateral approximation numbers by zero sets of harmonic polynomials of
//! degree at most `k` (zero constant term).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{sample_zero_set, PointCloud};
use crate::distance::{excess, restrict, walkup_wets_targets, Target};
use crate::error::{check_dim, Error, Result};
use crate::harmonic::MixedSpan;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::poly::{MultiPoly, VANISHING_TOL};
use crate::util::norm;

/// Default relative sampling pitch of Θ measurements by dimension.
pub fn default_h_rel(n: usize) -> f64 {
    match n {
        0..=2 => 0.01,
        3 => 0.02,
        _ => 0.05,
    }
}

/// Coarser pitch used inside the optimizer loop.
pub fn default_opt_h_rel(n: usize) -> f64 {
    match n {
        0..=2 => 0.02,
        3 => 0.05,
        _ => 0.1,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ThetaOptions {
    /// Relative pitch of the final measurement; per-dimension default when `None`.
    pub h_rel: Option<f64>,
    pub opt_h_rel: Option<f64>,
    /// Targets are sampled on `B(x, (1 + margin) r)`.
    pub margin: f64,
    /// Restart count; `8·k·dim` capped at `max_restarts` when `None`.
    pub restarts: Option<usize>,
    pub max_restarts: usize,
    pub max_evals: usize,
    /// Source points used inside the optimizer loop.
    pub max_source: usize,
    pub seed: u64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            h_rel: None,
            opt_h_rel: None,
            margin: 0.25,
            restarts: None,
            max_restarts: 12,
            max_evals: 300,
            max_source: 1500,
            seed: crate::supnorm::DEFAULT_SEED,
        }
    }
}

impl ThetaOptions {
    pub fn h(&self, n: usize) -> f64 {
        self.h_rel.unwrap_or_else(|| default_h_rel(n))
    }

    pub fn opt_h(&self, n: usize) -> f64 {
        self.opt_h_rel.unwrap_or_else(|| default_opt_h_rel(n))
    }
}

/// Upper bound on `Θ^{(k)}_{Σ_p}(x, r)` from the low-order Taylor part.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TaylorTheta {
    pub k: usize,
    pub r: f64,
    pub theta: f64,
    /// Set when the low-order part vanishes and no bound is available.
    pub sentinel: bool,
    /// `p̃ = p_1 + … + p_k` in coordinates centred at `x` (absent for the sentinel).
    pub approximant: Option<MultiPoly>,
    pub resolution: f64,
}

fn check_on_set(p: &MultiPoly, x: &[f64]) -> Result<()> {
    let v = p.eval(x)?;
    let tol = 1e-6 * p.height() * norm(x).max(1.0).powi(p.degree().max(0));
    if v.abs() > tol {
        return Err(Error::NotOnZeroSet { value: v, tol });
    }
    Ok(())
}

fn sampled_target(q: &MultiPoly, radius: f64, h: f64) -> Result<Target> {
    let n = q.n();
    let c = sample_zero_set(q, &vec![0.0; n], radius, h)?;
    Ok(Target::with_poly(n, c.points, q))
}

/// Walkup–Wets distance in `B(x, r)` between `Σ_p` and `x + Σ_{p̃}`, where
/// `p̃ = p_1^{(x)} + … + p_k^{(x)}`; both sets are sampled at relative pitch
/// `h_rel` and distances refined against the exact polynomials.
pub fn theta_upper_taylor(p: &MultiPoly, x: &[f64], r: f64, k: usize, h_rel: f64) -> Result<TaylorTheta> {
    check_dim(p.n(), x.len())?;
    if r <= 0.0 || k == 0 {
        return Err(Error::Precondition(format!("need r > 0 and k >= 1, got r={r}, k={k}")));
    }
    check_on_set(p, x)?;
    let parts = p.taylor_shift(x)?;
    let low = parts.sum_range(1, k);
    if low.height() <= VANISHING_TOL * p.height() {
        return Ok(TaylorTheta {
            k,
            r,
            theta: 1.0,
            sentinel: true,
            approximant: None,
            resolution: h_rel * r,
        });
    }
    // x is on Σ_p up to rounding, so the constant part is dropped.
    let full = parts.sum_range(1, parts.parts.len());
    let pr = full.dilate(r).normalized();
    let qr = low.dilate(r).normalized();
    let margin = 1.25;
    let a = sampled_target(&pr, margin, h_rel)?;
    let b = sampled_target(&qr, margin, h_rel)?;
    let origin = vec![0.0; p.n()];
    let theta = match walkup_wets_targets(&a, &b, &origin, 1.0) {
        Ok(v) => v.min(1.0),
        Err(Error::UndefinedDistance) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(TaylorTheta {
        k,
        r,
        theta,
        sentinel: false,
        approximant: Some(low),
        resolution: h_rel * r,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OptimizerDiagnostics {
    pub restarts: usize,
    pub evaluations: usize,
    pub iterations: usize,
    /// Best objective seen inside the optimizer at the coarse pitch.
    pub objective: f64,
    pub seeded: bool,
}

/// Per-scale Θ values with the best approximants found.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ThetaReport {
    pub k: usize,
    pub x: Vec<f64>,
    pub scales: Vec<f64>,
    pub theta: Vec<f64>,
    /// Unit coefficient vectors in the harmonic span of degrees `1..=k`.
    pub approximants: Vec<Vec<f64>>,
    pub diagnostics: Vec<OptimizerDiagnostics>,
}

fn canonical(c: &[f64]) -> Vec<f64> {
    let nrm = norm(c);
    let mut v: Vec<f64> = c.iter().map(|t| t / nrm).collect();
    if let Some(first) = v.iter().find(|t| t.abs() > 1e-12).copied() {
        if first < 0.0 {
            v.iter_mut().for_each(|t| *t = -*t);
        }
    }
    v
}

struct Problem<'a> {
    span: &'a MixedSpan,
    source: Vec<f64>,
    a_target: &'a Target,
    margin: f64,
}

impl Problem<'_> {
    fn value(&self, c: &[f64], h: f64) -> f64 {
        let n = self.span.n;
        let nrm = norm(c);
        if !(nrm > 0.0) {
            return 2.0;
        }
        let unit: Vec<f64> = c.iter().map(|t| t / nrm).collect();
        let q = self.span.combine(&unit);
        if q.is_zero() {
            return 2.0;
        }
        let Ok(t) = sampled_target(&q, 1.0 + self.margin, h) else {
            return 2.0;
        };
        if t.is_empty() {
            return 2.0;
        }
        let e1 = excess(n, &self.source, &t).unwrap_or(2.0);
        let qin = restrict(n, t.points(), &vec![0.0; n], 1.0);
        let e2 = excess(n, &qin, self.a_target).unwrap_or(2.0);
        e1.max(e2)
    }
}

fn stride_subsample(n: usize, pts: &[f64], max: usize) -> Vec<f64> {
    let count = pts.len() / n;
    if count <= max {
        return pts.to_vec();
    }
    let mut out = Vec::with_capacity(max * n);
    for j in 0..max {
        let i = j * count / max;
        out.extend_from_slice(&pts[i * n..(i + 1) * n]);
    }
    out
}

/// Θ of the cloud `A` at `(x, r)` against zero sets of the degree-`1..=k`
/// harmonic span, minimised by multi-start Nelder–Mead. `seed_poly`, a
/// polynomial in coordinates centred at `x` and unscaled, seeds half the
/// restarts. The result is an upper bound on the true infimum.
pub fn theta_bilateral(
    a: &PointCloud,
    x: &[f64],
    r: f64,
    k: usize,
    opts: &ThetaOptions,
    seed_poly: Option<&MultiPoly>,
) -> Result<ThetaReport> {
    let n = a.n;
    check_dim(n, x.len())?;
    if r <= 0.0 || k == 0 {
        return Err(Error::Precondition(format!("need r > 0 and k >= 1, got r={r}, k={k}")));
    }
    let local = |pts: Vec<f64>| -> Vec<f64> { pts.iter().enumerate().map(|(i, v)| (v - x[i % n]) / r).collect() };
    let source = local(a.in_ball(x, r));
    if source.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let a_target = Target::from_points(n, local(a.in_ball(x, (1.0 + opts.margin) * r)));
    let span = MixedSpan::new(n, k as u32)?;
    let dim = span.dim();
    let problem = Problem {
        span: &span,
        source: stride_subsample(n, &source, opts.max_source),
        a_target: &a_target,
        margin: opts.margin,
    };
    let seed_coords = seed_poly.and_then(|q| {
        let c = span.coordinates(&q.dilate(r));
        (norm(&c) > 0.0).then(|| canonical(&c))
    });
    let restarts = opts.restarts.unwrap_or((8 * k * dim).min(opts.max_restarts)).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64).wrapping_mul(0x9e37_79b9));
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(restarts);
    for i in 0..restarts {
        let seeded = seed_coords.is_some() && i % 2 == 0;
        let v: Vec<f64> = if seeded {
            let s = seed_coords.as_ref().unwrap();
            let noise = if i == 0 { 0.0 } else { 0.15 };
            s.iter()
                .map(|t| t + noise * Distribution::<f64>::sample(&StandardNormal, &mut rng) / (dim as f64).sqrt())
                .collect()
        } else {
            (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        starts.push(canonical(&v));
    }
    let nm = NelderMeadOptions {
        max_evals: opts.max_evals,
        f_tol: 1e-4,
        x_tol: 1e-4,
        initial_step: 0.25,
    };
    let opt_h = opts.opt_h(n);
    let mut results: Vec<(f64, Vec<f64>, usize, usize)> = starts
        .iter()
        .map(|s| {
            let res = nelder_mead(|c| problem.value(c, opt_h), s, &nm);
            (res.value, canonical(&res.x), res.evals, res.iterations)
        })
        .collect();
    let evaluations: usize = results.iter().map(|r| r.2).sum();
    let iterations: usize = results.iter().map(|r| r.3).sum();
    results.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coarse_best = results[0].0;
    // Re-measure the leading candidates (and the seed) at the fine pitch on
    // the full source set.
    let fine = Problem { source, ..problem };
    let h = opts.h(n);
    let mut candidates: Vec<Vec<f64>> = results.iter().take(3).map(|r| r.1.clone()).collect();
    if let Some(s) = &seed_coords {
        candidates.push(s.clone());
    }
    let mut best = (f64::INFINITY, candidates[0].clone());
    for c in candidates {
        let v = fine.value(&c, h);
        if v < best.0 {
            best = (v, c);
        }
    }
    Ok(ThetaReport {
        k,
        x: x.to_vec(),
        scales: vec![r],
        theta: vec![best.0.min(1.0)],
        approximants: vec![best.1],
        diagnostics: vec![OptimizerDiagnostics {
            restarts,
            evaluations,
            iterations,
            objective: coarse_best,
            seeded: seed_coords.is_some(),
        }],
    })
}

/// [`theta_bilateral`] at several scales, merged into one report.
pub fn theta_bilateral_scales(
    a: &PointCloud,
    x: &[f64],
    scales: &[f64],
    k: usize,
    opts: &ThetaOptions,
    seed_poly: Option<&MultiPoly>,
) -> Result<ThetaReport> {
    let mut out = ThetaReport {
        k,
        x: x.to_vec(),
        scales: Vec::new(),
        theta: Vec::new(),
        approximants: Vec::new(),
        diagnostics: Vec::new(),
    };
    for &r in scales {
        let rep = theta_bilateral(a, x, r, k, opts, seed_poly)?;
        out.scales.extend(rep.scales);
        out.theta.extend(rep.theta);
        out.approximants.extend(rep.approximants);
        out.diagnostics.extend(rep.diagnostics);
    }
    Ok(out)
}
