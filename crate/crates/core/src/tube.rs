//! Monte Carlo tube volumes around the zero set and the singular set.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::sample_zero_set;
use crate::distance::Target;
use crate::error::{Error, Result};
use crate::harmonic::ball_volume;
use crate::poly::{MultiPoly, PolyWithGradient};
use crate::spatial::KdTree;
use crate::util::{dot, linear_fit, norm};

const TILE: usize = 1 << 15;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TubeMode {
    ZeroSet,
    SingularSet,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TubeOptions {
    pub samples: usize,
    pub seed: u64,
    /// Radius of the ball `B(0, R)` the tube is measured in.
    pub region_radius: f64,
    /// Sampling pitch for the set; defaults to half the smallest tube radius.
    pub h: Option<f64>,
    /// Band `|∇p| <= g0 h`, `|p| <= f0 h²` for singular-set seeds (p normalised).
    pub band_g0: f64,
    pub band_f0: f64,
}

impl Default for TubeOptions {
    fn default() -> Self {
        TubeOptions {
            samples: 1_000_000,
            seed: 0x70be_0001,
            region_radius: 0.5,
            h: None,
            band_g0: 1.0,
            band_f0: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TubeSample {
    pub r: f64,
    pub volume: f64,
    pub std_error: f64,
    pub hits: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TubeReport {
    pub mode: TubeMode,
    pub samples: Vec<TubeSample>,
    /// Log-log slope over radii with at least one hit.
    pub slope: Option<f64>,
    pub fit_residual: Option<f64>,
    /// Number of points representing the set.
    pub set_points: usize,
    pub h: f64,
}

/// Uniform point of the ball `B(0, radius)` in `R^n`.
fn ball_point<R: Rng>(rng: &mut R, n: usize, radius: f64, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let l = norm(out);
        if l > 0.0 {
            let u: f64 = rng.gen();
            let s = radius * u.powf(1.0 / n as f64) / l;
            for v in out.iter_mut() {
                *v *= s;
            }
            return;
        }
    }
}

/// Monte Carlo hit counts per radius; `dist` maps a point to its distance to
/// the set (any value above `r_max` may be returned once known to exceed it).
fn mc_hits<F: Fn(&[f64]) -> f64 + Sync>(n: usize, radii: &[f64], opts: &TubeOptions, dist: F) -> Vec<usize> {
    let tiles = opts.samples.div_ceil(TILE);
    let per_tile: Vec<Vec<usize>> = (0..tiles)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(t as u64);
            let count = TILE.min(opts.samples - t * TILE);
            let mut hits = vec![0; radii.len()];
            let mut z = vec![0.0; n];
            for _ in 0..count {
                ball_point(&mut rng, n, opts.region_radius, &mut z);
                let d = dist(&z);
                for (h, &r) in hits.iter_mut().zip(radii) {
                    if d <= r {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .collect();
    let mut total = vec![0; radii.len()];
    for h in per_tile {
        for (a, b) in total.iter_mut().zip(h) {
            *a += b;
        }
    }
    total
}

/// Points of the singular set `{p = 0, ∇p = 0}` near `B(0, radius)`: grid
/// seeds of pitch `h` inside the band, refined by Gauss–Newton on `(p, ∇p)`.
pub fn singular_points(p: &MultiPoly, radius: f64, h: f64, g0: f64, f0: f64) -> Result<Vec<f64>> {
    let n = p.n();
    if p.degree() < 2 {
        return Err(Error::Precondition("singular set needs degree >= 2".into()));
    }
    let q = p.normalized();
    let f = PolyWithGradient::new(&q);
    let hess: Vec<Vec<crate::poly::CompiledPoly>> = (0..n)
        .map(|i| {
            let gi = q.partial(i);
            (0..n).map(|j| crate::poly::CompiledPoly::new(&gi.partial(j))).collect()
        })
        .collect();
    let m = (radius / h).ceil() as i64;
    let side = (2 * m + 1) as usize;
    let total = side.pow(n as u32);
    let found: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut x = vec![0.0; n];
            let mut r = idx;
            for v in x.iter_mut() {
                *v = ((r % side) as i64 - m) as f64 * h;
                r /= side;
            }
            if norm(&x) > radius + h {
                return None;
            }
            let mut g = vec![0.0; n];
            f.gradient_into(&x, &mut g);
            if norm(&g) > g0 * h || f.eval(&x).abs() > f0 * h * h {
                return None;
            }
            gauss_newton(&f, &hess, x)
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let cell = h / 4.0;
    for x in found {
        if norm(&x) > radius + h {
            continue;
        }
        let key: Vec<i64> = x.iter().map(|v| (v / cell).round() as i64).collect();
        if seen.insert(key) {
            out.extend(x);
        }
    }
    Ok(out)
}

fn gauss_newton(f: &PolyWithGradient, hess: &[Vec<crate::poly::CompiledPoly>], mut x: Vec<f64>) -> Option<Vec<f64>> {
    let n = x.len();
    let mut g = vec![0.0; n];
    for _ in 0..80 {
        let v = f.eval(&x);
        f.gradient_into(&x, &mut g);
        let res = (v * v + dot(&g, &g)).sqrt();
        if res <= 1e-13 {
            return Some(x);
        }
        let mut j = DMatrix::zeros(n + 1, n);
        let mut rhs = DVector::zeros(n + 1);
        rhs[0] = -v;
        for i in 0..n {
            j[(0, i)] = g[i];
            rhs[i + 1] = -g[i];
            for k in 0..n {
                j[(i + 1, k)] = hess[i][k].eval(&x);
            }
        }
        let step = j.svd(true, true).solve(&rhs, 1e-12).ok()?;
        if step.norm() <= 1e-15 {
            break;
        }
        for i in 0..n {
            x[i] += step[i];
        }
    }
    let v = f.eval(&x);
    f.gradient_into(&x, &mut g);
    if v.abs() <= 1e-10 && norm(&g) <= 1e-7 {
        Some(x)
    } else {
        None
    }
}

/// Monte Carlo volume of `{y ∈ B(0, R) : dist(y, S) <= r}` for each `r`, where
/// `S` is the zero set or the singular set of `p`.
pub fn tube_volume(p: &MultiPoly, radii: &[f64], mode: TubeMode, opts: &TubeOptions) -> Result<TubeReport> {
    let n = p.n();
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Precondition("tube radii must be positive".into()));
    }
    if opts.samples == 0 {
        return Err(Error::Precondition("need at least one Monte Carlo sample".into()));
    }
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let h = opts.h.unwrap_or(r_min / 2.0);
    let reach = opts.region_radius + r_max + 2.0 * h;
    let (hits, set_points) = match mode {
        TubeMode::ZeroSet => {
            let cloud = sample_zero_set(p, &vec![0.0; n], reach, h)?;
            let size = cloud.len();
            let target = Target::with_poly(n, cloud.points, p);
            // Sample distances overestimate by at most about `h`; refine only
            // where that can change a hit.
            let hits = mc_hits(n, radii, opts, |z| {
                let Some(d) = target.coarse_dist_within(z, r_max + 2.0 * h) else {
                    return f64::INFINITY;
                };
                if radii.iter().any(|&r| d > r && d <= r + 2.0 * h) {
                    target.dist(z)
                } else {
                    d
                }
            });
            (hits, size)
        }
        TubeMode::SingularSet => {
            if p.degree() < 2 {
                return Err(Error::Precondition("singular-set mode needs degree >= 2".into()));
            }
            let pts = singular_points(p, reach, h, opts.band_g0, opts.band_f0)?;
            let size = pts.len() / n;
            if size == 0 {
                (vec![0; radii.len()], 0)
            } else {
                let tree = KdTree::new(n, &pts);
                (
                    mc_hits(n, radii, opts, |z| {
                        tree.nearest_within(z, r_max).map_or(f64::INFINITY, |(_, d2)| d2.sqrt())
                    }),
                    size,
                )
            }
        }
    };
    let vol = ball_volume(n, opts.region_radius);
    let total = opts.samples as f64;
    let samples: Vec<TubeSample> = radii
        .iter()
        .zip(&hits)
        .map(|(&r, &k)| {
            let f = k as f64 / total;
            TubeSample {
                r,
                volume: vol * f,
                std_error: vol * (f * (1.0 - f) / total).sqrt(),
                hits: k,
            }
        })
        .collect();
    let used: Vec<&TubeSample> = samples.iter().filter(|s| s.hits > 0).collect();
    let (slope, fit_residual) = if used.len() >= 2 {
        let xs: Vec<f64> = used.iter().map(|s| s.r.ln()).collect();
        let ys: Vec<f64> = used.iter().map(|s| s.volume.ln()).collect();
        let (s, _, res) = linear_fit(&xs, &ys);
        (Some(s), Some(res))
    } else {
        (None, None)
    };
    Ok(TubeReport {
        mode,
        samples,
        slope,
        fit_residual,
        set_points,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn opts(samples: usize) -> TubeOptions {
        TubeOptions {
            samples,
            ..TubeOptions::default()
        }
    }

    #[test]
    fn slab() {
        let p = MultiPoly::var(3, 0);
        let rep = tube_volume(&p, &[0.02, 0.05, 0.1], TubeMode::ZeroSet, &opts(200_000)).unwrap();
        assert!((rep.slope.unwrap() - 1.0).abs() < 0.05, "{rep:?}");
        // Slab of half-width r inside B(0, 1/2): π (R² r − r³/3) · 2.
        let r: f64 = 0.05;
        let exact = 2.0 * std::f64::consts::PI * (0.25 * r - r.powi(3) / 3.0);
        let s = &rep.samples[1];
        assert!(
            (s.volume - exact).abs() < 4.0 * s.std_error + 1e-4,
            "{} vs {exact}",
            s.volume
        );
    }

    #[test]
    fn axis_tube() {
        let p = catalog::cross(3);
        let pts = singular_points(&p, 0.6, 0.02, 1.0, 0.5).unwrap();
        assert!(pts.chunks(3).all(|q| q[0].abs() < 1e-6 && q[1].abs() < 1e-6));
        assert!(pts.len() / 3 >= 50);
        let rep = tube_volume(&p, &[0.05, 0.1, 0.2], TubeMode::SingularSet, &opts(200_000)).unwrap();
        assert!((rep.slope.unwrap() - 2.0).abs() < 0.15, "{rep:?}");
    }

    #[test]
    fn regular_set_has_no_singular_tube() {
        let p = MultiPoly::from_terms(2, vec![(vec![1, 0], 1.0), (vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        let rep = tube_volume(&p, &[0.1, 0.2], TubeMode::SingularSet, &opts(1000)).unwrap();
        assert_eq!(rep.set_points, 0);
        assert!(rep.samples.iter().all(|s| s.volume == 0.0));
        assert!(rep.slope.is_none());
    }

    #[test]
    fn deterministic() {
        let p = catalog::re_zk(3);
        let a = tube_volume(&p, &[0.05, 0.1], TubeMode::ZeroSet, &opts(50_000)).unwrap();
        let b = tube_volume(&p, &[0.05, 0.1], TubeMode::ZeroSet, &opts(50_000)).unwrap();
        assert_eq!(a, b);
    }
}
