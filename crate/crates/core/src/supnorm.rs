//! Sampled sup-norms on balls and spheres.
//!
//! Values are maxima over a randomly shifted Halton sample followed by a short
//! projected-ascent polish, so they are certified lower bounds on the true sup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{MultiPoly, PolyWithGradient};

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub const DEFAULT_SEED: u64 = 0x5eed_2015;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SupOptions {
    /// Sample count is `samples_per_dim * n`.
    pub samples_per_dim: usize,
    pub polish_steps: usize,
    pub polish_starts: usize,
    pub seed: u64,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            samples_per_dim: 4096,
            polish_steps: 20,
            polish_starts: 8,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Typical gap between sample points.
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupKind {
    Abs,
    Positive,
    Negative,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// `count` points of the unit ball in `R^n`, from a Halton sequence with a
/// seeded Cranley–Patterson rotation and rejection.
pub fn ball_sample(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i: u64 = 1;
    while out.len() < count {
        let p: Vec<f64> = (0..n)
            .map(|d| {
                let u = (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                2.0 * u - 1.0
            })
            .collect();
        i += 1;
        if p.iter().map(|t| t * t).sum::<f64>() <= 1.0 {
            out.push(p);
        }
    }
    out
}

/// `count` points of the unit sphere `S^{n-1}` (radial projection of a ball sample).
pub fn sphere_sample(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut batch = 0u64;
    while out.len() < count {
        for p in ball_sample(n, count, seed.wrapping_add(batch)) {
            let r = p.iter().map(|t| t * t).sum::<f64>().sqrt();
            if r > 1e-3 {
                out.push(p.iter().map(|t| t / r).collect());
                if out.len() == count {
                    break;
                }
            }
        }
        batch += 1;
    }
    out
}

fn objective(kind: SupKind, v: f64) -> f64 {
    match kind {
        SupKind::Abs => v.abs(),
        SupKind::Positive => v.max(0.0),
        SupKind::Negative => (-v).max(0.0),
    }
}

enum Domain<'a> {
    Ball { center: &'a [f64], radius: f64 },
    Sphere { radius: f64 },
}

impl Domain<'_> {
    fn project(&self, y: &mut [f64]) {
        match self {
            Domain::Ball { center, radius } => {
                let d: f64 = y
                    .iter()
                    .zip(center.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d > *radius {
                    for (yi, ci) in y.iter_mut().zip(center.iter()) {
                        *yi = ci + (*yi - ci) * radius / d;
                    }
                }
            }
            Domain::Sphere { radius } => {
                let d: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
                if d > 0.0 {
                    for yi in y.iter_mut() {
                        *yi *= radius / d;
                    }
                }
            }
        }
    }
}

fn sup_generic(
    p: &MultiPoly,
    domain: Domain<'_>,
    samples: Vec<Vec<f64>>,
    kind: SupKind,
    opts: &SupOptions,
    scale: f64,
) -> SupEstimate {
    let n = p.n();
    if p.is_zero() {
        return SupEstimate {
            value: 0.0,
            argmax: samples.into_iter().next().unwrap_or_else(|| vec![0.0; n]),
            resolution: 0.0,
        };
    }
    let f = PolyWithGradient::new(p);
    let count = samples.len().max(1);
    let mut scored: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, y)| (objective(kind, f.eval(y)), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let resolution = scale * (count as f64).powf(-1.0 / n as f64);
    let mut best = scored[0].0;
    let mut best_x = samples[scored[0].1].clone();
    let mut g = vec![0.0; n];
    for &(v0, idx) in scored.iter().take(opts.polish_starts.max(1)) {
        let mut x = samples[idx].clone();
        let mut val = v0;
        let mut step = resolution;
        for _ in 0..opts.polish_steps {
            let pv = f.eval(&x);
            f.gradient_into(&x, &mut g);
            let dir = match kind {
                SupKind::Abs => pv.signum(),
                SupKind::Positive => 1.0,
                SupKind::Negative => -1.0,
            };
            let gn = g.iter().map(|t| t * t).sum::<f64>().sqrt();
            if gn == 0.0 || dir == 0.0 {
                break;
            }
            let mut improved = false;
            while step > resolution * 1e-6 {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + dir * step * gi / gn).collect();
                domain.project(&mut y);
                let vy = objective(kind, f.eval(&y));
                if vy > val {
                    x = y;
                    val = vy;
                    improved = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if val > best {
            best = val;
            best_x = x;
        }
    }
    SupEstimate {
        value: best,
        argmax: best_x,
        resolution,
    }
}

/// Sampled `sup_{B(x0,r)} |p|` (or `p⁺`, `p⁻` by `kind`).
pub fn sup_ball_kind(p: &MultiPoly, x0: &[f64], r: f64, kind: SupKind, opts: &SupOptions) -> SupEstimate {
    let n = p.n();
    let samples: Vec<Vec<f64>> = ball_sample(n, opts.samples_per_dim * n, opts.seed)
        .into_iter()
        .map(|u| u.iter().zip(x0).map(|(ui, ci)| ci + r * ui).collect())
        .collect();
    sup_generic(p, Domain::Ball { center: x0, radius: r }, samples, kind, opts, r)
}

pub fn sup_ball(p: &MultiPoly, x0: &[f64], r: f64, opts: &SupOptions) -> SupEstimate {
    sup_ball_kind(p, x0, r, SupKind::Abs, opts)
}

pub fn sup_pos(p: &MultiPoly, x0: &[f64], r: f64, opts: &SupOptions) -> SupEstimate {
    sup_ball_kind(p, x0, r, SupKind::Positive, opts)
}

pub fn sup_neg(p: &MultiPoly, x0: &[f64], r: f64, opts: &SupOptions) -> SupEstimate {
    sup_ball_kind(p, x0, r, SupKind::Negative, opts)
}

/// Sampled `sup_{∂B(0,r)} |p|`.
pub fn sup_sphere(p: &MultiPoly, r: f64, opts: &SupOptions) -> SupEstimate {
    let n = p.n();
    let samples: Vec<Vec<f64>> = sphere_sample(n, opts.samples_per_dim * n, opts.seed)
        .into_iter()
        .map(|u| u.iter().map(|t| t * r).collect())
        .collect();
    sup_generic(p, Domain::Sphere { radius: r }, samples, SupKind::Abs, opts, r)
}
