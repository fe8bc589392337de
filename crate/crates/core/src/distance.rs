//! Excess and relative Walkup–Wets distances between sampled sets.

use crate::cloud::PointCloud;
use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiPoly, PolyWithGradient};
use crate::spatial::KdTree;
use crate::util::{dist, dot};

/// A set to measure distances to: a sample, optionally backed by the exact
/// polynomial whose zero set it samples. With a polynomial, distances are
/// refined by foot-point iteration from the nearest sample.
pub struct Target {
    n: usize,
    points: Vec<f64>,
    tree: KdTree,
    poly: Option<(PolyWithGradient, f64)>,
}

impl Target {
    pub fn from_points(n: usize, points: Vec<f64>) -> Self {
        let tree = KdTree::new(n, &points);
        Target {
            n,
            points,
            tree,
            poly: None,
        }
    }

    pub fn from_cloud(c: &PointCloud) -> Self {
        Self::from_points(c.n, c.points.clone())
    }

    /// Zero set of `p` sampled by `points`; `p` must vanish on the samples.
    pub fn with_poly(n: usize, points: Vec<f64>, p: &MultiPoly) -> Self {
        let mut t = Self::from_points(n, points);
        let h = p.height().max(f64::MIN_POSITIVE);
        t.poly = Some((PolyWithGradient::new(p), h));
        t
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Distance from `z` to the nearest sample.
    pub fn coarse_dist(&self, z: &[f64]) -> f64 {
        self.tree.nearest(z).map_or(f64::INFINITY, |(_, d2)| d2.sqrt())
    }

    /// Distance to the nearest sample if it is at most `r`.
    pub fn coarse_dist_within(&self, z: &[f64], r: f64) -> Option<f64> {
        self.tree.nearest_within(z, r).map(|(_, d2)| d2.sqrt())
    }

    /// Distance from `z` to the set: the nearest sample distance, improved by a
    /// foot-point iteration when a polynomial is attached.
    pub fn dist(&self, z: &[f64]) -> f64 {
        let Some((i, d2)) = self.tree.nearest(z) else {
            return f64::INFINITY;
        };
        let d0 = d2.sqrt();
        match &self.poly {
            Some((f, h)) if d0 > 0.0 => {
                let start = &self.points[i * self.n..(i + 1) * self.n];
                foot_point(f, *h, z, start).map_or(d0, |d1| d0.min(d1))
            }
            _ => d0,
        }
    }
}

fn newton_project(f: &PolyWithGradient, y: &mut [f64], g: &mut [f64], steps: usize) -> bool {
    for _ in 0..steps {
        let v = f.eval(y);
        f.gradient_into(y, g);
        let g2 = dot(g, g);
        if !(g2 > 0.0) || !v.is_finite() {
            return false;
        }
        for (yi, gi) in y.iter_mut().zip(g.iter()) {
            *yi -= v * gi / g2;
        }
    }
    true
}

/// Distance from `z` to a zero of `f` found by alternating Newton projection
/// and tangential moves toward `z`, starting at the sample `start`.
fn foot_point(f: &PolyWithGradient, height: f64, z: &[f64], start: &[f64]) -> Option<f64> {
    let n = z.len();
    let mut y = start.to_vec();
    let mut g = vec![0.0; n];
    if !newton_project(f, &mut y, &mut g, 3) {
        return None;
    }
    let mut cur = dist(z, &y);
    let mut alpha = 1.0;
    for _ in 0..30 {
        f.gradient_into(&y, &mut g);
        let g2 = dot(&g, &g);
        if !(g2 > 0.0) {
            return None;
        }
        let v: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
        let c = dot(&v, &g) / g2;
        let t: Vec<f64> = (0..n).map(|i| v[i] - c * g[i]).collect();
        if crate::util::norm(&t) <= 1e-12 * (1.0 + cur) {
            break;
        }
        let mut moved = false;
        while alpha > 1e-6 {
            let mut w: Vec<f64> = (0..n).map(|i| y[i] + alpha * t[i]).collect();
            let mut gw = vec![0.0; n];
            if newton_project(f, &mut w, &mut gw, 3) {
                let dw = dist(z, &w);
                if dw < cur {
                    y = w;
                    cur = dw;
                    moved = true;
                    alpha = (alpha * 2.0).min(1.0);
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if !newton_project(f, &mut y, &mut g, 2) {
        return None;
    }
    let scale = height * (1.0 + crate::util::norm(z)).powi(8);
    let gn = dot(&g, &g).sqrt();
    let v = f.eval(&y).abs();
    // The residual must correspond to a displacement far below any sampling scale.
    if v <= 1e-12 * scale || (gn > 0.0 && v / gn <= 1e-9) {
        Some(dist(z, &y))
    } else {
        None
    }
}

/// `sup_{a ∈ A} dist(a, B)` over the flat points of `A`; `0` for empty `A`.
pub fn excess(n: usize, a: &[f64], b: &Target) -> Result<f64> {
    check_dim(b.n, n)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    if b.is_empty() {
        return Err(Error::UndefinedDistance);
    }
    // Early-break scan: a point only matters if its sample distance beats the
    // running maximum, and refined distances never exceed sample distances.
    let count = a.len() / n;
    let step = coprime_step(count);
    let mut best = 0.0f64;
    let mut i = 0;
    for _ in 0..count {
        let q = &a[i * n..(i + 1) * n];
        let d2 = b.tree.nearest_dist2_bounded(q, best * best);
        if d2 > best * best {
            let d = if b.poly.is_some() { b.dist(q) } else { d2.sqrt() };
            best = best.max(d);
        }
        i = (i + step) % count;
    }
    Ok(best)
}

/// A step near `0.618 m` that is coprime to `m`, for a scattered visiting order.
fn coprime_step(m: usize) -> usize {
    if m <= 2 {
        return 1;
    }
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let mut s = ((m as f64) * 0.618_033_988_75) as usize;
    s = s.max(1);
    while gcd(s, m) != 1 {
        s += 1;
    }
    s
}

/// Flat coordinates of points in the closed ball `B(x, r)`.
pub fn restrict(n: usize, pts: &[f64], x: &[f64], r: f64) -> Vec<f64> {
    let r2 = r * r * (1.0 + 1e-12);
    pts.chunks_exact(n)
        .filter(|p| crate::util::dist2(p, x) <= r2)
        .flatten()
        .copied()
        .collect()
}

/// `(1/r) max{excess(A ∩ B(x,r), B), excess(B ∩ B(x,r), A)}`.
pub fn walkup_wets_targets(a: &Target, b: &Target, x: &[f64], r: f64) -> Result<f64> {
    let n = a.n;
    check_dim(n, x.len())?;
    check_dim(n, b.n)?;
    if r <= 0.0 {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let ain = restrict(n, a.points(), x, r);
    let bin = restrict(n, b.points(), x, r);
    if ain.is_empty() && bin.is_empty() {
        return Err(Error::UndefinedDistance);
    }
    if ain.is_empty() || bin.is_empty() {
        // One side is empty in the ball: only the other excess is defined.
        let e = if ain.is_empty() {
            if a.is_empty() {
                return Err(Error::UndefinedDistance);
            }
            excess(n, &bin, a)?
        } else {
            if b.is_empty() {
                return Err(Error::UndefinedDistance);
            }
            excess(n, &ain, b)?
        };
        return Ok(e / r);
    }
    let e1 = excess(n, &ain, b)?;
    let e2 = excess(n, &bin, a)?;
    Ok(e1.max(e2) / r)
}

/// Walkup–Wets distance between two point clouds in `B(x, r)`.
pub fn walkup_wets(a: &PointCloud, b: &PointCloud, x: &[f64], r: f64) -> Result<f64> {
    check_dim(a.n, b.n)?;
    walkup_wets_targets(&Target::from_cloud(a), &Target::from_cloud(b), x, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(angle: f64, count: usize) -> PointCloud {
        let (c, s) = (angle.cos(), angle.sin());
        let mut pts = Vec::new();
        for i in 0..count {
            let t = -1.5 + 3.0 * i as f64 / (count - 1) as f64;
            pts.extend_from_slice(&[t * c, t * s]);
        }
        PointCloud::new(2, pts, vec![0.0, 0.0], 1.5, 3.0 / count as f64)
    }

    #[test]
    fn identical_sets() {
        let a = line(0.3, 1000);
        assert_eq!(walkup_wets(&a, &a, &[0.0, 0.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn two_lines_give_sine() {
        for th in [0.1, 0.7, 1.2, std::f64::consts::FRAC_PI_2] {
            let a = line(0.0, 100_001);
            let b = line(th, 100_001);
            let d = walkup_wets(&a, &b, &[0.0, 0.0], 1.0).unwrap();
            assert!((d - th.sin()).abs() < 1e-4, "{th}: {d}");
        }
    }

    #[test]
    fn quasimonotone() {
        let a = line(0.0, 3001);
        let b = line(0.4, 3001);
        let x = [0.2, 0.1];
        let small = walkup_wets(&a, &b, &x, 0.3).unwrap();
        let big = walkup_wets(&a, &b, &[0.0, 0.0], 1.0).unwrap();
        assert!(small <= (1.0 / 0.3) * big + 1e-12);
    }

    #[test]
    fn empty_sides() {
        let a = line(0.0, 11);
        let far = PointCloud::new(2, vec![10.0, 10.0], vec![10.0, 10.0], 1.0, 0.1);
        assert!(matches!(
            walkup_wets(&far, &far, &[0.0, 0.0], 1.0),
            Err(Error::UndefinedDistance)
        ));
        let d = walkup_wets(&a, &far, &[0.0, 0.0], 1.0).unwrap();
        assert!(d > 10.0);
    }

    #[test]
    fn refined_distance_beats_sampling() {
        // Unit circle sampled coarsely; the refined distance from the origin is 1.
        let p = MultiPoly::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -1.0)]).unwrap();
        let mut pts = Vec::new();
        for i in 0..7 {
            let t = i as f64;
            pts.extend_from_slice(&[t.cos(), t.sin()]);
        }
        let t = Target::with_poly(2, pts, &p);
        let z = [1.5 * 0.5f64.cos(), 1.5 * 0.5f64.sin()];
        assert!((t.dist(&z) - 0.5).abs() < 1e-9);
        assert!(t.coarse_dist(&z) > 0.6);
    }
}
