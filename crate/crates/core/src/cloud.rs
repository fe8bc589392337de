//! Point clouds and zero-set sampling.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::poly::{CompiledPoly, MultiPoly};
use crate::util::dist2;

/// Finite sample of a set inside a closed ball. Points are stored flat with
/// stride `n`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointCloud {
    pub n: usize,
    pub points: Vec<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub resolution: f64,
    /// Content hash of the generating polynomial, when there is one.
    pub generator: Option<String>,
}

impl PointCloud {
    pub fn new(n: usize, points: Vec<f64>, center: Vec<f64>, radius: f64, resolution: f64) -> Self {
        assert_eq!(points.len() % n, 0);
        PointCloud {
            n,
            points,
            center,
            radius,
            resolution,
            generator: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.n)
    }

    /// Flat coordinates of the points lying in the closed ball `B(x, r)`.
    pub fn in_ball(&self, x: &[f64], r: f64) -> Vec<f64> {
        let r2 = r * r * (1.0 + 1e-12);
        let mut out = Vec::new();
        for p in self.iter() {
            if dist2(p, x) <= r2 {
                out.extend_from_slice(p);
            }
        }
        out
    }

    /// Keep the points selected by `keep`, same metadata.
    pub fn filter<F: Fn(usize, &[f64]) -> bool>(&self, keep: F) -> PointCloud {
        let mut pts = Vec::new();
        for (i, p) in self.iter().enumerate() {
            if keep(i, p) {
                pts.extend_from_slice(p);
            }
        }
        PointCloud {
            points: pts,
            ..self.clone()
        }
    }

    /// Text table: `#`-prefixed header lines, then one point per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|t| format!("{t:e}")).collect::<Vec<_>>().join(",");
        writeln!(s, "# n {}", self.n).unwrap();
        writeln!(s, "# center {}", join(&self.center)).unwrap();
        writeln!(s, "# radius {:e}", self.radius).unwrap();
        writeln!(s, "# resolution {:e}", self.resolution).unwrap();
        if let Some(g) = &self.generator {
            writeln!(s, "# generator {g}").unwrap();
        }
        for p in self.iter() {
            writeln!(
                s,
                "{}",
                p.iter().map(|t| format!("{t:e}")).collect::<Vec<_>>().join(" ")
            )
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PointCloud> {
        let mut n = None;
        let mut center = None;
        let mut radius = None;
        let mut resolution = None;
        let mut generator = None;
        let mut points = Vec::new();
        let bad = |line: usize, message: String| Error::Parse {
            position: format!("line {line}"),
            message,
        };
        let num = |line: usize, s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| bad(line, format!("bad number {s:?}: {e}")))
        };
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let mut it = h.trim().splitn(2, ' ');
                let key = it.next().unwrap_or("");
                let val = it.next().unwrap_or("").trim();
                match key {
                    "n" => n = Some(val.parse::<usize>().map_err(|e| bad(ln, e.to_string()))?),
                    "center" => center = Some(val.split(',').map(|t| num(ln, t)).collect::<Result<Vec<_>>>()?),
                    "radius" => radius = Some(num(ln, val)?),
                    "resolution" => resolution = Some(num(ln, val)?),
                    "generator" => generator = Some(val.to_string()),
                    _ => {}
                }
                continue;
            }
            let dim = n.ok_or_else(|| bad(ln, "point before '# n' header".into()))?;
            let row: Vec<f64> = line.split_whitespace().map(|t| num(ln, t)).collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(bad(ln, format!("expected {dim} columns, got {}", row.len())));
            }
            points.extend(row);
        }
        let n = n.ok_or_else(|| bad(0, "missing '# n' header".into()))?;
        let center = center.unwrap_or_else(|| vec![0.0; n]);
        check_dim(n, center.len())?;
        Ok(PointCloud {
            n,
            points,
            center,
            radius: radius.ok_or_else(|| bad(0, "missing '# radius' header".into()))?,
            resolution: resolution.ok_or_else(|| bad(0, "missing '# resolution' header".into()))?,
            generator,
        })
    }
}

/// `(A − x) / r`, with center, radius and resolution transformed alongside.
pub fn rescale_cloud(a: &PointCloud, x: &[f64], r: f64) -> Result<PointCloud> {
    check_dim(a.n, x.len())?;
    if r <= 0.0 {
        return Err(Error::Precondition(format!("rescale needs r > 0, got {r}")));
    }
    let n = a.n;
    let points = a.points.iter().enumerate().map(|(i, v)| (v - x[i % n]) / r).collect();
    Ok(PointCloud {
        n,
        points,
        center: a.center.iter().zip(x).map(|(c, xi)| (c - xi) / r).collect(),
        radius: a.radius / r,
        resolution: a.resolution / r,
        generator: a.generator.clone(),
    })
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

/// Root of the univariate polynomial `c` in `[a, b]` given a sign change,
/// bisected until the bracket is below `tol`.
fn bisect(c: &[f64], mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = horner(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Integer offsets `m ∈ Z^{dims}` with `|h m| <= radius`, in lexicographic order.
fn lattice_in_ball(dims: usize, h: f64, radius: f64) -> Vec<Vec<i64>> {
    let m = (radius / h).floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![-m; dims];
    if dims == 0 {
        return vec![vec![]];
    }
    loop {
        let s: f64 = cur.iter().map(|&v| (v as f64 * h).powi(2)).sum();
        if s <= radius * radius {
            out.push(cur.clone());
        }
        let mut j = dims;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if cur[j] < m {
                cur[j] += 1;
                for v in cur.iter_mut().skip(j + 1) {
                    *v = -m;
                }
                break;
            }
        }
    }
}

/// Sample `Σ_p ∩ B(center, radius)` along axis-parallel grid lines of pitch
/// `h`: on each line every sign change between consecutive nodes (the segment
/// ends included) is bisected far below `h / 100`.
pub fn sample_zero_set(p: &MultiPoly, center: &[f64], radius: f64, h: f64) -> Result<PointCloud> {
    let n = p.n();
    check_dim(n, center.len())?;
    if !(h > 0.0) || !(radius > 0.0) {
        return Err(Error::Precondition(format!(
            "sampling needs h > 0 and radius > 0, got h={h}, radius={radius}"
        )));
    }
    let perp = lattice_in_ball(n - 1, h, radius);
    let scale = p.height()
        * (center.iter().map(|t| t.abs()).fold(0.0, f64::max) + radius)
            .max(1.0)
            .powi(p.degree().max(0));
    let zero_eps = 1e-14 * scale;
    let tol = h * 1e-6;
    // Along axis a, p(base + t e_a) = Σ_j q_{a,j}(base) t^j with q_{a,j} = ∂_a^j p / j!.
    let deg = p.degree().max(0) as usize;
    let line_coeffs: Vec<Vec<CompiledPoly>> = (0..n)
        .map(|a| {
            let mut out = Vec::with_capacity(deg + 1);
            let mut q = p.clone();
            let mut fact = 1.0;
            for j in 0..=deg {
                if j > 0 {
                    q = q.partial(a);
                    fact *= j as f64;
                }
                out.push(CompiledPoly::new(&q.scale(1.0 / fact)));
            }
            out
        })
        .collect();
    let mut jobs = Vec::with_capacity(n * perp.len());
    for axis in 0..n {
        for m in &perp {
            jobs.push((axis, m));
        }
    }
    let chunks: Vec<Vec<f64>> = jobs
        .par_chunks(256)
        .map(|batch| {
            let mut out = Vec::new();
            let mut base = vec![0.0; n];
            let mut coeffs = vec![0.0; deg + 1];
            let mut nodes = Vec::new();
            let mut vals = Vec::new();
            for &(axis, m) in batch {
                base.copy_from_slice(center);
                let mut off2 = 0.0;
                let mut k = 0;
                for j in 0..n {
                    if j == axis {
                        continue;
                    }
                    let o = m[k] as f64 * h;
                    base[j] += o;
                    off2 += o * o;
                    k += 1;
                }
                let half = (radius * radius - off2).max(0.0).sqrt();
                for (c, q) in coeffs.iter_mut().zip(&line_coeffs[axis]) {
                    *c = q.eval(&base);
                }
                let c0 = center[axis];
                nodes.clear();
                nodes.push(-half);
                let kmax = (half / h).floor() as i64;
                for i in -kmax..=kmax {
                    let t = i as f64 * h;
                    if t > -half && t < half {
                        nodes.push(t);
                    }
                }
                if half > 0.0 {
                    nodes.push(half);
                }
                vals.clear();
                vals.extend(nodes.iter().map(|&t| horner(&coeffs, t)));
                let emit = |t: f64, out: &mut Vec<f64>| {
                    let start = out.len();
                    out.extend_from_slice(&base);
                    out[start + axis] = c0 + t;
                };
                for i in 0..nodes.len() {
                    if vals[i].abs() <= zero_eps {
                        emit(nodes[i], &mut out);
                        continue;
                    }
                    if i + 1 < nodes.len() && vals[i + 1].abs() > zero_eps && (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
                        let t = bisect(&coeffs, nodes[i], nodes[i + 1], vals[i], tol);
                        emit(t, &mut out);
                    }
                }
            }
            out
        })
        .collect();
    let points: Vec<f64> = chunks.into_iter().flatten().collect();
    let mut cloud = PointCloud::new(n, points, center.to_vec(), radius, h);
    cloud.generator = Some(p.content_hash());
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn line_sample_is_the_segment() {
        let p = MultiPoly::var(2, 0);
        let c = sample_zero_set(&p, &[0.0, 0.0], 1.0, 0.01).unwrap();
        assert!(!c.is_empty());
        for q in c.iter() {
            assert!(q[0].abs() < 1e-9);
            assert!(q[1].abs() <= 1.0 + 1e-12);
        }
        // Every point of the segment is within h of the cloud.
        let t = crate::spatial::KdTree::new(2, &c.points);
        for i in 0..=200 {
            let y = -1.0 + i as f64 * 0.01;
            let (_, d2) = t.nearest(&[0.0, y]).unwrap();
            assert!(d2.sqrt() <= 0.01);
        }
    }

    #[test]
    fn positive_definite_gives_empty() {
        let p = MultiPoly::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], 1.0)]).unwrap();
        assert!(sample_zero_set(&p, &[0.0, 0.0], 1.0, 0.01).unwrap().is_empty());
    }

    #[test]
    fn szulkin_samples_are_on_the_set() {
        let p = catalog::szulkin();
        let c = sample_zero_set(&p, &[0.0; 3], 1.0, 0.02).unwrap();
        assert!(c.len() > 1000);
        for q in c.iter() {
            assert!(p.eval_at(q).abs() <= 1e-4);
            assert!(crate::util::norm(q) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn off_center_ball() {
        let p = catalog::cross(2);
        let c = sample_zero_set(&p, &[0.5, 0.2], 0.3, 0.01).unwrap();
        for q in c.iter() {
            assert!(p.eval_at(q).abs() < 1e-9);
            assert!(dist2(q, &[0.5, 0.2]).sqrt() <= 0.3 + 1e-12);
        }
        assert!(!c.is_empty());
    }

    #[test]
    fn rescale_composes() {
        let p = catalog::cross(2);
        let a = sample_zero_set(&p, &[0.0, 0.0], 1.0, 0.05).unwrap();
        let x = [0.1, -0.2];
        let lhs = rescale_cloud(&rescale_cloud(&a, &x, 0.5).unwrap(), &[0.0, 0.0], 0.25).unwrap();
        let rhs = rescale_cloud(&a, &x, 0.125).unwrap();
        for (u, v) in lhs.points.iter().zip(&rhs.points) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip() {
        let p = catalog::cross(2);
        let a = sample_zero_set(&p, &[0.0, 0.0], 1.0, 0.1).unwrap();
        let b = PointCloud::from_text(&a.to_text()).unwrap();
        assert_eq!(a, b);
        let err = PointCloud::from_text("# n 2\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
