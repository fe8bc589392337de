//! Static kd-tree over a flat point array.

/// Nodes are stored implicitly: the points are permuted so that each subtree
/// occupies a contiguous range with its median at the midpoint.
#[derive(Clone, Debug)]
pub struct KdTree {
    n: usize,
    pts: Vec<f64>,
    idx: Vec<usize>,
    /// Split axis of the node whose median sits at each slot.
    axes: Vec<u8>,
    /// Bounding box (lo then hi) of the subtree whose median sits at each slot.
    boxes: Vec<f64>,
}

const LEAF: usize = 8;

impl KdTree {
    /// `points` is flat with stride `n`.
    pub fn new(n: usize, points: &[f64]) -> Self {
        assert!(n > 0 && points.len() % n == 0);
        let count = points.len() / n;
        let mut idx: Vec<usize> = (0..count).collect();
        let mut axes = vec![0u8; count];
        let mut boxes = vec![0.0; count * 2 * n];
        build(n, points, &mut idx, &mut axes, &mut boxes);
        let mut pts = Vec::with_capacity(points.len());
        for &i in &idx {
            pts.extend_from_slice(&points[i * n..(i + 1) * n]);
        }
        KdTree {
            n,
            pts,
            idx,
            axes,
            boxes,
        }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    fn box_dist2(&self, slot: usize, q: &[f64]) -> f64 {
        let b = &self.boxes[slot * 2 * self.n..(slot + 1) * 2 * self.n];
        let mut s = 0.0;
        for (a, &v) in q.iter().enumerate() {
            let lo = b[a];
            let hi = b[self.n + a];
            let d = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            s += d * d;
        }
        s
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.pts[slot * self.n..(slot + 1) * self.n]
    }

    /// Nearest point: `(original index, squared distance)`.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.len(), &mut best);
        Some((self.idx[best.0], best.1))
    }

    /// Nearest point within distance `r`, if any.
    pub fn nearest_within(&self, q: &[f64], r: f64) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, r * r * (1.0 + 1e-12));
        self.search(q, 0, self.len(), &mut best);
        (best.0 != usize::MAX).then(|| (self.idx[best.0], best.1))
    }

    /// Nearest squared distance, giving up early once it is known to be below
    /// `stop2` (the returned value is then some distance below `stop2`).
    pub fn nearest_dist2_bounded(&self, q: &[f64], stop2: f64) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search_stop(q, 0, self.len(), &mut best, stop2);
        best.1
    }

    fn search(&self, q: &[f64], lo: usize, hi: usize, best: &mut (usize, f64)) {
        self.search_stop(q, lo, hi, best, -1.0);
    }

    fn search_stop(&self, q: &[f64], lo: usize, hi: usize, best: &mut (usize, f64), stop2: f64) {
        if hi - lo <= LEAF {
            for s in lo..hi {
                let d = crate::util::dist2(self.point(s), q);
                if d < best.1 {
                    *best = (s, d);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        if self.box_dist2(mid, q) >= best.1 {
            return;
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - self.pts[mid * self.n + axis];
        let d = crate::util::dist2(self.point(mid), q);
        if d < best.1 {
            *best = (mid, d);
        }
        let (first, second) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search_stop(q, first.0, first.1, best, stop2);
        if best.1 < stop2 {
            return;
        }
        if diff * diff < best.1 {
            self.search_stop(q, second.0, second.1, best, stop2);
        }
    }

    /// Original indices of all points within distance `r` of `q`.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.collect(q, r * r, 0, self.len(), &mut out);
        }
        out
    }

    fn collect(&self, q: &[f64], r2: f64, lo: usize, hi: usize, out: &mut Vec<usize>) {
        if hi - lo <= LEAF {
            for s in lo..hi {
                if crate::util::dist2(self.point(s), q) <= r2 {
                    out.push(self.idx[s]);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        if self.box_dist2(mid, q) > r2 {
            return;
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - self.pts[mid * self.n + axis];
        if crate::util::dist2(self.point(mid), q) <= r2 {
            out.push(self.idx[mid]);
        }
        if diff <= 0.0 || diff * diff <= r2 {
            self.collect(q, r2, lo, mid, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.collect(q, r2, mid + 1, hi, out);
        }
    }
}

/// Recursively partitions `idx` (and the matching slots of `axes`) on the axis
/// of largest spread.
fn build(n: usize, points: &[f64], idx: &mut [usize], axes: &mut [u8], boxes: &mut [f64]) {
    if idx.len() <= LEAF {
        return;
    }
    let mut axis = 0;
    let mut spread = -1.0;
    let mut bb = vec![0.0; 2 * n];
    for a in 0..n {
        let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &i| {
            let v = points[i * n + a];
            (l.min(v), h.max(v))
        });
        bb[a] = lo;
        bb[n + a] = hi;
        if hi - lo > spread {
            spread = hi - lo;
            axis = a;
        }
    }
    let mid = idx.len() / 2;
    idx.select_nth_unstable_by(mid, |&a, &b| {
        points[a * n + axis].total_cmp(&points[b * n + axis]).then(a.cmp(&b))
    });
    axes[mid] = axis as u8;
    boxes[mid * 2 * n..(mid + 1) * 2 * n].copy_from_slice(&bb);
    let (left, right) = idx.split_at_mut(mid);
    let (aleft, aright) = axes.split_at_mut(mid);
    let (bleft, bright) = boxes.split_at_mut(mid * 2 * n);
    build(n, points, left, aleft, bleft);
    build(n, points, &mut right[1..], &mut aright[1..], &mut bright[2 * n..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(n: usize, pts: &[f64], q: &[f64]) -> f64 {
        pts.chunks(n)
            .map(|p| crate::util::dist2(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let pts: Vec<f64> = (0..600 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = KdTree::new(n, &pts);
            for _ in 0..200 {
                let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let (i, d) = t.nearest(&q).unwrap();
                assert!((d - brute(n, &pts, &q)).abs() < 1e-15);
                match t.nearest_within(&q, 0.3) {
                    Some((j, dj)) => assert!(j == i || dj == d),
                    None => assert!(d > 0.09),
                }
                assert!((crate::util::dist2(&pts[i * n..(i + 1) * n], &q) - d).abs() < 1e-15);
                let mut w = t.within(&q, 0.5);
                w.sort();
                let mut b: Vec<usize> = (0..600)
                    .filter(|&j| crate::util::dist2(&pts[j * n..(j + 1) * n], &q) <= 0.25)
                    .collect();
                b.sort();
                assert_eq!(w, b);
            }
        }
    }

    #[test]
    fn empty_tree() {
        let t = KdTree::new(2, &[]);
        assert!(t.nearest(&[0.0, 0.0]).is_none());
        assert!(t.nearest_dist2_bounded(&[0.0, 0.0], 1.0).is_infinite());
    }
}
