//! Sign fields on vertex grids: components of `{p > 0}` and `{p < 0}`, the
//! sign structure across the zero set, and corkscrew clearance.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::sample_zero_set;
use crate::distance::Target;
use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiPoly, PolyWithGradient};
use crate::util::{dist, norm};

/// Default vertex cap: 61⁴ in four or more dimensions, 2²⁷ below.
pub fn default_vertex_cap(n: usize) -> usize {
    if n >= 4 {
        61usize.pow(4)
    } else {
        1 << 27
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridOptions {
    /// Zero-band factor κ: a vertex is zero when `|p| <= κ · pitch · |∇p|`.
    pub kappa: f64,
    /// Components with fewer vertices are reported as fragments, not counted.
    pub min_component: usize,
    pub max_vertices: Option<usize>,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            kappa: 1.0,
            min_component: 8,
            max_vertices: None,
        }
    }
}

/// Axis-aligned box.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        GridBox {
            lo: vec![lo; n],
            hi: vec![hi; n],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub lo: Vec<f64>,
    /// Actual per-axis pitch after fitting a whole number of cells to the box.
    pub pitch: Vec<f64>,
    pub dims: Vec<usize>,
    /// `+1`, `-1`, or `0` inside the zero band; first axis varies fastest.
    pub signs: Vec<i8>,
}

impl GridField {
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn vertex(&self, mut idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for a in 0..self.n {
            x[a] = self.lo[a] + (idx % self.dims[a]) as f64 * self.pitch[a];
            idx /= self.dims[a];
        }
        x
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n];
        for a in 1..self.n {
            s[a] = s[a - 1] * self.dims[a - 1];
        }
        s
    }

    fn coord(&self, idx: usize, axis: usize, strides: &[usize]) -> usize {
        (idx / strides[axis]) % self.dims[axis]
    }
}

/// Evaluate the sign field of `p` on the vertex grid of `bx` at about `pitch`.
pub fn grid_field(p: &MultiPoly, bx: &GridBox, pitch: f64, opts: &GridOptions) -> Result<GridField> {
    let n = p.n();
    check_dim(n, bx.lo.len())?;
    check_dim(n, bx.hi.len())?;
    if !(pitch > 0.0) || bx.lo.iter().zip(&bx.hi).any(|(l, h)| !(h > l)) {
        return Err(Error::Precondition(
            "grid needs pitch > 0 and a nondegenerate box".into(),
        ));
    }
    let mut dims = Vec::with_capacity(n);
    let mut pitches = Vec::with_capacity(n);
    for a in 0..n {
        let cells = (((bx.hi[a] - bx.lo[a]) / pitch) + 1e-9).floor().max(1.0) as usize;
        dims.push(cells + 1);
        pitches.push((bx.hi[a] - bx.lo[a]) / cells as f64);
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let cap = opts.max_vertices.unwrap_or_else(|| default_vertex_cap(n));
    let total = match total {
        Some(t) if t <= cap => t,
        _ => {
            return Err(Error::ResourceCap(format!(
                "grid of {:?} vertices exceeds the cap of {cap}",
                dims
            )))
        }
    };
    let f = PolyWithGradient::new(p);
    let mut field = GridField {
        n,
        lo: bx.lo.clone(),
        pitch: pitches,
        dims,
        signs: vec![0; total],
    };
    let h = field.pitch.iter().copied().fold(0.0, f64::max);
    let kappa = opts.kappa;
    let row = field.dims[0];
    let snapshot = field.clone_geometry();
    field.signs.par_chunks_mut(row).enumerate().for_each(|(r, chunk)| {
        let mut x = snapshot.vertex(r * row);
        let mut g = vec![0.0; n];
        for (i, s) in chunk.iter_mut().enumerate() {
            x[0] = snapshot.lo[0] + i as f64 * snapshot.pitch[0];
            let v = f.eval(&x);
            f.gradient_into(&x, &mut g);
            *s = if v.abs() <= kappa * h * norm(&g) || v == 0.0 {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            };
        }
    });
    if field.signs.iter().all(|&s| s == 0) {
        return Err(Error::AllZeroField);
    }
    Ok(field)
}

impl GridField {
    fn clone_geometry(&self) -> GridField {
        GridField {
            n: self.n,
            lo: self.lo.clone(),
            pitch: self.pitch.clone(),
            dims: self.dims.clone(),
            signs: Vec::new(),
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len as u32).collect(),
            rank: vec![0; len],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (ka, kb) = (self.rank[ra as usize], self.rank[rb as usize]);
        if ka < kb {
            self.parent[ra as usize] = rb;
        } else if ka > kb {
            self.parent[rb as usize] = ra;
        } else {
            self.parent[rb as usize] = ra;
            self.rank[ra as usize] += 1;
        }
    }
}

pub const NO_COMPONENT: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    pub pos_count: usize,
    pub neg_count: usize,
    /// Vertex counts of the counted components.
    pub pos_sizes: Vec<usize>,
    pub neg_sizes: Vec<usize>,
    /// Components below the size threshold.
    pub fragments: usize,
    /// Face-adjacent `+`/`-` vertex pairs with no zero-band vertex between;
    /// nonzero means the pitch is too coarse for the band.
    pub direct_crossings: usize,
    /// Component id per vertex (`NO_COMPONENT` for zero-band vertices and
    /// fragments); ids `0..pos_count` are positive, the rest negative.
    pub labels: Vec<u32>,
    pub field: GridField,
}

impl Components {
    pub fn sign_of(&self, id: u32) -> i8 {
        if (id as usize) < self.pos_count {
            1
        } else {
            -1
        }
    }
}

/// Face-adjacent components of the positive and negative vertex sets.
pub fn components(p: &MultiPoly, bx: &GridBox, pitch: f64, opts: &GridOptions) -> Result<Components> {
    let field = grid_field(p, bx, pitch, opts)?;
    Ok(components_of(field, opts.min_component))
}

pub fn components_of(field: GridField, min_component: usize) -> Components {
    let total = field.len();
    let strides = field.strides();
    let mut uf = UnionFind::new(total);
    let mut direct = 0;
    for idx in 0..total {
        let s = field.signs[idx];
        if s == 0 {
            continue;
        }
        for a in 0..field.n {
            if field.coord(idx, a, &strides) + 1 >= field.dims[a] {
                continue;
            }
            let j = idx + strides[a];
            let t = field.signs[j];
            if t == s {
                uf.union(idx as u32, j as u32);
            } else if t == -s {
                direct += 1;
            }
        }
    }
    let mut size = vec![0u32; total];
    for idx in 0..total {
        if field.signs[idx] != 0 {
            let r = uf.find(idx as u32);
            size[r as usize] += 1;
        }
    }
    // Number counted roots, positives first, in order of first vertex.
    let mut root_id = vec![NO_COMPONENT; total];
    let mut pos_sizes = Vec::new();
    let mut neg_sizes = Vec::new();
    let mut fragments = 0;
    for idx in 0..total {
        if field.signs[idx] != 0 && uf.parent[idx] == idx as u32 {
            let sz = size[idx] as usize;
            if sz < min_component {
                fragments += 1;
            } else if field.signs[idx] > 0 {
                root_id[idx] = pos_sizes.len() as u32;
                pos_sizes.push(sz);
            } else {
                root_id[idx] = neg_sizes.len() as u32 | 0x8000_0000;
                neg_sizes.push(sz);
            }
        }
    }
    let pos_count = pos_sizes.len() as u32;
    let mut labels = vec![NO_COMPONENT; total];
    for idx in 0..total {
        if field.signs[idx] == 0 {
            continue;
        }
        let r = uf.find(idx as u32) as usize;
        let id = root_id[r];
        labels[idx] = if id == NO_COMPONENT {
            NO_COMPONENT
        } else if id & 0x8000_0000 != 0 {
            pos_count + (id & 0x7fff_ffff)
        } else {
            id
        };
    }
    Components {
        pos_count: pos_sizes.len(),
        neg_count: neg_sizes.len(),
        pos_sizes,
        neg_sizes,
        fragments,
        direct_crossings: direct,
        labels,
        field,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BipartiteReport {
    pub bipartite: bool,
    /// Component pairs met across a smooth crossing of the zero set.
    pub edges: Vec<(u32, u32)>,
    pub same_sign_edges: usize,
    pub crossings_checked: usize,
    pub pos_count: usize,
    pub neg_count: usize,
}

/// Walk every grid line through the zero band. A crossing is smooth when it
/// passes at most `2κ + 2` band vertices and the gradient along it stays
/// within a factor 4 of its endpoint values. Each smooth crossing joins two
/// components; the structure is bipartite when every such edge joins
/// components of opposite sign.
pub fn sign_bipartite_check(p: &MultiPoly, bx: &GridBox, pitch: f64, opts: &GridOptions) -> Result<BipartiteReport> {
    let comps = components(p, bx, pitch, opts)?;
    let field = &comps.field;
    let f = PolyWithGradient::new(p);
    let strides = field.strides();
    let max_band = (2.0 * opts.kappa).ceil() as usize + 2;
    let mut edges = BTreeSet::new();
    let mut checked = 0;
    let mut same = 0;
    let mut g = vec![0.0; field.n];
    let mut gnorm = |x: &[f64]| {
        f.gradient_into(x, &mut g);
        norm(&g)
    };
    for idx in 0..field.len() {
        let a_id = comps.labels[idx];
        if a_id == NO_COMPONENT {
            continue;
        }
        for a in 0..field.n {
            let c = field.coord(idx, a, &strides);
            if c + 1 >= field.dims[a] || field.signs[idx + strides[a]] != 0 {
                continue;
            }
            let mut steps = 1;
            while steps <= max_band && c + steps < field.dims[a] && field.signs[idx + steps * strides[a]] == 0 {
                steps += 1;
            }
            if steps > max_band || c + steps >= field.dims[a] {
                continue;
            }
            let j = idx + steps * strides[a];
            let b_id = comps.labels[j];
            if b_id == NO_COMPONENT {
                continue;
            }
            let ga = gnorm(&field.vertex(idx));
            let gb = gnorm(&field.vertex(j));
            let hi = ga.max(gb);
            let smooth = hi > 0.0
                && (1..steps).all(|s| {
                    let gm = gnorm(&field.vertex(idx + s * strides[a]));
                    gm >= 0.25 * hi
                });
            if !smooth {
                continue;
            }
            checked += 1;
            if comps.sign_of(a_id) == comps.sign_of(b_id) {
                same += 1;
            }
            edges.insert((a_id.min(b_id), a_id.max(b_id)));
        }
    }
    Ok(BipartiteReport {
        bipartite: same == 0,
        edges: edges.into_iter().collect(),
        same_sign_edges: same,
        crossings_checked: checked,
        pos_count: comps.pos_count,
        neg_count: comps.neg_count,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorkscrewRow {
    pub q: Vec<f64>,
    pub r: f64,
    pub side: i8,
    /// Best `min(dist(x, Σ), r − |x − Q|)` over candidates `x` on that side.
    pub clearance: f64,
    pub locus: Option<Vec<f64>>,
    /// `r / clearance` (infinite when no candidate lies on that side).
    #[serde(with = "crate::util::extended_f64")]
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorkscrewReport {
    pub rows: Vec<CorkscrewRow>,
    #[serde(with = "crate::util::extended_f64")]
    pub m_pos: f64,
    #[serde(with = "crate::util::extended_f64")]
    pub m_neg: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorkscrewOptions {
    /// Boundary points sampled (evenly strided from the zero-set sample).
    pub boundary_points: usize,
    /// Candidate grid spacing is `min(pitch, r / per_radius)`.
    pub per_radius: f64,
}

impl Default for CorkscrewOptions {
    fn default() -> Self {
        CorkscrewOptions {
            boundary_points: 40,
            per_radius: 8.0,
        }
    }
}

/// Interior corkscrew estimate on each side of `Σ_p`. Boundary points `Q` are
/// taken from a zero-set sample at `pitch` inside the box shrunk by the
/// largest radius. Clearance is the radius of the largest ball around a
/// candidate that stays inside `B(Q, r)` and on one side of `Σ_p`.
pub fn corkscrew_estimate(
    p: &MultiPoly,
    bx: &GridBox,
    pitch: f64,
    radii: &[f64],
    opts: &CorkscrewOptions,
) -> Result<CorkscrewReport> {
    let n = p.n();
    check_dim(n, bx.lo.len())?;
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || !(pitch > 0.0) {
        return Err(Error::Precondition("corkscrew needs positive pitch and radii".into()));
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let center: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let half: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let reach = norm(&half);
    let cloud = sample_zero_set(p, &center, reach, pitch)?;
    let inner: Vec<&[f64]> = cloud
        .iter()
        .filter(|q| (0..n).all(|a| q[a] >= bx.lo[a] + r_max && q[a] <= bx.hi[a] - r_max))
        .collect();
    if inner.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let stride = inner.len().div_ceil(opts.boundary_points.max(1)).max(1);
    let qs: Vec<Vec<f64>> = inner.iter().step_by(stride).map(|q| q.to_vec()).collect();
    let f = crate::poly::CompiledPoly::new(p);
    let jobs: Vec<(usize, usize)> = (0..qs.len())
        .flat_map(|i| (0..radii.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<Vec<CorkscrewRow>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let q = &qs[i];
            let r = radii[j];
            let spacing = pitch.min(r / opts.per_radius);
            let local = sample_zero_set(p, q, 2.0 * r, spacing / 2.0)?;
            let target = Target::with_poly(n, local.points, p);
            let m = (r / spacing).floor() as i64;
            let side = (2 * m + 1) as usize;
            let mut best = [(0.0f64, None::<Vec<f64>>), (0.0f64, None::<Vec<f64>>)];
            let mut x = vec![0.0; n];
            for idx in 0..side.pow(n as u32) {
                let mut t = idx;
                for a in 0..n {
                    x[a] = q[a] + ((t % side) as i64 - m) as f64 * spacing;
                    t /= side;
                }
                let room = r - dist(&x, q);
                if room <= 0.0 {
                    continue;
                }
                let v = f.eval(&x);
                if v == 0.0 {
                    continue;
                }
                let s = usize::from(v < 0.0);
                if room <= best[s].0 {
                    continue;
                }
                let c = room.min(target.dist(&x));
                if c > best[s].0 {
                    best[s] = (c, Some(x.clone()));
                }
            }
            Ok(best
                .into_iter()
                .enumerate()
                .map(|(s, (c, locus))| CorkscrewRow {
                    q: q.clone(),
                    r,
                    side: if s == 0 { 1 } else { -1 },
                    clearance: c,
                    ratio: if c > 0.0 { r / c } else { f64::INFINITY },
                    locus,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<CorkscrewRow> = rows.into_iter().flatten().collect();
    let worst = |side: i8| {
        rows.iter()
            .filter(|r| r.side == side)
            .map(|r| r.ratio)
            .fold(0.0, f64::max)
    };
    Ok(CorkscrewReport {
        m_pos: worst(1),
        m_neg: worst(-1),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn lines_give_sectors() {
        for k in 1..=5u32 {
            let c = components(
                &catalog::re_zk(k),
                &GridBox::cube(2, -1.0, 1.0),
                0.01,
                &GridOptions::default(),
            )
            .unwrap();
            assert_eq!((c.pos_count, c.neg_count), (k as usize, k as usize), "k={k}");
            assert_eq!(c.direct_crossings, 0);
        }
    }

    #[test]
    fn cubic_sectors_alternate() {
        let rep = sign_bipartite_check(
            &catalog::re_zk(3),
            &GridBox::cube(2, -1.0, 1.0),
            0.01,
            &GridOptions::default(),
        )
        .unwrap();
        assert!(rep.bipartite);
        assert_eq!(rep.edges.len(), 6);
        let p = MultiPoly::var(2, 0);
        let rep = sign_bipartite_check(&p, &GridBox::cube(2, -1.0, 1.0), 0.05, &GridOptions::default()).unwrap();
        assert!(rep.bipartite && rep.edges == vec![(0, 1)]);
    }

    #[test]
    fn szulkin_two_sides() {
        let c = components(
            &catalog::szulkin(),
            &GridBox::cube(3, -1.0, 1.0),
            0.04,
            &GridOptions::default(),
        )
        .unwrap();
        assert_eq!((c.pos_count, c.neg_count), (1, 1));
    }

    #[test]
    fn caps_and_degenerate() {
        let o = GridOptions {
            max_vertices: Some(100),
            ..GridOptions::default()
        };
        assert!(matches!(
            components(&catalog::cross(2), &GridBox::cube(2, -1.0, 1.0), 0.01, &o),
            Err(Error::ResourceCap(_))
        ));
        let z = MultiPoly::zero(2);
        assert_eq!(
            components(&z, &GridBox::cube(2, -1.0, 1.0), 0.1, &GridOptions::default()).unwrap_err(),
            Error::AllZeroField
        );
    }

    #[test]
    fn half_space_corkscrew() {
        let p = MultiPoly::var(2, 0);
        let rep = corkscrew_estimate(
            &p,
            &GridBox::cube(2, -1.0, 1.0),
            0.05,
            &[0.1, 0.2],
            &CorkscrewOptions::default(),
        )
        .unwrap();
        assert!(
            (rep.m_pos - 2.0).abs() < 1e-6 && (rep.m_neg - 2.0).abs() < 1e-6,
            "{} {}",
            rep.m_pos,
            rep.m_neg
        );
    }
}
