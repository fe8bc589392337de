//! Translation-invariant subspaces and quantitative symmetry defects.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::frequency::{ball_average_sq, sphere_average_sq};
use crate::harmonic::{cached_basis, l2_inner_sphere};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::poly::MultiPoly;
use crate::util::{dot, norm};

/// Orthonormal basis of `V = {v : v · ∇p ≡ 0}`, the directions along which
/// `p` is translation invariant.
pub fn invariant_subspace(p: &MultiPoly) -> Vec<Vec<f64>> {
    let n = p.n();
    let grads = p.gradient();
    let mut rows: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
    for (i, g) in grads.iter().enumerate() {
        for (e, c) in g.terms() {
            rows.entry(e.to_vec()).or_insert_with(|| vec![0.0; n])[i] = c;
        }
    }
    let rows: Vec<Vec<f64>> = rows.into_values().collect();
    let m = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let mtm = m.transpose() * &m;
    let eig = SymmetricEigen::new(mtm);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        // Constant polynomial: invariant in every direction.
        return (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    let mut out: Vec<Vec<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= 1e-20 * top)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    for v in &mut out {
        // Fix the sign so the first nonzero entry is positive.
        if let Some(&f) = v.iter().find(|t| t.abs() > 1e-12) {
            if f < 0.0 {
                v.iter_mut().for_each(|t| *t = -*t);
            }
        }
    }
    out
}

/// `T_{x,r} p(y) = (p(x + r y) − p(x)) / (⨍_{∂B_1} (p(x + r z) − p(x))²)^{1/2}`.
pub fn normalized_blowup(p: &MultiPoly, x: &[f64], r: f64) -> Result<MultiPoly> {
    check_dim(p.n(), x.len())?;
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let mut parts = p.shift(x)?.dilate(r).homogeneous_parts();
    if parts.parts.is_empty() {
        return Err(Error::NormalizationFailure);
    }
    parts.parts[0] = MultiPoly::zero(p.n());
    let u = parts.sum();
    let s = sphere_average_sq(&u, &vec![0.0; p.n()], 1.0)?;
    let scale = p.height() * (norm(x) + r).max(1.0).powi(p.degree().max(0));
    if !(s > (1e-13 * scale).powi(2)) {
        return Err(Error::NormalizationFailure);
    }
    Ok(u.scale(1.0 / s.sqrt()))
}

/// Degree-`0` defect of an already normalised `t`: total ball average of `t²`
/// minus its largest homogeneous component.
fn defect0(t: &MultiPoly) -> Result<f64> {
    let origin = vec![0.0; t.n()];
    let parts = t.homogeneous_parts();
    let mut total = 0.0;
    let mut best = 0.0f64;
    for q in &parts.parts {
        let a = ball_average_sq(q, &origin, 1.0)?;
        total += a;
        best = best.max(a);
    }
    Ok((total - best).max(0.0))
}

/// Orthonormal completion: columns are a basis of `frame⊥` followed by `frame`.
fn completed_rotation(n: usize, frame: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = frame.to_vec();
    let mut comp = Vec::new();
    for i in 0..n {
        let mut v: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
        }
        let l = norm(&v);
        if l > 1e-8 {
            v.iter_mut().for_each(|a| *a /= l);
            basis.push(v.clone());
            comp.push(v);
        }
        if comp.len() + frame.len() == n {
            break;
        }
    }
    comp.extend(frame.iter().cloned());
    comp
}

fn orthonormalize(n: usize, k: usize, raw: &[f64]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    for c in 0..k {
        let mut v = raw[c * n..(c + 1) * n].to_vec();
        for b in &out {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(a, bb)| *a -= d * bb);
        }
        let l = norm(&v);
        if !(l > 1e-10) {
            return None;
        }
        v.iter_mut().for_each(|a| *a /= l);
        out.push(v);
    }
    Some(out)
}

/// Defect of `t` against homogeneous harmonics invariant along `frame`.
pub fn frame_defect(t: &MultiPoly, frame: &[Vec<f64>]) -> Result<f64> {
    let n = t.n();
    let k = frame.len();
    if k == 0 {
        return defect0(t);
    }
    if k >= n {
        return ball_average_sq(t, &vec![0.0; n], 1.0);
    }
    let cols = completed_rotation(n, frame);
    // Row i writes the old x_i in the rotated coordinates z.
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let tr = t.substitute_linear(&rows, n)?;
    let m = n - k;
    let lift: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let origin = vec![0.0; n];
    let parts = tr.homogeneous_parts();
    let mut total = 0.0;
    let mut per_degree = Vec::new();
    for (j, q) in parts.parts.iter().enumerate() {
        let a = ball_average_sq(q, &origin, 1.0)?;
        total += a;
        if j == 0 || q.is_zero() {
            continue;
        }
        let basis = cached_basis(m, j as u32)?;
        let elems: Vec<MultiPoly> = basis
            .elements
            .iter()
            .map(|e| e.substitute_linear(&lift, n))
            .collect::<Result<_>>()?;
        if elems.is_empty() {
            continue;
        }
        let d = elems.len();
        let mut g = DMatrix::zeros(d, d);
        let mut b = DVector::zeros(d);
        for a_i in 0..d {
            b[a_i] = l2_inner_sphere(q, &elems[a_i], &origin, 1.0)?;
            for b_i in a_i..d {
                let v = l2_inner_sphere(&elems[a_i], &elems[b_i], &origin, 1.0)?;
                g[(a_i, b_i)] = v;
                g[(b_i, a_i)] = v;
            }
        }
        let Some(c) = g.cholesky().map(|ch| ch.solve(&b)) else {
            continue;
        };
        let mut proj = MultiPoly::zero(n);
        for (e, &ci) in elems.iter().zip(c.iter()) {
            proj = &proj + &e.scale(ci);
        }
        per_degree.push((j, ball_average_sq(&proj, &origin, 1.0)?));
    }
    let best = per_degree.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    Ok((total - best).max(0.0))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymmetryOptions {
    /// Random starting frames (`k >= 1`).
    pub frames: usize,
    /// Frames refined by Nelder–Mead.
    pub refine: usize,
    /// For `k = 1` in `R³`: sweep the hemisphere at this angular step (degrees).
    pub sweep_deg: Option<f64>,
    pub seed: u64,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        SymmetryOptions {
            frames: 24,
            refine: 3,
            sweep_deg: None,
            seed: 0x5e77_0001,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymmetryDefect {
    pub k: usize,
    pub defect: f64,
    /// Minimising frame (empty for `k = 0`).
    pub frame: Vec<Vec<f64>>,
    /// `true` when the value is exact (`k = 0`), otherwise an upper bound.
    pub exact: bool,
    pub evaluations: usize,
}

/// Distance of the normalised blow-up at `(x, r)` from the `k`-symmetric
/// homogeneous harmonics, as a ball-averaged squared residual. Exact for
/// `k = 0`; for `k >= 1` the minimum over sampled and refined invariant frames.
pub fn symmetry_defect(p: &MultiPoly, x: &[f64], r: f64, k: usize, opts: &SymmetryOptions) -> Result<SymmetryDefect> {
    let n = p.n();
    check_dim(n, x.len())?;
    if k > n {
        return Err(Error::Precondition(format!("k = {k} exceeds dimension {n}")));
    }
    let h = p.height();
    let tol = 1e-6 * h * norm(x).max(1.0).powi(p.degree().max(0));
    let v = p.eval_at(x);
    if v.abs() > tol {
        return Err(Error::NotOnZeroSet { value: v, tol });
    }
    let t = normalized_blowup(p, x, r)?;
    if k == 0 {
        return Ok(SymmetryDefect {
            k,
            defect: defect0(&t)?,
            frame: Vec::new(),
            exact: true,
            evaluations: 1,
        });
    }
    let mut evals = 0usize;
    let mut eval = |raw: &[f64]| -> f64 {
        evals += 1;
        match orthonormalize(n, k, raw) {
            Some(fr) => frame_defect(&t, &fr).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    };
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    if let (Some(step), 3, 1) = (opts.sweep_deg, n, k) {
        let step = step.to_radians();
        let mut theta = 0.0;
        while theta <= std::f64::consts::FRAC_PI_2 + 1e-12 {
            let ring = ((2.0 * std::f64::consts::PI * theta.sin()) / step).ceil().max(1.0) as usize;
            for i in 0..ring {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / ring as f64;
                let raw = vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let val = eval(&raw);
                starts.push((val, raw));
            }
            theta += step;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // Coordinate frames first, then random ones.
    for c in 0..n.saturating_sub(k - 1) {
        let mut raw = vec![0.0; n * k];
        for i in 0..k {
            raw[i * n + c + i] = 1.0;
        }
        let val = eval(&raw);
        starts.push((val, raw));
    }
    for _ in 0..opts.frames {
        let raw: Vec<f64> = (0..n * k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let val = eval(&raw);
        starts.push((val, raw));
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nm = NelderMeadOptions {
        max_evals: 400,
        f_tol: 1e-12,
        x_tol: 1e-9,
        initial_step: 0.1,
    };
    let mut best = starts[0].clone();
    for (_, raw) in starts.iter().take(opts.refine.max(1)).cloned().collect::<Vec<_>>() {
        let res = nelder_mead(&mut eval, &raw, &nm);
        if res.value < best.0 {
            best = (res.value, res.x);
        }
    }
    let frame = orthonormalize(n, k, &best.1).unwrap_or_default();
    Ok(SymmetryDefect {
        k,
        defect: best.0,
        frame,
        exact: false,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn invariant_dimensions() {
        let v = invariant_subspace(&catalog::cross(3));
        assert_eq!(v.len(), 1);
        assert!((v[0][2].abs() - 1.0).abs() < 1e-12);
        assert!(invariant_subspace(&catalog::szulkin()).is_empty());
        assert!(invariant_subspace(&catalog::r4_separating(1.0, 1.0)).is_empty());
        // x1 - x2 is invariant along (1, 1, 0) and e3.
        let p = MultiPoly::from_terms(3, vec![(vec![1, 0, 0], 1.0), (vec![0, 1, 0], -1.0)]).unwrap();
        assert_eq!(invariant_subspace(&p).len(), 2);
    }

    #[test]
    fn homogeneous_is_zero_symmetric() {
        let o = SymmetryOptions::default();
        for r in [0.5, 1.0, 2.0] {
            let d = symmetry_defect(&catalog::szulkin(), &[0.0; 3], r, 0, &o).unwrap();
            assert!(d.defect < 1e-12);
        }
    }

    #[test]
    fn scale_dependence_off_center() {
        // Not homogeneous about x: positive defect at a unit radius, shrinking as r → 0.
        let p = catalog::cross(2);
        let o = SymmetryOptions::default();
        let big = symmetry_defect(&p, &[0.5, 0.0], 1.0, 0, &o).unwrap().defect;
        let small = symmetry_defect(&p, &[0.5, 0.0], 0.01, 0, &o).unwrap().defect;
        assert!(big > 0.01 && small < 1e-3, "{big} {small}");
    }

    #[test]
    fn cross_translation_symmetric() {
        let d = symmetry_defect(&catalog::cross(3), &[0.0; 3], 1.0, 1, &SymmetryOptions::default()).unwrap();
        assert!(d.defect < 1e-9, "{d:?}");
        assert!((d.frame[0][2].abs() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn szulkin_not_translation_symmetric() {
        let d = symmetry_defect(&catalog::szulkin(), &[0.0; 3], 1.0, 1, &SymmetryOptions::default()).unwrap();
        assert!(d.defect > 0.05, "{d:?}");
    }

    #[test]
    fn errors() {
        let o = SymmetryOptions::default();
        assert!(matches!(
            symmetry_defect(&catalog::cross(2), &[1.0, 1.0], 1.0, 0, &o),
            Err(Error::NotOnZeroSet { .. })
        ));
    }
}
