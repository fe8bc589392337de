//! Seeded families of harmonic polynomials and on-set points.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::cloud::sample_zero_set;
use crate::distance::{walkup_wets_targets, Target};
use crate::error::Result;
use crate::frequency::{doubling_check, frequency_profile, zeta_hat, DoublingCheck};
use crate::harmonic::cached_basis;
use crate::poly::{MultiPoly, PolyWithGradient};
use crate::supnorm::SupOptions;
use crate::theta::{default_h_rel, theta_upper_taylor};
use crate::tube::singular_points;
use crate::util::{dot, norm};

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian combination of the orthonormal basis of degree `d`.
pub fn random_homogeneous_harmonic<R: Rng>(n: usize, d: u32, rng: &mut R) -> Result<MultiPoly> {
    let b = cached_basis(n, d)?;
    let c: Vec<f64> = (0..b.len()).map(|_| normal(rng)).collect();
    Ok(b.combine(&c))
}

/// Sum of independent Gaussian homogeneous harmonics of degrees `1..=d`.
pub fn random_harmonic<R: Rng>(n: usize, d: u32, rng: &mut R) -> Result<MultiPoly> {
    let mut p = MultiPoly::zero(n);
    for j in 1..=d {
        p = &p + &random_homogeneous_harmonic(n, j, rng)?;
    }
    Ok(p)
}

/// Haar-distributed orthonormal frame (rows), by Gram–Schmidt on Gaussians.
pub fn random_rotation<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        for r in &rows {
            let c = dot(&v, r);
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= c * b);
        }
        let l = norm(&v);
        if l > 1e-6 {
            v.iter_mut().for_each(|a| *a /= l);
            rows.push(v);
        }
    }
    rows
}

/// `p ∘ Q` for an orthogonal `Q` given by rows.
pub fn rotate(p: &MultiPoly, q: &[Vec<f64>]) -> Result<MultiPoly> {
    p.substitute_linear(q, p.n())
}

/// Member of `F_{2,k}` lifted to `R^n`: `k` equiangular lines (hyperplanes)
/// through the origin turned by `angle`.
pub fn f2k(n: usize, k: u32, angle: f64) -> MultiPoly {
    let (c, s) = ((k as f64 * angle).cos(), (k as f64 * angle).sin());
    let q = &catalog::re_zk(k).scale(c) + &catalog::im_zk(k).scale(-s);
    let rows: Vec<Vec<f64>> = (0..2)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    q.substitute_linear(&rows, n).expect("lift")
}

/// Product of the first `m` coordinates of a random orthonormal frame.
pub fn random_coordinate_product<R: Rng>(n: usize, m: usize, rng: &mut R) -> MultiPoly {
    let frame = random_rotation(n, rng);
    catalog::product_of_linear(n, &frame[..m.min(n)])
}

/// Newton projection of `x` onto `Σ_p` along the gradient; `None` when it stalls.
pub fn polish_onto_set(p: &MultiPoly, x: &[f64]) -> Option<Vec<f64>> {
    let f = PolyWithGradient::new(p);
    let mut y = x.to_vec();
    let mut g = vec![0.0; y.len()];
    let scale = p.height() * (1.0 + norm(x)).powi(p.degree().max(0));
    for _ in 0..50 {
        let v = f.eval(&y);
        if v.abs() <= 1e-15 * scale {
            return Some(y);
        }
        f.gradient_into(&y, &mut g);
        let g2 = dot(&g, &g);
        if !(g2 > 0.0) {
            return None;
        }
        y.iter_mut().zip(&g).for_each(|(a, b)| *a -= v * b / g2);
    }
    (f.eval(&y).abs() <= 1e-13 * scale).then_some(y)
}

/// `count` points of `Σ_p ∩ B(center, radius)` drawn from a zero-set sample at
/// pitch `h` and polished onto the set.
pub fn random_on_set_points<R: Rng>(
    p: &MultiPoly,
    center: &[f64],
    radius: f64,
    h: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let cloud = sample_zero_set(p, center, radius, h)?;
    let mut out = Vec::with_capacity(count);
    if cloud.is_empty() {
        return Ok(out);
    }
    let mut tries = 0;
    while out.len() < count && tries < 20 * count {
        tries += 1;
        let i = rng.gen_range(0..cloud.len());
        if let Some(y) = polish_onto_set(p, cloud.point(i)) {
            out.push(y);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BatteryCase {
    pub name: String,
    pub poly: MultiPoly,
}

/// Polynomials for degree detection: products of coordinate forms in rotated
/// frames, `F_{2,k}` for `k <= 4`, Szulkin, and the separating quadric in `R⁴`.
pub fn detection_family<R: Rng>(rng: &mut R) -> Vec<BatteryCase> {
    let mut out = Vec::new();
    for k in 1..=4 {
        let a = rng.gen_range(0.0..std::f64::consts::PI);
        out.push(BatteryCase {
            name: format!("f2_{k}"),
            poly: f2k(2, k, a),
        });
    }
    for (n, m) in [(3, 2), (3, 3), (4, 2), (4, 3)] {
        out.push(BatteryCase {
            name: format!("product_{n}_{m}"),
            poly: random_coordinate_product(n, m, rng),
        });
    }
    out.push(BatteryCase {
        name: "szulkin".into(),
        poly: catalog::szulkin(),
    });
    out.push(BatteryCase {
        name: "r4".into(),
        poly: catalog::r4_separating(1.0, 1.0),
    });
    out
}

/// One case of the `Θ ≤ C ζ̂^{1/k}` battery.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RatioCase {
    pub poly: MultiPoly,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub x: Vec<f64>,
    pub r: f64,
    pub zeta: f64,
    /// ζ̂ at `2r`, which controls the second excess.
    pub zeta_double: f64,
    pub theta: f64,
    /// `theta / zeta^{1/k}`.
    pub ratio: f64,
}

/// Random harmonic `p` with `n ∈ {2, 3}`, `2 <= d <= d_max`, a random point of
/// `Σ_p ∩ B(0, 1)`, `k < d` and `r ∈ {0.25, 0.5, 1}`; cases with infinite or
/// zero ζ̂ are redrawn.
pub fn ratio_battery<R: Rng>(count: usize, d_max: u32, rng: &mut R) -> Result<Vec<RatioCase>> {
    let sup = SupOptions::default();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(2..=3usize);
        let d = rng.gen_range(2..=d_max.max(2));
        let k = rng.gen_range(1..d) as usize;
        let r = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
        let p = random_harmonic(n, d, rng)?.normalized();
        let pts = random_on_set_points(&p, &vec![0.0; n], 1.0, 0.05, 1, rng)?;
        let Some(x) = pts.into_iter().next() else {
            continue;
        };
        let z = zeta_hat(&p, &x, r, k, &sup)?;
        if z.is_infinite() || !(z.value > 0.0) {
            continue;
        }
        let t = theta_upper_taylor(&p, &x, r, k, default_h_rel(n))?;
        if t.sentinel {
            continue;
        }
        let z2 = zeta_hat(&p, &x, 2.0 * r, k, &sup)?.value;
        out.push(RatioCase {
            poly: p,
            n,
            d: d as usize,
            k,
            x,
            r,
            zeta: z.value,
            zeta_double: z2,
            theta: t.theta,
            ratio: t.theta / z.value.powf(1.0 / k as f64),
        });
    }
    Ok(out)
}

/// Uniform point of the unit ball.
pub fn unit_ball_point<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if dot(&v, &v) < 1.0 {
            return v;
        }
    }
}

/// Radii of the frequency battery.
pub const FREQUENCY_RADII: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FrequencyCase {
    pub poly: MultiPoly,
    pub d: usize,
    pub x0: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Frequencies of random harmonic polynomials (`n ∈ {2, 3}`, `1 <= d <= d_max`)
/// at a random centre in `B(0, 1)` and the radii [`FREQUENCY_RADII`].
pub fn frequency_battery<R: Rng>(count: usize, d_max: u32, rng: &mut R) -> Result<Vec<FrequencyCase>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.gen_range(2..=3usize);
        let d = rng.gen_range(1..=d_max.max(1));
        let p = random_harmonic(n, d, rng)?;
        let x0 = unit_ball_point(n, rng);
        let prof = frequency_profile(&p, &x0, &FREQUENCY_RADII)?;
        out.push(FrequencyCase {
            poly: p,
            d: d as usize,
            x0,
            radii: prof.radii,
            values: prof.n_vals,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DoublingCase {
    pub poly: MultiPoly,
    pub x0: Vec<f64>,
    pub r: f64,
    pub big_r: f64,
    pub check: DoublingCheck,
}

/// Doubling inequality on random harmonic polynomials with `R ∈ [0.5, 2]`
/// and `r ∈ [0.05 R, 0.49 R]`.
pub fn doubling_battery<R: Rng>(count: usize, d_max: u32, rng: &mut R) -> Result<Vec<DoublingCase>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.gen_range(2..=3usize);
        let d = rng.gen_range(1..=d_max.max(1));
        let p = random_harmonic(n, d, rng)?;
        let x0 = unit_ball_point(n, rng);
        let big_r = rng.gen_range(0.5..2.0);
        let r = big_r * rng.gen_range(0.05..0.49);
        let check = doubling_check(&p, &x0, r, big_r)?;
        out.push(DoublingCase {
            poly: p,
            x0,
            r,
            big_r,
            check,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DetectionCase {
    pub name: String,
    pub poly: MultiPoly,
    pub points: Vec<Vec<f64>>,
}

/// Whether the leading Taylor part at `x` dominates the higher ones down to
/// scale 1e-3. Points within rounding distance of a deeper stratum fail this:
/// their exact order differs from the order visible at any practical scale.
fn order_is_resolved(p: &MultiPoly, x: &[f64]) -> bool {
    let Ok(parts) = p.taylor_shift(x) else {
        return false;
    };
    let tol = crate::poly::VANISHING_TOL * p.height();
    let Some(k) = (1..parts.parts.len()).find(|&k| parts.parts[k].height() > tol) else {
        return false;
    };
    let rest: f64 = parts.parts[k + 1..].iter().map(|q| q.height()).sum();
    parts.parts[k].height() >= 1e-3 * rest
}

/// [`detection_family`] with `per_case` points each: the origin, up to a fifth
/// drawn from the singular set in `B(0, 1)`, the rest random points of the
/// zero set in `B(0, 1)`.
pub fn detection_battery<R: Rng>(per_case: usize, rng: &mut R) -> Result<Vec<DetectionCase>> {
    let mut out = Vec::new();
    for case in detection_family(rng) {
        let p = case.poly;
        let n = p.n();
        let mut points = vec![vec![0.0; n]];
        let sing = if p.degree() >= 2 && per_case >= 5 {
            singular_points(&p, 1.0, 0.05, 1.0, 0.5)?
        } else {
            Vec::new()
        };
        let sing: Vec<&[f64]> = sing
            .chunks(n)
            .filter(|q| norm(q) < 1.0 && norm(q) > 1e-6 && order_is_resolved(&p, q))
            .collect();
        let want = (per_case / 5).min(sing.len());
        for j in 0..want {
            points.push(sing[j * sing.len() / want].to_vec());
        }
        let h = 0.01f64.max(0.02 * (n as f64 - 2.0));
        let rest = per_case.saturating_sub(points.len());
        points.extend(random_on_set_points(&p, &vec![0.0; n], 1.0, h, rest, rng)?);
        points.truncate(per_case);
        out.push(DetectionCase {
            name: case.name,
            poly: p,
            points,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeparationCase {
    pub j: u32,
    pub k: u32,
    pub angle_j: f64,
    pub angle_k: f64,
    pub distance: f64,
}

/// Walkup–Wets distance in `B(0, 1)` between random members of `F_{2,j}` and
/// `F_{2,k}`, `1 <= j < k <= k_max`, sampled at pitch `h`.
pub fn separation_battery<R: Rng>(count: usize, k_max: u32, h: f64, rng: &mut R) -> Result<Vec<SeparationCase>> {
    let origin = [0.0, 0.0];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(2..=k_max.max(2));
        let j = rng.gen_range(1..k);
        let angle_j = rng.gen_range(0.0..std::f64::consts::PI);
        let angle_k = rng.gen_range(0.0..std::f64::consts::PI);
        let target = |m: u32, a: f64| -> Result<Target> {
            let q = f2k(2, m, a);
            let c = sample_zero_set(&q, &origin, 1.25, h)?;
            Ok(Target::with_poly(2, c.points, &q))
        };
        let distance = walkup_wets_targets(&target(j, angle_j)?, &target(k, angle_k)?, &origin, 1.0)?;
        out.push(SeparationCase {
            j,
            k,
            angle_j,
            angle_k,
            distance,
        });
    }
    Ok(out)
}

/// Random harmonic polynomials through the origin for tube scaling:
/// `n ∈ {2, 3}`, `1 <= d <= d_max`, normalised.
pub fn tube_family<R: Rng>(count: usize, d_max: u32, rng: &mut R) -> Result<Vec<MultiPoly>> {
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=3usize);
            let d = rng.gen_range(1..=d_max.max(1));
            Ok(random_harmonic(n, d, rng)?.normalized())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_harmonic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=4 {
            for d in 1..=4 {
                let p = random_harmonic(n, d, &mut rng).unwrap();
                assert!(p.is_harmonic(1e-10));
                assert_eq!(p.degree(), d as i32);
            }
        }
        for k in 1..=5 {
            assert!(f2k(3, k, 0.3).is_harmonic(1e-12));
        }
        assert!(random_coordinate_product(4, 3, &mut rng).is_harmonic(1e-10));
        for c in detection_family(&mut rng) {
            assert!(c.poly.is_harmonic(1e-10), "{}", c.name);
        }
    }

    #[test]
    fn on_set_points_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = catalog::szulkin();
        let pts = random_on_set_points(&p, &[0.0; 3], 1.0, 0.05, 20, &mut rng).unwrap();
        assert_eq!(pts.len(), 20);
        for x in pts {
            assert!(p.vanishing_order(&x, crate::poly::VANISHING_TOL).is_ok());
        }
    }

    #[test]
    fn small_batteries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for c in frequency_battery(10, 3, &mut rng).unwrap() {
            assert!(c.values.iter().all(|&v| v <= c.d as f64 + 1e-9));
        }
        for c in doubling_battery(10, 3, &mut rng).unwrap() {
            assert!(c.check.lhs <= c.check.rhs * (1.0 + 1e-9));
        }
        for c in separation_battery(3, 3, 0.02, &mut rng).unwrap() {
            assert!(c.distance > 0.05, "{c:?}");
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_rotation(4, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - e).abs() < 1e-12);
            }
        }
    }
}
