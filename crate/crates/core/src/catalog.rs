//! Named example polynomials.

use crate::poly::MultiPoly;

/// `x³ − 3xy² + z³ − (3/2)(x² + y²)z`, a cubic in `R³` whose zero set
/// separates space into two components.
pub fn szulkin() -> MultiPoly {
    MultiPoly::from_terms(
        3,
        vec![
            (vec![3, 0, 0], 1.0),
            (vec![1, 2, 0], -3.0),
            (vec![0, 0, 3], 1.0),
            (vec![2, 0, 1], -1.5),
            (vec![0, 2, 1], -1.5),
        ],
    )
    .unwrap()
}

/// `x² − y² + z³ − 3x²z`, non-homogeneous with a cusp-like zero set at 0.
pub fn logunov_malinnikova() -> MultiPoly {
    MultiPoly::from_terms(
        3,
        vec![
            (vec![2, 0, 0], 1.0),
            (vec![0, 2, 0], -1.0),
            (vec![0, 0, 3], 1.0),
            (vec![2, 0, 1], -3.0),
        ],
    )
    .unwrap()
}

/// `x1 x2` in `R^n`.
pub fn cross(n: usize) -> MultiPoly {
    let mut e = vec![0; n];
    e[0] = 1;
    e[1] = 1;
    MultiPoly::monomial(n, e, 1.0)
}

/// `Re((x + iy)^k)` in `R²`.
pub fn re_zk(k: u32) -> MultiPoly {
    // Re (x+iy)^k = Σ_{j even} C(k,j) x^{k-j} (iy)^j.
    let mut terms = Vec::new();
    let mut j = 0;
    while j <= k {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((vec![k - j, j], sign * crate::poly::binomial(k, j)));
        j += 2;
    }
    MultiPoly::from_terms(2, terms).unwrap()
}

/// `Im((x + iy)^k)` in `R²`.
pub fn im_zk(k: u32) -> MultiPoly {
    let mut terms = Vec::new();
    let mut j = 1;
    while j <= k {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((vec![k - j, j], sign * crate::poly::binomial(k, j)));
        j += 2;
    }
    MultiPoly::from_terms(2, terms).unwrap()
}

/// `a·q(x1, x2) + b·q(x3, x4)` in `R⁴` with `q = Re z²`.
pub fn r4_separating(a: f64, b: f64) -> MultiPoly {
    MultiPoly::from_terms(
        4,
        vec![
            (vec![2, 0, 0, 0], a),
            (vec![0, 2, 0, 0], -a),
            (vec![0, 0, 2, 0], b),
            (vec![0, 0, 0, 2], -b),
        ],
    )
    .unwrap()
}

/// Product of linear forms `Π (w_i · x)`.
pub fn product_of_linear(n: usize, normals: &[Vec<f64>]) -> MultiPoly {
    let mut p = MultiPoly::constant(n, 1.0);
    for w in normals {
        let mut l = MultiPoly::zero(n);
        for (i, &c) in w.iter().enumerate() {
            l = &l + &MultiPoly::var(n, i).scale(c);
        }
        p = &p * &l;
    }
    p
}

/// Look up an example by name, as used by the CLI.
pub fn by_name(name: &str) -> Option<MultiPoly> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "szulkin" => Some(szulkin()),
        "logunov-malinnikova" | "lm" => Some(logunov_malinnikova()),
        "cross2" => Some(cross(2)),
        "cross3" => Some(cross(3)),
        "r4" => Some(r4_separating(1.0, 1.0)),
        _ => lower.strip_prefix("rez").and_then(|k| k.parse().ok()).map(re_zk),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_are_harmonic() {
        for p in [
            szulkin(),
            logunov_malinnikova(),
            cross(3),
            r4_separating(1.0, 2.0),
            re_zk(5),
            im_zk(4),
        ] {
            assert!(p.is_harmonic(1e-12), "{p}");
        }
    }

    #[test]
    fn re_zk_matches_polar() {
        for k in 1..=6 {
            let p = re_zk(k);
            let q = im_zk(k);
            let t: f64 = 0.37;
            let x = [0.8 * t.cos(), 0.8 * t.sin()];
            let rk = 0.8f64.powi(k as i32);
            assert!((p.eval_at(&x) - rk * (k as f64 * t).cos()).abs() < 1e-12);
            assert!((q.eval_at(&x) - rk * (k as f64 * t).sin()).abs() < 1e-12);
        }
    }
}
