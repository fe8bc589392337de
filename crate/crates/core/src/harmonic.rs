//! Exact sphere/ball integrals of monomials and orthonormal bases of
//! homogeneous harmonic polynomials.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::poly::{binomial, compensated_sum, exponents_of_degree, MultiPoly, PolyRecord};

/// `Γ(m/2)` for a positive integer `m`, by the half-integer recurrence.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "gamma_half needs m > 0");
    let (mut g, mut x) = if m % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = f64::from(m) / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// `∫_{S^{n-1}} x^α dσ`.
pub fn sphere_monomial_integral(alpha: &[u32], n: usize) -> Result<f64> {
    check_dim(n, alpha.len())?;
    Ok(sphere_monomial_unchecked(alpha))
}

fn sphere_monomial_unchecked(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len() as u32;
    let total: u32 = alpha.iter().sum();
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    2.0 * num / gamma_half(total + n)
}

/// `∫_{B(0,r)} x^α dx`.
pub fn ball_monomial_integral(alpha: &[u32], n: usize, r: f64) -> Result<f64> {
    check_dim(n, alpha.len())?;
    if r <= 0.0 {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let total: u32 = alpha.iter().sum();
    let s = total + n as u32;
    Ok(r.powi(s as i32) / f64::from(s) * sphere_monomial_unchecked(alpha))
}

/// Surface area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n as u32)
}

/// Volume of the ball of radius `r` in `R^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    sphere_area(n) * r.powi(n as i32) / n as f64
}

/// `∫_{∂B(0,r)} p dσ` for a polynomial centred at the origin.
pub fn sphere_integral(p: &MultiPoly, r: f64) -> f64 {
    let n = p.n() as i32;
    compensated_sum(p.terms().map(|(e, c)| {
        if e.iter().any(|a| a % 2 == 1) {
            0.0
        } else {
            let deg: u32 = e.iter().sum();
            c * r.powi(deg as i32 + n - 1) * sphere_monomial_unchecked(e)
        }
    }))
}

/// `∫_{B(0,r)} p dx` for a polynomial centred at the origin.
pub fn ball_integral(p: &MultiPoly, r: f64) -> f64 {
    let n = p.n() as i32;
    compensated_sum(p.terms().map(|(e, c)| {
        if e.iter().any(|a| a % 2 == 1) {
            0.0
        } else {
            let deg: u32 = e.iter().sum();
            let s = deg as i32 + n;
            c * r.powi(s) / f64::from(s) * sphere_monomial_unchecked(e)
        }
    }))
}

/// `∫_{∂B(x0,r)} p q dσ`, exact.
pub fn l2_inner_sphere(p: &MultiPoly, q: &MultiPoly, x0: &[f64], r: f64) -> Result<f64> {
    check_dim(p.n(), q.n())?;
    let ps = p.shift(x0)?;
    let qs = q.shift(x0)?;
    Ok(sphere_integral(&(&ps * &qs), r))
}

/// `∫_{B(x0,r)} p q dx`, exact.
pub fn l2_inner_ball(p: &MultiPoly, q: &MultiPoly, x0: &[f64], r: f64) -> Result<f64> {
    check_dim(p.n(), q.n())?;
    let ps = p.shift(x0)?;
    let qs = q.shift(x0)?;
    Ok(ball_integral(&(&ps * &qs), r))
}

/// `dim` of the space of `k`-homogeneous harmonic polynomials in `n` variables.
pub fn harmonic_dimension(n: usize, k: u32) -> usize {
    let n = n as u32;
    let a = binomial(n + k - 1, n - 1);
    let b = if k >= 2 { binomial(n + k - 3, n - 1) } else { 0.0 };
    (a - b) as usize
}

/// Orthonormal (in `L²(S^{n-1})`) basis of `k`-homogeneous harmonic polynomials.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub n: usize,
    pub k: u32,
    pub elements: Vec<MultiPoly>,
    pub gram: Vec<Vec<f64>>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Σ coeffs[i] · elements[i]`.
    pub fn combine(&self, coeffs: &[f64]) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for (e, &c) in self.elements.iter().zip(coeffs) {
            if c != 0.0 {
                out = &out + &e.scale(c);
            }
        }
        out
    }

    /// Coordinates of `p` (assumed in the span) by sphere inner products.
    pub fn coordinates(&self, p: &MultiPoly) -> Vec<f64> {
        let origin = vec![0.0; self.n];
        self.elements
            .iter()
            .map(|e| l2_inner_sphere(p, e, &origin, 1.0).expect("dimensions agree"))
            .collect()
    }

    pub fn to_records(&self) -> Vec<PolyRecord> {
        self.elements.iter().map(|e| e.to_record()).collect()
    }
}

/// Nullspace basis of `a` via reduced row echelon form with partial pivoting;
/// pivots below `tol` times the largest entry count as zero.
pub(crate) fn nullspace_rref(a: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = a.shape();
    let mut m = a.clone();
    let amax = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cut = tol * amax.max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= cut {
            continue;
        }
        m.swap_rows(r, best);
        let pv = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= pv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        let t = m[(r, j)];
                        m[(i, j)] -= f * t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; cols];
            v[f] = 1.0;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(i, f)];
            }
            v
        })
        .collect()
}

/// Nullspace of the Laplacian on degree-`k` forms, then Gram–Schmidt in the
/// unit-sphere inner product (one reorthogonalization pass).
pub fn harmonic_basis(n: usize, k: u32) -> Result<HarmonicBasis> {
    if n < 2 || k < 1 {
        return Err(Error::Precondition(format!(
            "harmonic_basis needs n >= 2 and k >= 1, got n={n}, k={k}"
        )));
    }
    let cols = exponents_of_degree(n, k);
    let m = cols.len();
    let null: Vec<Vec<f64>> = if k < 2 {
        (0..m)
            .map(|i| {
                let mut v = vec![0.0; m];
                v[i] = 1.0;
                v
            })
            .collect()
    } else {
        let rows = exponents_of_degree(n, k - 2);
        let row_index: HashMap<Vec<u32>, usize> = rows
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice().to_vec(), i))
            .collect();
        let mut lap = DMatrix::<f64>::zeros(rows.len(), m);
        for (j, e) in cols.iter().enumerate() {
            for i in 0..n {
                let a = e.as_slice()[i];
                if a >= 2 {
                    let mut t = e.as_slice().to_vec();
                    t[i] -= 2;
                    lap[(row_index[&t], j)] += f64::from(a * (a - 1));
                }
            }
        }
        let scales: Vec<f64> = (0..m)
            .map(|j| {
                let s = lap.column(j).norm();
                if s > 0.0 {
                    1.0 / s
                } else {
                    1.0
                }
            })
            .collect();
        for j in 0..m {
            let s = scales[j];
            lap.column_mut(j).scale_mut(s);
        }
        nullspace_rref(&lap, 1e-10)
            .into_iter()
            .map(|v| v.iter().zip(&scales).map(|(a, s)| a * s).collect())
            .collect()
    };

    // Gram matrix of the monomials on the unit sphere.
    let mut g = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a..m {
            let e: Vec<u32> = cols[a]
                .as_slice()
                .iter()
                .zip(cols[b].as_slice())
                .map(|(x, y)| x + y)
                .collect();
            let v = sphere_monomial_unchecked(&e);
            g[a][b] = v;
            g[b][a] = v;
        }
    }
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for a in 0..m {
            if u[a] == 0.0 {
                continue;
            }
            for b in 0..m {
                s += u[a] * g[a][b] * v[b];
            }
        }
        s
    };

    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(null.len());
    for v in null {
        let mut w = v;
        for _pass in 0..2 {
            let projs: Vec<f64> = ortho.iter().map(|e| inner(&w, e)).collect();
            for (e, c) in ortho.iter().zip(projs) {
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei;
                }
            }
        }
        let nrm = inner(&w, &w).sqrt();
        if nrm > 1e-12 {
            for wi in &mut w {
                *wi /= nrm;
            }
            ortho.push(w);
        }
    }

    let elements: Vec<MultiPoly> = ortho
        .iter()
        .map(|c| {
            MultiPoly::from_terms(n, cols.iter().zip(c).map(|(e, &v)| (e.as_slice().to_vec(), v)))
                .expect("valid exponents")
        })
        .collect();
    let gram: Vec<Vec<f64>> = ortho
        .iter()
        .map(|u| ortho.iter().map(|v| inner(u, v)).collect())
        .collect();
    Ok(HarmonicBasis { n, k, elements, gram })
}

/// Shared, memoised [`harmonic_basis`].
pub fn cached_basis(n: usize, k: u32) -> Result<Arc<HarmonicBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<HarmonicBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("basis cache").get(&(n, k)) {
        return Ok(b.clone());
    }
    let b = Arc::new(harmonic_basis(n, k)?);
    cache.lock().expect("basis cache").insert((n, k), b.clone());
    Ok(b)
}

/// Concatenated bases of degrees `1..=k`: the search span for `H_{n,k}`.
#[derive(Clone, Debug)]
pub struct MixedSpan {
    pub n: usize,
    pub k: u32,
    pub elements: Vec<MultiPoly>,
    pub degrees: Vec<u32>,
}

impl MixedSpan {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        let mut elements = Vec::new();
        let mut degrees = Vec::new();
        for j in 1..=k {
            let b = cached_basis(n, j)?;
            for e in &b.elements {
                elements.push(e.clone());
                degrees.push(j);
            }
        }
        Ok(MixedSpan {
            n,
            k,
            elements,
            degrees,
        })
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn combine(&self, coeffs: &[f64]) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for (e, &c) in self.elements.iter().zip(coeffs) {
            if c != 0.0 {
                out = &out + &e.scale(c);
            }
        }
        out
    }

    /// Coordinates of `p` projected onto the span (exact for members).
    pub fn coordinates(&self, p: &MultiPoly) -> Vec<f64> {
        let origin = vec![0.0; self.n];
        self.elements
            .iter()
            .map(|e| l2_inner_sphere(p, e, &origin, 1.0).expect("dimensions agree"))
            .collect()
    }
}

/// Serialized form of a basis: a list of canonical polynomial records.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisRecord {
    pub n: usize,
    pub k: u32,
    pub elements: Vec<PolyRecord>,
}
