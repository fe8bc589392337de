//! Sparse real multivariate polynomials.
//!
//! A [`MultiPoly`] stores its terms in a map keyed by exponent multi-index,
//! ordered graded-lexicographically (total degree first, then `x1` before
//! `x2` within a degree). Coefficients are `f64`; every operation uses the
//! exact algebraic formula and only suffers floating rounding.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Relative threshold below which coefficients are dropped after arithmetic.
pub const PRUNE_REL: f64 = 1e-14;

/// Default relative tolerance for [`MultiPoly::vanishing_order`].
pub const VANISHING_TOL: f64 = 1e-9;

/// Exponent multi-index `α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(exps: Vec<u32>) -> Self {
        Exponent(exps)
    }

    pub fn zeros(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponents of total degree exactly `k` in `n` variables, in graded-lex order.
pub fn exponents_of_degree(n: usize, k: u32) -> Vec<Exponent> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(Exponent(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

/// Neumaier's compensated summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRecord", try_from = "PolyRecord")]
pub struct MultiPoly {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl MultiPoly {
    pub fn zero(n: usize) -> Self {
        MultiPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        if c != 0.0 {
            p.terms.insert(Exponent::zeros(n), c);
        }
        p
    }

    /// The coordinate function `x_{i+1}` (zero-based `i`).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, 1.0)
    }

    pub fn monomial(n: usize, exps: Vec<u32>, c: f64) -> Self {
        assert_eq!(exps.len(), n, "exponent length must equal dimension");
        let mut p = Self::zero(n);
        if c != 0.0 {
            p.terms.insert(Exponent(exps), c);
        }
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        if n == 0 {
            return Err(Error::InvalidPolynomial("dimension must be positive".into()));
        }
        let mut map: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (e, c) in terms {
            check_dim(n, e.len())?;
            if !c.is_finite() {
                return Err(Error::InvalidPolynomial(format!("non-finite coefficient {c}")));
            }
            *map.entry(Exponent(e)).or_insert(0.0) += c;
        }
        let mut p = MultiPoly { n, terms: map };
        p.prune();
        Ok(p)
    }

    fn from_map(n: usize, map: HashMap<Vec<u32>, f64>) -> Self {
        let mut p = MultiPoly {
            n,
            terms: map.into_iter().map(|(e, c)| (Exponent(e), c)).collect(),
        };
        p.prune();
        p
    }

    /// Drops coefficients with `|c| <= PRUNE_REL * H(p)` (and exact zeros).
    pub fn prune(&mut self) {
        let h = self.height();
        let cut = PRUNE_REL * h;
        self.terms.retain(|_, c| *c != 0.0 && c.abs() > cut);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms.keys().map(|e| e.degree() as i32).max().unwrap_or(-1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms.get(&Exponent(exps.to_vec())).copied().unwrap_or(0.0)
    }

    /// Height `H(p) = max |c_α|`.
    pub fn height(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `p / H(p)`; the zero polynomial is returned unchanged.
    pub fn normalized(&self) -> Self {
        let h = self.height();
        if h == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / h)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = MultiPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        };
        p.prune();
        p
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        Ok(self.eval_at(x))
    }

    /// Evaluation without the dimension check (debug-asserted).
    pub fn eval_at(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        compensated_sum(self.terms.iter().map(|(e, c)| {
            let mut m = *c;
            for (xi, &a) in x.iter().zip(e.as_slice()) {
                if a > 0 {
                    m *= xi.powi(a as i32);
                }
            }
            m
        }))
    }

    /// `∂p/∂x_{i+1}`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            let a = e.0[i];
            if a == 0 {
                continue;
            }
            let mut ne = e.0.clone();
            ne[i] -= 1;
            out.insert(Exponent(ne), c * f64::from(a));
        }
        let mut p = MultiPoly { n: self.n, terms: out };
        p.prune();
        p
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.n).map(|i| self.partial(i)).collect()
    }

    pub fn laplacian(&self) -> Self {
        let mut map: HashMap<Vec<u32>, f64> = HashMap::new();
        for (e, c) in &self.terms {
            for i in 0..self.n {
                let a = e.0[i];
                if a < 2 {
                    continue;
                }
                let mut ne = e.0.clone();
                ne[i] -= 2;
                *map.entry(ne).or_insert(0.0) += c * f64::from(a) * f64::from(a - 1);
            }
        }
        Self::from_map(self.n, map)
    }

    /// True when every Laplacian coefficient is at most `tol * H(p)` in magnitude.
    pub fn is_harmonic(&self, tol: f64) -> bool {
        self.laplacian().height() <= tol * self.height()
    }

    /// The polynomial `y ↦ p(x0 + y)`, by exact binomial expansion.
    pub fn shift(&self, x0: &[f64]) -> Result<Self> {
        check_dim(self.n, x0.len())?;
        let mut acc: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut factors: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n];
        for (e, c) in &self.terms {
            for (i, f) in factors.iter_mut().enumerate() {
                f.clear();
                let a = e.0[i];
                for b in 0..=a {
                    let w = binomial(a, b) * x0[i].powi((a - b) as i32);
                    if w != 0.0 {
                        f.push((b, w));
                    }
                }
            }
            let mut cur = vec![0u32; self.n];
            expand_product(&factors, 0, *c, &mut cur, &mut acc);
        }
        Ok(Self::from_map(self.n, acc))
    }

    /// Homogeneous parts of `y ↦ p(x0 + y)`.
    pub fn taylor_shift(&self, x0: &[f64]) -> Result<HomDecomp> {
        Ok(self.shift(x0)?.homogeneous_parts())
    }

    pub fn homogeneous_parts(&self) -> HomDecomp {
        let d = self.degree();
        let mut parts: Vec<MultiPoly> = (0..=d.max(-1)).map(|_| MultiPoly::zero(self.n)).collect();
        for (e, c) in &self.terms {
            parts[e.degree() as usize].terms.insert(e.clone(), *c);
        }
        HomDecomp { n: self.n, parts }
    }

    /// `y ↦ p(s y)`.
    pub fn dilate(&self, s: f64) -> Self {
        let mut p = MultiPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * s.powi(e.degree() as i32)))
                .collect(),
        };
        p.prune();
        p
    }

    /// Substitutes `x_i = Σ_j rows[i][j] y_j`, producing a polynomial in `new_n` variables.
    pub fn substitute_linear(&self, rows: &[Vec<f64>], new_n: usize) -> Result<Self> {
        check_dim(self.n, rows.len())?;
        for r in rows {
            check_dim(new_n, r.len())?;
        }
        let linear: Vec<MultiPoly> = rows
            .iter()
            .map(|r| {
                MultiPoly::from_terms(
                    new_n,
                    r.iter().enumerate().map(|(j, &c)| {
                        let mut e = vec![0; new_n];
                        e[j] = 1;
                        (e, c)
                    }),
                )
            })
            .collect::<Result<_>>()?;
        let maxdeg = self.degree().max(0) as usize;
        let powers: Vec<Vec<MultiPoly>> = linear
            .iter()
            .map(|l| {
                let mut v = vec![MultiPoly::constant(new_n, 1.0)];
                for k in 1..=maxdeg {
                    let next = &v[k - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MultiPoly::zero(new_n);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(new_n, *c);
            for (i, &a) in e.0.iter().enumerate() {
                if a > 0 {
                    t = &t * &powers[i][a as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Coefficients of `t ↦ p(base + t e_axis)`; `base[axis]` is ignored.
    pub fn restrict_axis(&self, base: &[f64], axis: usize) -> Vec<f64> {
        let d = self.degree().max(0) as usize;
        let mut out = vec![0.0; d + 1];
        for (e, c) in &self.terms {
            let mut m = *c;
            for (j, &a) in e.0.iter().enumerate() {
                if j != axis && a > 0 {
                    m *= base[j].powi(a as i32);
                }
            }
            out[e.0[axis] as usize] += m;
        }
        out
    }

    /// Smallest `k >= 1` such that the degree-`k` Taylor part at `x` has height
    /// above `tol * H(p)`.
    pub fn vanishing_order(&self, x: &[f64], tol: f64) -> Result<usize> {
        check_dim(self.n, x.len())?;
        let h = self.height();
        if h == 0.0 {
            return Err(Error::VanishesIdentically);
        }
        let v = self.eval_at(x);
        let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let zero_tol = tol * h * norm.max(1.0).powi(self.degree().max(0));
        if v.abs() > zero_tol {
            return Err(Error::NotOnZeroSet {
                value: v,
                tol: zero_tol,
            });
        }
        let parts = self.taylor_shift(x)?;
        for k in 1..parts.parts.len() {
            if parts.parts[k].height() > tol * h {
                return Ok(k);
            }
        }
        Err(Error::VanishesIdentically)
    }

    /// Canonical record (terms in graded-lex order).
    pub fn to_record(&self) -> PolyRecord {
        PolyRecord {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermRecord {
                    exp: e.0.clone(),
                    coef: *c,
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &PolyRecord) -> Result<Self> {
        for (i, t) in rec.terms.iter().enumerate() {
            if t.exp.len() != rec.n {
                return Err(Error::Parse {
                    position: format!("terms[{i}].exp"),
                    message: format!("expected {} exponents, got {}", rec.n, t.exp.len()),
                });
            }
        }
        MultiPoly::from_terms(rec.n, rec.terms.iter().map(|t| (t.exp.clone(), t.coef)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("polynomial record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: PolyRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_record(&rec)
    }

    /// Short content hash of the canonical form.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for (e, c) in &self.terms {
            for a in &e.0 {
                h.update(a.to_le_bytes());
            }
            h.update(c.to_bits().to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn expand_product(factors: &[Vec<(u32, f64)>], i: usize, w: f64, cur: &mut Vec<u32>, acc: &mut HashMap<Vec<u32>, f64>) {
    if i == factors.len() {
        *acc.entry(cur.clone()).or_insert(0.0) += w;
        return;
    }
    for &(b, f) in &factors[i] {
        cur[i] = b;
        expand_product(factors, i + 1, w * f, cur, acc);
    }
    cur[i] = 0;
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &a) in e.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, a)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n, rhs.n, "dimension mismatch in addition");
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            *terms.entry(e.clone()).or_insert(0.0) += c;
        }
        let mut p = MultiPoly { n: self.n, terms };
        p.prune();
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n, rhs.n, "dimension mismatch in multiplication");
        let mut map: HashMap<Vec<u32>, f64> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.0.iter().zip(&eb.0).map(|(a, b)| a + b).collect();
                *map.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        MultiPoly::from_map(self.n, map)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Homogeneous decomposition `p = part_0 + part_1 + … + part_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomDecomp {
    pub n: usize,
    pub parts: Vec<MultiPoly>,
}

impl HomDecomp {
    pub fn degree(&self) -> i32 {
        self.parts.len() as i32 - 1
    }

    /// Part of homogeneity degree `i` (zero if out of range).
    pub fn part(&self, i: usize) -> MultiPoly {
        self.parts.get(i).cloned().unwrap_or_else(|| MultiPoly::zero(self.n))
    }

    /// `Σ_{lo <= i <= hi} part_i`.
    pub fn sum_range(&self, lo: usize, hi: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for i in lo..=hi.min(self.parts.len().saturating_sub(1)) {
            out = &out + &self.parts[i];
        }
        out
    }

    pub fn sum(&self) -> MultiPoly {
        self.sum_range(0, self.parts.len().saturating_sub(1))
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        compensated_sum(self.parts.iter().map(|p| p.eval_at(y)))
    }
}

impl From<MultiPoly> for PolyRecord {
    fn from(p: MultiPoly) -> Self {
        p.to_record()
    }
}

impl TryFrom<PolyRecord> for MultiPoly {
    type Error = Error;

    fn try_from(r: PolyRecord) -> Result<Self> {
        MultiPoly::from_record(&r)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermRecord {
    pub exp: Vec<u32>,
    pub coef: f64,
}

/// Canonical polynomial text format: `{"n": .., "terms": [{"exp": [..], "coef": ..}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyRecord {
    pub n: usize,
    pub terms: Vec<TermRecord>,
}

/// Fast evaluator for hot loops: flattened exponents and a power table.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    n: usize,
    max_exp: usize,
    exps: Vec<u32>,
    coefs: Vec<f64>,
}

impl CompiledPoly {
    pub fn new(p: &MultiPoly) -> Self {
        let mut exps = Vec::with_capacity(p.num_terms() * p.n());
        let mut coefs = Vec::with_capacity(p.num_terms());
        let mut max_exp = 0;
        for (e, c) in p.terms() {
            exps.extend_from_slice(e);
            coefs.push(c);
            max_exp = max_exp.max(e.iter().copied().max().unwrap_or(0) as usize);
        }
        CompiledPoly {
            n: p.n(),
            max_exp,
            exps,
            coefs,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        const MAXN: usize = 8;
        const MAXE: usize = 24;
        if self.n <= MAXN && self.max_exp < MAXE {
            let mut pw = [[1.0f64; MAXE]; MAXN];
            for i in 0..self.n {
                for e in 1..=self.max_exp {
                    pw[i][e] = pw[i][e - 1] * x[i];
                }
            }
            let mut sum = 0.0;
            for (t, c) in self.coefs.iter().enumerate() {
                let mut m = *c;
                let base = t * self.n;
                for i in 0..self.n {
                    m *= pw[i][self.exps[base + i] as usize];
                }
                sum += m;
            }
            sum
        } else {
            let mut sum = 0.0;
            for (t, c) in self.coefs.iter().enumerate() {
                let mut m = *c;
                for i in 0..self.n {
                    m *= x[i].powi(self.exps[t * self.n + i] as i32);
                }
                sum += m;
            }
            sum
        }
    }
}

/// A polynomial together with its compiled gradient, for projections onto Σ_p.
#[derive(Clone, Debug)]
pub struct PolyWithGradient {
    pub value: CompiledPoly,
    pub grad: Vec<CompiledPoly>,
}

impl PolyWithGradient {
    pub fn new(p: &MultiPoly) -> Self {
        PolyWithGradient {
            value: CompiledPoly::new(p),
            grad: p.gradient().iter().map(CompiledPoly::new).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.grad) {
            *o = g.eval(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> MultiPoly {
        MultiPoly::monomial(2, vec![1, 1], 1.0)
    }

    pub(crate) fn szulkin() -> MultiPoly {
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

    #[test]
    fn eval_examples() {
        assert_eq!(xy().eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(szulkin().eval(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        let p = MultiPoly::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        assert_eq!(p.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(xy().eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let p = MultiPoly::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        assert!(p.laplacian().is_zero());
        let q = MultiPoly::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        assert_eq!(q.laplacian(), MultiPoly::constant(2, 4.0));
        assert!(szulkin().laplacian().is_zero());
        assert!(szulkin().is_harmonic(1e-12));
        assert!(!q.is_harmonic(1e-12));
    }

    #[test]
    fn taylor_shift_of_xy() {
        let parts = xy().taylor_shift(&[1.0, 0.0]).unwrap();
        assert!(parts.part(0).is_zero());
        assert_eq!(parts.part(1), MultiPoly::var(2, 1));
        assert_eq!(parts.part(2), xy());
    }

    #[test]
    fn identity_shift_and_homogeneous() {
        let s = szulkin();
        let parts = s.taylor_shift(&[0.0; 3]).unwrap();
        assert_eq!(parts, s.homogeneous_parts());
        for i in 0..3 {
            assert!(parts.part(i).is_zero());
        }
        assert_eq!(parts.part(3), s);
    }

    #[test]
    fn heights() {
        assert_eq!(xy().height(), 1.0);
        let p = MultiPoly::from_terms(2, vec![(vec![3, 0], 1.0), (vec![1, 2], -3.0)]).unwrap();
        assert_eq!(p.height(), 3.0);
        assert_eq!(p.normalized().height(), 1.0);
        assert_eq!(MultiPoly::zero(2).degree(), -1);
    }

    #[test]
    fn vanishing_orders() {
        assert_eq!(xy().vanishing_order(&[0.0, 0.0], VANISHING_TOL).unwrap(), 2);
        assert_eq!(xy().vanishing_order(&[1.0, 0.0], VANISHING_TOL).unwrap(), 1);
        assert_eq!(szulkin().vanishing_order(&[0.0, 0.0, 0.0], VANISHING_TOL).unwrap(), 3);
        assert!(matches!(
            xy().vanishing_order(&[1.0, 1.0], VANISHING_TOL),
            Err(Error::NotOnZeroSet { .. })
        ));
        assert!(matches!(
            MultiPoly::zero(2).vanishing_order(&[0.0, 0.0], VANISHING_TOL),
            Err(Error::VanishesIdentically)
        ));
    }

    #[test]
    fn pruning_and_ordering() {
        let p = MultiPoly::from_terms(
            2,
            vec![
                (vec![0, 1], 1.0),
                (vec![1, 0], 1.0),
                (vec![0, 0], 1e-20),
                (vec![2, 0], 0.0),
            ],
        )
        .unwrap();
        assert_eq!(p.num_terms(), 2);
        let exps: Vec<Vec<u32>> = p.terms().map(|(e, _)| e.to_vec()).collect();
        assert_eq!(exps, vec![vec![1, 0], vec![0, 1]]);
        let d2: Vec<Vec<u32>> = exponents_of_degree(2, 2)
            .into_iter()
            .map(|e| e.as_slice().to_vec())
            .collect();
        assert_eq!(d2, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = szulkin();
        let back = MultiPoly::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"n": 2, "terms": [{"exp": [1], "coef": 1.0}]}"#;
        match MultiPoly::from_json(bad) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, "terms[0].exp"),
            other => panic!("unexpected {other:?}"),
        }
        let broken = "{\"n\": 2,\n \"terms\": [";
        match MultiPoly::from_json(broken) {
            Err(Error::Parse { position, .. }) => assert!(position.starts_with("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restrict_axis_matches_eval() {
        let s = szulkin();
        let base = [0.3, -0.2, 0.0];
        let coefs = s.restrict_axis(&base, 2);
        for t in [-1.0, -0.3, 0.0, 0.7] {
            let direct = s.eval_at(&[0.3, -0.2, t]);
            let uni: f64 = coefs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            assert!((direct - uni).abs() < 1e-14);
        }
    }

    #[test]
    fn substitute_rotation_preserves_values() {
        let s = szulkin();
        let (c, sn) = (0.6f64, 0.8f64);
        let rows = vec![vec![c, -sn, 0.0], vec![sn, c, 0.0], vec![0.0, 0.0, 1.0]];
        let q = s.substitute_linear(&rows, 3).unwrap();
        let y = [0.2, -0.5, 0.7];
        let x = [c * y[0] - sn * y[1], sn * y[0] + c * y[1], y[2]];
        assert!((q.eval_at(&y) - s.eval_at(&x)).abs() < 1e-13);
        assert!(q.is_harmonic(1e-12));
    }

    #[test]
    fn compiled_matches_direct() {
        let s = szulkin();
        let c = CompiledPoly::new(&s);
        let x = [0.3, -1.2, 0.9];
        assert!((c.eval(&x) - s.eval_at(&x)).abs() < 1e-13);
    }
}
