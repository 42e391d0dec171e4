//! Exact symmetric-group combinatorics.
//!
//! Permutations of `{0, .., t-1}` in one-line notation, the transposition
//! distance `dist(a, b) = t - #cycles(a^-1 b)`, the Gram matrices of the
//! permutation states `|psi_pi>^{⊗m}`, Weingarten coefficients and the
//! scalar sums `f_t` and `h` that control the lattice gap estimates.
//!
//! All Gram and Weingarten arithmetic is exact ([`BigRational`]); doubles
//! only appear when a spectrum is requested.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{LabError, Result};

/// Largest degree accepted by [`enumerate_sym`].
pub const MAX_DEGREE: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.map)
    }
}

impl Permutation {
    pub fn identity(t: usize) -> Self {
        Permutation { map: (0..t).collect() }
    }

    /// Builds a permutation from 0-based one-line notation.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let t = map.len();
        let mut seen = vec![false; t];
        for &x in &map {
            if x >= t || seen[x] {
                return Err(LabError::arg(format!("{map:?} is not a bijection on 0..{t}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    /// The transposition swapping `i` and `j`.
    pub fn transposition(t: usize, i: usize, j: usize) -> Self {
        let mut map: Vec<usize> = (0..t).collect();
        map.swap(i, j);
        Permutation { map }
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Permutation { map: other.map.iter().map(|&i| self.map[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }

    /// Cycle lengths in non-increasing order (a partition of `t`).
    pub fn cycle_type(&self) -> Vec<usize> {
        let t = self.degree();
        let mut seen = vec![false; t];
        let mut lengths = Vec::new();
        for start in 0..t {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.map[i];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    /// Next permutation in lexicographic order, or `None` at the last one.
    fn next_lex(&self) -> Option<Permutation> {
        let mut map = self.map.clone();
        let n = map.len();
        if n < 2 {
            return None;
        }
        let mut i = n - 1;
        while i > 0 && map[i - 1] >= map[i] {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        let mut j = n - 1;
        while map[j] <= map[i - 1] {
            j -= 1;
        }
        map.swap(i - 1, j);
        map[i..].reverse();
        Some(Permutation { map })
    }
}

pub(crate) fn cycle_type_label(ct: &[usize]) -> String {
    ct.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn check_degree(t: usize) -> Result<()> {
    if t == 0 || t > MAX_DEGREE {
        return Err(LabError::SizeLimit { what: "degree t", value: t as u64, max: MAX_DEGREE as u64 });
    }
    Ok(())
}

/// All `t!` permutations, lexicographic in one-line notation.
pub fn enumerate_sym(t: usize) -> Result<Vec<Permutation>> {
    check_degree(t)?;
    let mut out = Vec::new();
    let mut cur = Some(Permutation::identity(t));
    while let Some(p) = cur {
        cur = p.next_lex();
        out.push(p);
    }
    Ok(out)
}

/// Minimal number of transpositions taking `a` to `b`.
pub fn transposition_distance(a: &Permutation, b: &Permutation) -> Result<usize> {
    if a.degree() != b.degree() {
        return Err(LabError::arg(format!(
            "degree mismatch: {} vs {}",
            a.degree(),
            b.degree()
        )));
    }
    Ok(dist(a, b))
}

#[inline]
pub(crate) fn dist(a: &Permutation, b: &Permutation) -> usize {
    a.degree() - a.inverse().compose(b).cycle_count()
}

/// Pairwise distance table over an enumeration of `S_t`.
pub(crate) fn distance_table(perms: &[Permutation]) -> Vec<Vec<usize>> {
    perms.iter().map(|a| perms.iter().map(|b| dist(a, b)).collect()).collect()
}

fn rational_pow(base: u32, exp: i64) -> BigRational {
    let b = BigInt::from(base);
    if exp >= 0 {
        BigRational::from_integer(num_traits::pow(b, exp as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(b, (-exp) as usize))
    }
}

/// Gram matrix of `{|psi_pi>^{⊗m} : pi in S_t}` for local dimension `d`:
/// entry `(pi, sigma) = d^(-m dist(pi, sigma))`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub t: usize,
    pub m: u32,
    pub d: u32,
    pub perms: Vec<Permutation>,
    /// Exponent `m * dist(pi, sigma)` of `1/d` for every entry.
    exponents: Vec<Vec<u32>>,
}

pub fn gram_matrix(t: usize, m: u32, d: u32) -> Result<GramMatrix> {
    if t > 6 {
        return Err(LabError::SizeLimit { what: "degree t for Gram matrix", value: t as u64, max: 6 });
    }
    if d < 2 || m < 1 {
        return Err(LabError::arg(format!("need d >= 2 and m >= 1, got d = {d}, m = {m}")));
    }
    let perms = enumerate_sym(t)?;
    let exponents = distance_table(&perms)
        .into_iter()
        .map(|row| row.into_iter().map(|k| k as u32 * m).collect())
        .collect();
    Ok(GramMatrix { t, m, d, perms, exponents })
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.perms.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        rational_pow(self.d, -i64::from(self.exponents[i][j]))
    }

    pub fn exact(&self) -> Vec<Vec<BigRational>> {
        (0..self.size()).map(|i| (0..self.size()).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let df = f64::from(self.d);
        DMatrix::from_fn(self.size(), self.size(), |i, j| df.powi(-(self.exponents[i][j] as i32)))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_f64()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `1 - t(t-1) / (2 d^m)`, the lower bound on the smallest eigenvalue.
    pub fn spectrum_lower_bound(&self) -> f64 {
        let t = self.t as f64;
        1.0 - t * (t - 1.0) / (2.0 * f64::from(self.d).powi(self.m as i32))
    }
}

/// `f_t(alpha) = sum_{sigma in S_t} alpha^(-dist(e, sigma))`.
pub fn f_t(t: usize, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(LabError::domain(format!("f_t needs alpha > 1, got {alpha}")));
    }
    let e = Permutation::identity(t);
    Ok(enumerate_sym(t)?.iter().map(|s| alpha.powi(-(dist(&e, s) as i32))).sum())
}

/// `1 + 2t^2/alpha`, valid as an upper bound on `f_t` once `2t^2 <= alpha`.
pub fn f_t_upper_bound(t: usize, alpha: f64) -> f64 {
    1.0 + 2.0 * (t * t) as f64 / alpha
}

/// `h(D, t, sigma_1..sigma_M) = sum_pi D^(-sum_i dist(pi, sigma_i))`.
pub fn h_func(base: f64, t: usize, sigmas: &[Permutation]) -> Result<f64> {
    if sigmas.is_empty() {
        return Err(LabError::arg("h needs at least one permutation"));
    }
    if let Some(bad) = sigmas.iter().find(|s| s.degree() != t) {
        return Err(LabError::arg(format!("permutation {bad:?} has degree != {t}")));
    }
    if base.is_nan() || base <= 1.0 {
        return Err(LabError::domain(format!("h needs base > 1, got {base}")));
    }
    Ok(enumerate_sym(t)?
        .iter()
        .map(|pi| {
            let total: usize = sigmas.iter().map(|s| dist(pi, s)).sum();
            base.powi(-(total as i32))
        })
        .sum())
}

/// `1/D + 1/D^(M-1) + 2t^2/D^M`, the bound on `h` for non-constant tuples.
pub fn h_upper_bound(base: f64, t: usize, m: usize) -> f64 {
    let m = m as i32;
    1.0 / base + base.powi(-(m - 1)) + 2.0 * (t * t) as f64 * base.powi(-m)
}

/// Inverse of the `t! x t!` moment matrix `[d^(#cycles(mu^-1 nu))]`.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    pub t: usize,
    pub d: u32,
    pub perms: Vec<Permutation>,
    /// `Wg(perms[i])`, i.e. the entry of the inverse at `(e, perms[i])`.
    values: Vec<BigRational>,
}

pub fn moment_matrix(t: usize, d: u32) -> Result<Vec<Vec<BigRational>>> {
    let perms = enumerate_sym(t)?;
    Ok(perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| rational_pow(d, a.inverse().compose(b).cycle_count() as i64))
                .collect()
        })
        .collect())
}

pub fn weingarten(t: usize, d: u32) -> Result<WeingartenTable> {
    if t > 5 {
        return Err(LabError::SizeLimit { what: "degree t for Weingarten", value: t as u64, max: 5 });
    }
    if d < 1 {
        return Err(LabError::arg("dimension must be positive"));
    }
    let perms = enumerate_sym(t)?;
    let inv = invert_exact(moment_matrix(t, d)?).ok_or(LabError::Degenerate { d, t })?;
    // Row of the identity (index 0 in lexicographic order).
    let values = inv[0].clone();
    Ok(WeingartenTable { t, d, perms, values })
}

impl WeingartenTable {
    pub fn value(&self, p: &Permutation) -> &BigRational {
        let idx = self.perms.iter().position(|q| q == p).expect("permutation of matching degree");
        &self.values[idx]
    }

    /// Full inverse matrix, `W[mu][nu] = Wg(mu^-1 nu)`.
    pub fn matrix(&self) -> Vec<Vec<BigRational>> {
        self.perms
            .iter()
            .map(|a| self.perms.iter().map(|b| self.value(&a.inverse().compose(b)).clone()).collect())
            .collect()
    }

    /// Values keyed by cycle type. Returns an error if two permutations of
    /// the same cycle type disagree.
    pub fn by_cycle_type(&self) -> Result<BTreeMap<Vec<usize>, BigRational>> {
        let mut out: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
        for (p, v) in self.perms.iter().zip(&self.values) {
            let ct = p.cycle_type();
            match out.get(&ct) {
                Some(prev) if prev != v => {
                    return Err(LabError::NumericalIntegrity(format!(
                        "Weingarten value not a class function at cycle type {ct:?}"
                    )))
                }
                Some(_) => {}
                None => {
                    out.insert(ct, v.clone());
                }
            }
        }
        Ok(out)
    }

    /// `{"2,1": "-1/6", ...}`.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let map: serde_json::Map<String, serde_json::Value> = self
            .by_cycle_type()?
            .into_iter()
            .map(|(ct, v)| (cycle_type_label(&ct), serde_json::Value::String(v.to_string())))
            .collect();
        Ok(serde_json::Value::Object(map))
    }
}

/// Gauss-Jordan inversion over the rationals. `None` if singular.
pub fn invert_exact(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let s = &f * &a[col][j];
                a[r][j] -= s;
                let s = &f * &inv[col][j];
                inv[r][j] -= s;
            }
        }
    }
    Some(inv)
}

pub fn mat_mul_exact(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(BigRational::zero(), |acc, l| acc + &a[i][l] * &b[l][j]))
                .collect()
        })
        .collect()
}

/// `sum_i prod_k x_{k,i}` over equal-length non-negative vectors.
pub fn multiprod(vectors: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = vectors.first() else {
        return Err(LabError::arg("multiprod needs at least one vector"));
    };
    let len = first.len();
    if vectors.iter().any(|v| v.len() != len) {
        return Err(LabError::arg("multiprod vectors must have equal lengths"));
    }
    if vectors.iter().flatten().any(|&x| x < 0.0 || x.is_nan()) {
        return Err(LabError::domain("multiprod needs non-negative entries"));
    }
    Ok((0..len).map(|i| vectors.iter().map(|v| v[i]).product::<f64>()).sum())
}

/// [`multiprod`] after sorting every vector in descending order.
pub fn multiprod_sorted(vectors: &[Vec<f64>]) -> Result<f64> {
    let sorted: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| {
            let mut v = v.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        })
        .collect();
    multiprod(&sorted)
}
