//! Row/column subspace angles on an `m x m` lattice of qudits.
//!
//! For `g in S_t^m`, `|R_g>` places `|psi_{g_x}>` on every site of row `x`
//! and `|C_g>` places `|psi_{g_y}>` on every site of column `y`. Constant
//! tuples give the same vector in both families and span `V_Haar`. The gap
//! is measured by the largest cosine between `V_R ⊖ V_Haar` and
//! `V_C ⊖ V_Haar`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::perm::{distance_table, enumerate_sym, Permutation};

/// Largest `|S_t|^m` accepted for overlap and Gram computations.
pub const MAX_TUPLES: usize = 10_000;
/// Largest explicit vector dimension `d^(2 m^2 t)`.
pub const MAX_BRUTE_DIM: u64 = 1 << 20;
/// Relative norm below which a projected vector counts as dependent.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapMethod {
    Gram,
    Brute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub d: u32,
    pub m: usize,
    pub t: usize,
    pub method: GapMethod,
    /// Largest cosine between the two complements.
    pub cos_angle: f64,
    /// `cos_angle^2`.
    pub gap_value: f64,
    /// `||P_C P_R - P_Haar||_inf` on the span of both families, when the
    /// operator was assembled explicitly.
    pub operator_norm: Option<f64>,
    /// Largest cosine between the spans of the non-constant tuples alone,
    /// without removing `V_Haar` first.
    pub alt_cos_angle: f64,
    pub q_inf: f64,
    pub c_dnt: f64,
    /// `(c_dnt q_inf)^2`.
    pub bound: f64,
    pub complement_rank: usize,
    pub expected_rank: usize,
}

/// `1 / (1 - m t(t-1) / (2 d^m))`, infinite when the denominator is not
/// positive.
pub fn c_dnt(d: u32, m: usize, t: usize) -> f64 {
    let den = 1.0 - (m * t * t.saturating_sub(1)) as f64 / (2.0 * f64::from(d).powi(m as i32));
    if den > 0.0 {
        1.0 / den
    } else {
        f64::INFINITY
    }
}

struct Tuples {
    perms: Vec<Permutation>,
    dist: Vec<Vec<usize>>,
    /// Every tuple as indices into `perms`.
    all: Vec<Vec<usize>>,
    constant: Vec<usize>,
    non_constant: Vec<usize>,
}

fn check_params(d: u32, m: usize, t: usize) -> Result<()> {
    if d < 2 || m < 1 || t < 1 {
        return Err(LabError::arg(format!("need d >= 2, m >= 1, t >= 1; got d = {d}, m = {m}, t = {t}")));
    }
    Ok(())
}

fn tuples(m: usize, t: usize) -> Result<Tuples> {
    let perms = enumerate_sym(t)?;
    let p = perms.len();
    let count = (p as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if count > MAX_TUPLES as u64 {
        return Err(LabError::SizeLimit { what: "tuple count |S_t|^m", value: count, max: MAX_TUPLES as u64 });
    }
    let dist = distance_table(&perms);
    let all: Vec<Vec<usize>> = (0..count as usize)
        .map(|mut idx| {
            (0..m)
                .map(|_| {
                    let digit = idx % p;
                    idx /= p;
                    digit
                })
                .collect()
        })
        .collect();
    let (constant, non_constant): (Vec<usize>, Vec<usize>) =
        (0..all.len()).partition(|&i| all[i].iter().all(|&g| g == all[i][0]));
    Ok(Tuples { perms, dist, all, constant, non_constant })
}

impl Tuples {
    /// Exponent of `1/d` in `<R_g|C_h>`.
    fn cross_exponent(&self, g: usize, h: usize) -> u32 {
        let (g, h) = (&self.all[g], &self.all[h]);
        g.iter().map(|&a| h.iter().map(|&b| self.dist[a][b] as u32).sum::<u32>()).sum()
    }

    /// Exponent of `1/d` in `<R_g|R_h>` (equally `<C_g|C_h>`).
    fn row_exponent(&self, g: usize, h: usize, m: usize) -> u32 {
        let (g, h) = (&self.all[g], &self.all[h]);
        g.iter().zip(h).map(|(&a, &b)| (m * self.dist[a][b]) as u32).sum()
    }
}

/// `[Q]_{g,h} = <R_g|C_h>` over non-constant tuples.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub d: u32,
    pub m: usize,
    pub t: usize,
    /// Tuples labelling rows and columns, as indices into `S_t`.
    pub tuples: Vec<Vec<usize>>,
    exponents: Vec<Vec<u32>>,
}

pub fn overlap_matrix(d: u32, m: usize, t: usize) -> Result<OverlapMatrix> {
    check_params(d, m, t)?;
    let tp = tuples(m, t)?;
    let exponents = tp
        .non_constant
        .iter()
        .map(|&g| tp.non_constant.iter().map(|&h| tp.cross_exponent(g, h)).collect())
        .collect();
    let tuples = tp.non_constant.iter().map(|&i| tp.all[i].clone()).collect();
    Ok(OverlapMatrix { d, m, t, tuples, exponents })
}

impl OverlapMatrix {
    pub fn size(&self) -> usize {
        self.tuples.len()
    }

    pub fn exponent(&self, i: usize, j: usize) -> u32 {
        self.exponents[i][j]
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(self.d), self.exponents[i][j] as usize))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let d = f64::from(self.d);
        DMatrix::from_fn(self.size(), self.size(), |i, j| d.powi(-(self.exponents[i][j] as i32)))
    }

    pub fn max_row_sum(&self) -> f64 {
        let a = self.to_f64();
        a.row_iter().map(|r| r.sum()).fold(0.0, f64::max)
    }

    pub fn max_col_sum(&self) -> f64 {
        let a = self.to_f64();
        a.column_iter().map(|c| c.sum()).fold(0.0, f64::max)
    }

    pub fn top_singular_value(&self) -> f64 {
        top_singular(&self.to_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QBounds {
    pub q_inf: f64,
    /// `(1/d + 1/d^(m-1) + 2t^2/d^m)^m`.
    pub row_bound: f64,
    /// `sqrt(max row sum * max column sum)`.
    pub perron_bound: f64,
    pub max_row_sum: f64,
}

pub fn row_sum_bound(d: u32, m: usize, t: usize) -> f64 {
    let d = f64::from(d);
    let m_i = m as i32;
    (1.0 / d + d.powi(-(m_i - 1)) + 2.0 * (t * t) as f64 * d.powi(-m_i)).powi(m_i)
}

pub fn qinf_and_bounds(d: u32, m: usize, t: usize) -> Result<QBounds> {
    let q = overlap_matrix(d, m, t)?;
    Ok(QBounds {
        q_inf: q.top_singular_value(),
        row_bound: row_sum_bound(d, m, t),
        perron_bound: (q.max_row_sum() * q.max_col_sum()).sqrt(),
        max_row_sum: q.max_row_sum(),
    })
}

fn top_singular(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Modified Gram-Schmidt (two passes) against `basis`, appending vectors
/// whose residual norm exceeds `RANK_TOL` times their original norm.
fn extend_orthonormal(basis: &mut Vec<DVector<f64>>, v: &DVector<f64>) -> bool {
    let norm0 = v.norm();
    if norm0 == 0.0 {
        return false;
    }
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
    }
    let norm = w.norm();
    if norm <= RANK_TOL * norm0 {
        return false;
    }
    basis.push(w / norm);
    true
}

fn project_out(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
    }
    w
}

fn orthonormal_complement(cols: &[DVector<f64>], against: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for c in cols {
        let w = project_out(c, against);
        // Compare against the norm before projection.
        if w.norm() > RANK_TOL * c.norm() {
            let mut tmp = out.clone();
            if extend_orthonormal(&mut tmp, &w) {
                out = tmp;
            }
        }
    }
    out
}

fn orthonormal_span(cols: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for c in cols {
        extend_orthonormal(&mut out, c);
    }
    out
}

fn cross_cosine(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let m = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i].dot(&b[j]));
    top_singular(&m).min(1.0)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    d: u32,
    m: usize,
    t: usize,
    method: GapMethod,
    cos_angle: f64,
    operator_norm: Option<f64>,
    alt_cos_angle: f64,
    ranks: (usize, usize),
) -> Result<GapReport> {
    let q = qinf_and_bounds(d, m, t)?;
    let c = c_dnt(d, m, t);
    let bound = if q.q_inf == 0.0 { 0.0 } else { (c * q.q_inf).powi(2) };
    Ok(GapReport {
        d,
        m,
        t,
        method,
        cos_angle,
        gap_value: cos_angle * cos_angle,
        operator_norm,
        alt_cos_angle,
        q_inf: q.q_inf,
        c_dnt: c,
        bound,
        complement_rank: ranks.0,
        expected_rank: ranks.1,
    })
}

/// Gap from Gram matrices alone: the family Gram `G_m^{⊗m}` gives
/// coordinates for each span, and the cross overlaps `<R_g|C_h>` couple
/// the two families.
pub fn subspace_gap_gram(d: u32, m: usize, t: usize) -> Result<GapReport> {
    check_params(d, m, t)?;
    let tp = tuples(m, t)?;
    let n_tuples = tp.all.len();
    let df = f64::from(d);
    let gram = DMatrix::from_fn(n_tuples, n_tuples, |i, j| df.powi(-(tp.row_exponent(i, j, m) as i32)));
    let cross = DMatrix::from_fn(n_tuples, n_tuples, |i, j| df.powi(-(tp.cross_exponent(i, j) as i32)));

    // Coordinates E = Lambda^(1/2) U^T of every family vector.
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n_tuples).filter(|&k| eig.eigenvalues[k] > 1e-12 * lmax).collect();
    let r = keep.len();
    let coords: Vec<DVector<f64>> = (0..n_tuples)
        .map(|i| DVector::from_fn(r, |a, _| eig.eigenvalues[keep[a]].sqrt() * eig.eigenvectors[(i, keep[a])]))
        .collect();
    // Map coordinates back to coefficients over the family: U Lambda^(-1/2) b.
    let to_coeff = |b: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n_tuples, |i, _| {
            (0..r).map(|a| eig.eigenvectors[(i, keep[a])] * b[a] / eig.eigenvalues[keep[a]].sqrt()).sum()
        })
    };
    let haar = orthonormal_span(&tp.constant.iter().map(|&i| coords[i].clone()).collect::<Vec<_>>());
    let non_const: Vec<DVector<f64>> = tp.non_constant.iter().map(|&i| coords[i].clone()).collect();
    let comp = orthonormal_complement(&non_const, &haar);
    let expected = tp.non_constant.len();
    if comp.len() < expected {
        return Err(LabError::RankDeficient { effective_rank: comp.len(), expected });
    }
    let coeffs: Vec<DVector<f64>> = comp.iter().map(to_coeff).collect();
    let cosine = |cf: &[DVector<f64>]| -> f64 {
        let k = cf.len();
        let m = DMatrix::from_fn(k, k, |i, j| cf[i].dot(&(&cross * &cf[j])));
        top_singular(&m).min(1.0)
    };
    let cos_angle = cosine(&coeffs);
    let alt: Vec<DVector<f64>> = orthonormal_span(&non_const).iter().map(to_coeff).collect();
    let alt_cos_angle = cosine(&alt);
    finish(d, m, t, GapMethod::Gram, cos_angle, None, alt_cos_angle, (comp.len(), expected))
}

/// `|psi_pi> = (I ⊗ V(pi)) |Phi_{d,t}>` in `(C^d)^{⊗2t}`, real entries.
pub fn site_state(d: u32, pi: &Permutation) -> Vec<f64> {
    let t = pi.degree();
    let dt = (d as usize).pow(t as u32);
    let amp = 1.0 / (dt as f64).sqrt();
    let mut v = vec![0.0; dt * dt];
    for i in 0..dt {
        // Digits of i, most significant first.
        let digits: Vec<usize> = (0..t).map(|k| (i / (d as usize).pow((t - 1 - k) as u32)) % d as usize).collect();
        let j = (0..t).fold(0usize, |acc, k| acc * d as usize + digits[pi.apply(k)]);
        v[i * dt + j] = amp;
    }
    v
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Gap from explicit vectors in dimension `d^(2 m^2 t)`.
pub fn subspace_gap_brute(d: u32, m: usize, t: usize) -> Result<GapReport> {
    check_params(d, m, t)?;
    let dim = u64::from(d).checked_pow((2 * m * m * t) as u32).unwrap_or(u64::MAX);
    if dim > MAX_BRUTE_DIM {
        return Err(LabError::SizeLimit { what: "explicit dimension d^(2 m^2 t)", value: dim, max: MAX_BRUTE_DIM });
    }
    let tp = tuples(m, t)?;
    let sites: Vec<Vec<f64>> = tp.perms.iter().map(|p| site_state(d, p)).collect();
    let build = |assign: &dyn Fn(usize, usize) -> usize| -> DVector<f64> {
        let mut v = vec![1.0];
        for x in 0..m {
            for y in 0..m {
                v = kron(&v, &sites[assign(x, y)]);
            }
        }
        DVector::from_vec(v)
    };
    let rows: Vec<DVector<f64>> = tp.all.iter().map(|g| build(&|x, _| g[x])).collect();
    let cols: Vec<DVector<f64>> = tp.all.iter().map(|h| build(&|_, y| h[y])).collect();
    let haar = orthonormal_span(&tp.constant.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
    let pick = |fam: &[DVector<f64>]| -> Vec<DVector<f64>> { tp.non_constant.iter().map(|&i| fam[i].clone()).collect() };
    let comp_r = orthonormal_complement(&pick(&rows), &haar);
    let comp_c = orthonormal_complement(&pick(&cols), &haar);
    let expected = tp.non_constant.len();
    if comp_r.len() < expected || comp_c.len() < expected {
        return Err(LabError::RankDeficient { effective_rank: comp_r.len().min(comp_c.len()), expected });
    }
    let cos_angle = cross_cosine(&comp_r, &comp_c);
    let alt_cos_angle = cross_cosine(&orthonormal_span(&pick(&rows)), &orthonormal_span(&pick(&cols)));

    // P_C P_R - P_Haar restricted to span(V_R ∪ V_C).
    let span_r = orthonormal_span(&rows);
    let span_c = orthonormal_span(&cols);
    let mut all = rows.clone();
    all.extend(cols.iter().cloned());
    let w = orthonormal_span(&all);
    let proj = |basis: &[DVector<f64>], v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for b in basis {
            out.axpy(b.dot(v), b, 1.0);
        }
        out
    };
    let images: Vec<DVector<f64>> = w.iter().map(|v| proj(&span_c, &proj(&span_r, v)) - proj(&haar, v)).collect();
    let op = DMatrix::from_fn(w.len(), w.len(), |i, j| w[i].dot(&images[j]));
    let operator_norm = top_singular(&op);
    finish(d, m, t, GapMethod::Brute, cos_angle, Some(operator_norm), alt_cos_angle, (comp_r.len(), expected))
}

/// `<psi_a|psi_b> = d^(-dist(a, b))`, exactly.
pub fn site_overlap(d: u32, a: &Permutation, b: &Permutation) -> Result<BigRational> {
    let k = crate::perm::transposition_distance(a, b)?;
    Ok(BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(d), k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_examples() {
        let q = overlap_matrix(2, 2, 2).unwrap();
        assert_eq!(q.size(), 2);
        let quarter = BigRational::new(1.into(), 4.into());
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(q.entry(i, j), quarter);
            }
        }
        assert!((q.max_row_sum() - 0.5).abs() < 1e-15);
        assert_eq!(overlap_matrix(2, 3, 1).unwrap().size(), 0);
        assert!(matches!(overlap_matrix(2, 5, 4), Err(LabError::SizeLimit { .. })));
    }

    #[test]
    fn overlap_invariants() {
        for (d, m, t) in [(2, 2, 2), (2, 3, 2), (3, 3, 2), (2, 2, 3)] {
            let q = overlap_matrix(d, m, t).unwrap();
            let p = enumerate_sym(t).unwrap().len();
            assert_eq!(q.size(), p.pow(m as u32) - p);
            let a = q.to_f64();
            for i in 0..q.size() {
                for j in 0..q.size() {
                    assert!(a[(i, j)] > 0.0 && a[(i, j)] < 1.0);
                    assert_eq!(q.exponent(i, j), q.exponent(j, i));
                }
            }
            assert!(q.max_row_sum() <= row_sum_bound(d, m, t));
        }
    }

    #[test]
    fn qinf_examples() {
        let b = qinf_and_bounds(2, 2, 2).unwrap();
        assert!((b.q_inf - 0.5).abs() < 1e-14);
        assert!((b.perron_bound - 0.5).abs() < 1e-14);
        assert!((b.row_bound - 9.0).abs() < 1e-14);
        let b = qinf_and_bounds(2, 3, 2).unwrap();
        assert!(b.q_inf <= b.perron_bound + 1e-12);
        assert!(b.q_inf <= b.row_bound);
    }

    #[test]
    fn site_state_overlaps() {
        let e = Permutation::identity(2);
        let s = Permutation::transposition(2, 0, 1);
        let a = site_state(2, &e);
        let b = site_state(2, &s);
        assert_eq!(a.len(), 16);
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        assert!((dot(&a, &a) - 1.0).abs() < 1e-15);
        assert!((dot(&a, &b) - 0.5).abs() < 1e-15);
        let perms = enumerate_sym(3).unwrap();
        for p in &perms {
            for q in &perms {
                let exact = crate::exact::rational_to_f64(&site_overlap(3, p, q).unwrap());
                assert!((dot(&site_state(3, p), &site_state(3, q)) - exact).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trivial_degree_has_no_gap() {
        let g = subspace_gap_gram(2, 2, 1).unwrap();
        assert_eq!(g.gap_value, 0.0);
        assert_eq!(g.complement_rank, 0);
    }

    #[test]
    fn gram_and_brute_agree() {
        let g = subspace_gap_gram(2, 2, 2).unwrap();
        let b = subspace_gap_brute(2, 2, 2).unwrap();
        assert!((g.gap_value - b.gap_value).abs() < 1e-10, "{g:?} {b:?}");
        assert!((g.cos_angle - b.cos_angle).abs() < 1e-10);
        assert!((g.alt_cos_angle - b.alt_cos_angle).abs() < 1e-10);
        assert!(g.gap_value <= g.bound + 1e-10);
        // The operator norm equals the cosine itself.
        assert!((b.operator_norm.unwrap() - b.cos_angle).abs() < 1e-10);
    }

    #[test]
    fn c_dnt_values() {
        assert!((c_dnt(2, 2, 2) - 2.0).abs() < 1e-15);
        assert_eq!(c_dnt(2, 1, 3), f64::INFINITY);
    }
}
