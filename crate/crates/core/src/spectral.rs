//! Krawtchouk-polynomial solution of the accelerated chain `Q`.
//!
//! On `{0..n-1}` the chain has eigenvalues `lambda_m = 1 - 4m/(3n-1)` and
//! left eigenvectors `x^(m)(i) = x^(m)(0) K^(i)(m)` with
//! `K^(t)(x) = sum_i C(x,i) C(n-x-1,t-i) 3^(t-i) (-1)^i`. With
//! `x^(m)(0) = sqrt(C(n-1,m) 3^m) / 4^(n-1)` the eigenvectors are
//! orthonormal for `(f,g) = sum_i f(i) g(i) / pi(i)`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chain::weight::{q_chain_f64, q_initial, stationary_q, Flavor, WeightDistribution};
use crate::error::{LabError, Result};
use crate::exact::{big_binomial, big_pow, ln_abs, ratio_to_f64, rational_to_f64};
use crate::stats::format_float;

/// Largest `n` handled in exact rational mode.
pub const MAX_EXACT_N: usize = 40;
/// Largest `n` accepted at all.
pub const MAX_N: usize = 400;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::arg(format!("accelerated chain needs n >= 2, got {n}")));
    }
    if n > MAX_N {
        return Err(LabError::SizeLimit { what: "Krawtchouk basis size n", value: n as u64, max: MAX_N as u64 });
    }
    Ok(())
}

/// `K^(t)(x)` by the defining sum.
pub fn krawtchouk(n: usize, t: usize, x: usize) -> Result<BigInt> {
    if n < 1 || t >= n || x >= n {
        return Err(LabError::arg(format!("need 0 <= t, x <= n-1, got n = {n}, t = {t}, x = {x}")));
    }
    let mut acc = BigInt::zero();
    for i in 0..=t.min(x) {
        let term = big_binomial(x, i) * big_binomial(n - x - 1, t - i) * big_pow(3, t - i);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Rows `table[x][t] = K^(t)(x)`, from the generating function
/// `sum_t K^(t)(x) z^t = (1 - z)^x (1 + 3z)^(n-1-x)`.
pub fn krawtchouk_table(n: usize) -> Vec<Vec<BigInt>> {
    let mut poly: Vec<BigInt> = (0..n).map(|t| big_binomial(n - 1, t) * big_pow(3, t)).collect();
    let mut rows = Vec::with_capacity(n);
    rows.push(poly.clone());
    for _ in 1..n {
        // Divide by (1 + 3z), then multiply by (1 - z).
        let mut q = Vec::with_capacity(n);
        let mut prev = BigInt::zero();
        for a in &poly {
            let c: BigInt = a - &prev * 3u32;
            q.push(c.clone());
            prev = c;
        }
        debug_assert!(q.last().is_some());
        let mut next = Vec::with_capacity(n);
        for t in 0..n {
            let lower = if t > 0 { q[t - 1].clone() } else { BigInt::zero() };
            next.push(&q[t] - lower);
        }
        poly = next;
        rows.push(poly.clone());
    }
    rows
}

/// Both sides of the binomial-weight orthogonality relation for
/// `k^(t)(x) = sum_i C(x,i) C(N-x,t-i) p^(t-i) (-q)^i`:
/// `sum_x C(N,x) p^x q^(N-x) k^(t)(x) k^(s)(x) = delta_ts C(N,t) (pq)^t`.
pub fn orthogonality_check(big_n: usize, p: &BigRational, t: usize, s: usize) -> Result<(BigRational, BigRational)> {
    if !(p > &BigRational::zero() && p < &BigRational::one()) {
        return Err(LabError::domain("p must lie in (0, 1)"));
    }
    if t > big_n || s > big_n {
        return Err(LabError::arg(format!("degrees must be <= N = {big_n}")));
    }
    let q = BigRational::one() - p;
    let k = |deg: usize, x: usize| -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..=deg.min(x) {
            if deg - i > big_n - x {
                continue;
            }
            let c = BigRational::from_integer(big_binomial(x, i) * big_binomial(big_n - x, deg - i));
            let mut term = c * num_traits::pow(p.clone(), deg - i) * num_traits::pow(q.clone(), i);
            if i % 2 == 1 {
                term = -term;
            }
            acc += term;
        }
        acc
    };
    let mut lhs = BigRational::zero();
    for x in 0..=big_n {
        let w = BigRational::from_integer(big_binomial(big_n, x))
            * num_traits::pow(p.clone(), x)
            * num_traits::pow(q.clone(), big_n - x);
        lhs += w * k(t, x) * k(s, x);
    }
    let rhs = if t == s {
        BigRational::from_integer(big_binomial(big_n, t)) * num_traits::pow(p * &q, t)
    } else {
        BigRational::zero()
    };
    Ok((lhs, rhs))
}

/// `C(n-1,x) 3^-t K^(t)(x) = C(n-1,t) 3^-x K^(x)(t)`, checked exactly.
pub fn symmetry_holds(n: usize, x: usize, t: usize) -> Result<bool> {
    let lhs = big_binomial(n - 1, x) * krawtchouk(n, t, x)? * big_pow(3, x);
    let rhs = big_binomial(n - 1, t) * krawtchouk(n, x, t)? * big_pow(3, t);
    Ok(lhs == rhs)
}

/// `sum_t K^(t)(m)^2 / (C(n-1,t) 3^t)` and `4^(n-1) / (C(n-1,m) 3^m)`.
pub fn mainortho(n: usize, m: usize) -> Result<(BigRational, BigRational)> {
    check_n(n)?;
    if m >= n {
        return Err(LabError::arg(format!("m = {m} must be < n = {n}")));
    }
    let mut lhs = BigRational::zero();
    for t in 0..n {
        let k = krawtchouk(n, t, m)?;
        lhs += BigRational::new(&k * &k, big_binomial(n - 1, t) * big_pow(3, t));
    }
    let rhs = BigRational::new(big_pow(4, n - 1), big_binomial(n - 1, m) * big_pow(3, m));
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisMode {
    Exact,
    Double,
}

#[derive(Debug, Clone)]
pub struct KrawtchoukBasis {
    pub n: usize,
    pub mode: BasisMode,
    pub eigenvalues: Vec<f64>,
    /// `x^(m)(0)`.
    pub x0: Vec<f64>,
    /// `vectors[m][i] = x^(m)(i)`.
    pub vectors: Vec<Vec<f64>>,
    /// `k[m][i] = K^(i)(m)`.
    k: Vec<Vec<BigInt>>,
}

/// `x^(m)(0)^2 = C(n-1,m) 3^m / 16^(n-1)`.
fn x0_squared(n: usize, m: usize) -> BigRational {
    BigRational::new(big_binomial(n - 1, m) * big_pow(3, m), big_pow(16, n - 1))
}

pub fn eigen_system(n: usize) -> Result<KrawtchoukBasis> {
    check_n(n)?;
    let k = krawtchouk_table(n);
    let mode = if n <= MAX_EXACT_N { BasisMode::Exact } else { BasisMode::Double };
    let ln3 = 3f64.ln();
    let ln4 = 4f64.ln();
    let mut x0 = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for (m, row) in k.iter().enumerate() {
        let ln_norm = 0.5 * (ln_abs(&big_binomial(n - 1, m)) + m as f64 * ln3) - (n - 1) as f64 * ln4;
        x0.push(ln_norm.exp());
        let v: Vec<f64> = row
            .iter()
            .map(|kv| {
                if kv.is_zero() {
                    0.0
                } else {
                    let mag = (ln_abs(kv) + ln_norm).exp();
                    if kv.is_negative() {
                        -mag
                    } else {
                        mag
                    }
                }
            })
            .collect();
        vectors.push(v);
    }
    let eigenvalues = (0..n).map(|m| 1.0 - 4.0 * m as f64 / (3 * n - 1) as f64).collect();
    Ok(KrawtchoukBasis { n, mode, eigenvalues, x0, vectors, k })
}

impl KrawtchoukBasis {
    pub fn krawtchouk(&self, t: usize, x: usize) -> &BigInt {
        &self.k[x][t]
    }

    /// `lambda_m` as the exact rational `(3n - 1 - 4m) / (3n - 1)`.
    pub fn eigenvalue_exact(&self, m: usize) -> BigRational {
        let d = 3 * self.n as i64 - 1;
        BigRational::new(BigInt::from(d - 4 * m as i64), BigInt::from(d))
    }

    /// `||x^(m) Q - lambda_m x^(m)||_inf / ||x^(m)||_inf` for every `m`.
    pub fn residuals(&self) -> Vec<f64> {
        let q = q_chain_f64(self.n).expect("n >= 2 checked at construction");
        self.vectors
            .iter()
            .zip(&self.eigenvalues)
            .map(|(v, &lam)| {
                let moved = q.step(v);
                let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                moved.iter().zip(v).fold(0.0f64, |a, (y, x)| a.max((y - lam * x).abs())) / scale
            })
            .collect()
    }

    /// The eigen-relation `3(n-j) K^(j-1)(m) + 2(j+1) K^(j)(m) + (j+1) K^(j+1)(m)
    /// = (3n-1-4m) K^(j)(m)` in integers, for all `j` and `m`.
    pub fn exact_residuals_vanish(&self) -> bool {
        let n = self.n;
        (0..n).all(|m| {
            let row = &self.k[m];
            (0..n).all(|j| {
                let mut lhs = BigInt::from(2 * (j + 1)) * &row[j];
                if j > 0 {
                    lhs += BigInt::from(3 * (n - j)) * &row[j - 1];
                }
                if j + 1 < n {
                    lhs += BigInt::from(j + 1) * &row[j + 1];
                }
                lhs == BigInt::from(3 * n as i64 - 1 - 4 * m as i64) * &row[j]
            })
        })
    }

    /// `sum_k K^(k)(i) K^(k)(j) / pi(k)`.
    fn raw_inner(&self, i: usize, j: usize) -> BigRational {
        let n = self.n;
        let mut acc = BigRational::zero();
        for k in 0..n {
            let num = &self.k[i][k] * &self.k[j][k] * big_pow(4, n - 1);
            acc += BigRational::new(num, big_binomial(n - 1, k) * big_pow(3, k));
        }
        acc
    }

    /// `(x^(i), x^(j))` exactly. `None` when the value is irrational, which
    /// only happens if `i != j` and orthogonality fails.
    pub fn inner_exact(&self, i: usize, j: usize) -> Option<BigRational> {
        let raw = self.raw_inner(i, j);
        if i == j {
            Some(x0_squared(self.n, i) * raw)
        } else if raw.is_zero() {
            Some(raw)
        } else {
            None
        }
    }

    pub fn inner_f64(&self, i: usize, j: usize) -> f64 {
        let pi = stationary_q(self.n).expect("n >= 2").to_f64();
        self.vectors[i].iter().zip(&self.vectors[j]).zip(&pi.values).map(|((a, b), p)| a * b / p).sum()
    }

    /// CSV with header `m,lambda,x0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,lambda,x0\n");
        for m in 0..self.n {
            let _ = writeln!(out, "{m},{},{}", format_float(self.eigenvalues[m]), format_float(self.x0[m]));
        }
        out
    }

    /// `S_m = sum_i K^(i)(m) f(i) / pi(i)`, so that `alpha_m = x^(m)(0) S_m`.
    fn projections(&self, f: &[BigRational]) -> Vec<BigRational> {
        let n = self.n;
        let inv_pi: Vec<BigRational> = (0..n)
            .map(|i| BigRational::new(big_pow(4, n - 1), big_binomial(n - 1, i) * big_pow(3, i)))
            .collect();
        let weighted: Vec<BigRational> = f.iter().zip(&inv_pi).map(|(a, b)| a * b).collect();
        (0..n)
            .map(|m| {
                self.k[m]
                    .iter()
                    .zip(&weighted)
                    .fold(BigRational::zero(), |acc, (kv, w)| acc + w * BigRational::from_integer(kv.clone()))
            })
            .collect()
    }
}

fn exact_values(n: usize, f0: &WeightDistribution) -> Result<Vec<BigRational>> {
    if f0.support_start != 0 || f0.values.len() != n {
        return Err(LabError::arg(format!(
            "expected a law on Q-chain sites 0..{n}, got support {:?}",
            f0.sites()
        )));
    }
    f0.values
        .iter()
        .map(|&v| BigRational::from_float(v).ok_or_else(|| LabError::domain("non-finite mass")))
        .collect()
}

/// `alpha_m = (x^(m), f0)` for every `m`.
pub fn expansion_coefficients(basis: &KrawtchoukBasis, f0: &WeightDistribution) -> Result<Vec<f64>> {
    let f = exact_values(basis.n, f0)?;
    Ok(basis
        .projections(&f)
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let sq = x0_squared(basis.n, m) * s * s;
            let mag = rational_to_f64(&sq).sqrt();
            if s.is_negative() {
                -mag
            } else {
                mag
            }
        })
        .collect())
}

/// `Q_t = sum_m alpha_m lambda_m^t x^(m)`, evaluated in exact arithmetic
/// and rounded once at the end.
pub fn q_t_spectral(n: usize, t: usize, f0: &WeightDistribution) -> Result<WeightDistribution> {
    let basis = eigen_system(n)?;
    q_t_with_basis(&basis, t, f0)
}

pub fn q_t_with_basis(basis: &KrawtchoukBasis, t: usize, f0: &WeightDistribution) -> Result<WeightDistribution> {
    let n = basis.n;
    let f = exact_values(n, f0)?;
    let coeff: Vec<BigRational> = basis
        .projections(&f)
        .into_iter()
        .enumerate()
        .map(|(m, s)| x0_squared(n, m) * s)
        .collect();
    let den = coeff.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let d = 3 * n as i64 - 1;
    let scaled: Vec<BigInt> = coeff
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let a = c.numer() * (&den / c.denom());
            a * num_traits::pow(BigInt::from(d - 4 * m as i64), t)
        })
        .collect();
    let total_den = den * num_traits::pow(BigInt::from(d), t);
    let values = (0..n)
        .map(|j| {
            let num = scaled.iter().enumerate().fold(BigInt::zero(), |acc, (m, s)| acc + s * &basis.k[m][j]);
            ratio_to_f64(&num, &total_den)
        })
        .collect();
    Ok(WeightDistribution { n, flavor: Flavor::QChain, support_start: 0, values })
}

/// `t`-fold application of the tridiagonal `Q` in doubles.
pub fn q_t_direct(n: usize, t: usize, f0: &WeightDistribution) -> Result<WeightDistribution> {
    exact_values(n, f0)?;
    let q = q_chain_f64(n)?;
    Ok(WeightDistribution { n, flavor: Flavor::QChain, support_start: 0, values: q.evolve(&f0.values, t) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxMixing {
    pub n: usize,
    pub t: usize,
    /// `(1 - 2^-n)(12/2^n)(Q_0, Q_t)`.
    pub inner_product: f64,
    /// `sum_k Q_t(k-1) 3n / (k 3^k)` on Hamming-weight labels.
    pub weighted_sum: f64,
    /// `(12/2^n) sum_m alpha_m^2 lambda_m^t`.
    pub spectral_sum: f64,
}

pub fn box_mixing(n: usize, t: usize) -> Result<BoxMixing> {
    let basis = eigen_system(n)?;
    box_mixing_with_basis(&basis, t)
}

pub fn box_mixing_with_basis(basis: &KrawtchoukBasis, t: usize) -> Result<BoxMixing> {
    let n = basis.n;
    let q0 = q_initial(n)?.to_f64();
    let qt = q_t_with_basis(basis, t, &q0)?;
    let pi = stationary_q(n)?.to_f64();
    let pair: f64 = q0.values.iter().zip(&qt.values).zip(&pi.values).map(|((a, b), p)| a * b / p).sum();
    let scale = 12.0 / 2f64.powi(n as i32);
    let inner_product = (1.0 - 0.5f64.powi(n as i32)) * scale * pair;
    let weighted_sum = qt.shifted().box_norm();

    let f = exact_values(n, &q0)?;
    let d = 3 * n as i64 - 1;
    let mut sum = BigRational::zero();
    for (m, s) in basis.projections(&f).iter().enumerate() {
        let lam_t = BigRational::new(
            num_traits::pow(BigInt::from(d - 4 * m as i64), t),
            num_traits::pow(BigInt::from(d), t),
        );
        sum += x0_squared(n, m) * s * s * lam_t;
    }
    let spectral_sum = scale * rational_to_f64(&sum);
    Ok(BoxMixing { n, t, inner_product, weighted_sum, spectral_sum })
}

/// `(t, weighted_sum)` for each requested depth.
pub fn mixing_curve(n: usize, ts: &[usize]) -> Result<Vec<BoxMixing>> {
    let basis = eigen_system(n)?;
    ts.iter().map(|&t| box_mixing_with_basis(&basis, t)).collect()
}

/// CSV with header `t,box_norm`.
pub fn mixing_curve_csv(curve: &[BoxMixing]) -> String {
    let mut out = String::from("t,box_norm\n");
    for b in curve {
        let _ = writeln!(out, "{},{}", b.t, format_float(b.weighted_sum));
    }
    out
}

/// `ceil(3 n ln n)`.
pub fn mixing_depth(n: usize) -> usize {
    (3.0 * n as f64 * (n as f64).ln()).ceil() as usize
}
