//! Weight chains on Hamming-weight sites and the distributions they carry.
//!
//! `P` is the weight chain of the Pauli-string process on `{0..n}`. `Q` is
//! the affine partially accelerated chain, stored on `{0..n-1}` (site `i`
//! is Hamming weight `i + 1`). [`WeightDistribution::shifted`] and
//! [`WeightDistribution::unshifted`] are the only places that offset is
//! handled.

use std::fmt::Write as _;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exact::{big_binomial, big_pow, rational_to_f64};
use crate::stats::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    PChain,
    QChain,
    Decoupled,
}

/// A law on consecutive chain sites `support_start ..`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightDistribution<T = f64> {
    pub n: usize,
    pub flavor: Flavor,
    pub support_start: usize,
    pub values: Vec<T>,
}

impl<T: Clone + Zero> WeightDistribution<T> {
    /// Value at site `k` (zero outside the support).
    pub fn at(&self, k: usize) -> T {
        k.checked_sub(self.support_start)
            .and_then(|i| self.values.get(i).cloned())
            .unwrap_or_else(T::zero)
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        self.support_start..self.support_start + self.values.len()
    }

    pub fn total(&self) -> T {
        self.values.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// Q-chain labels `i` to Hamming weights `i + 1`.
    pub fn shifted(&self) -> Self {
        WeightDistribution { support_start: self.support_start + 1, ..self.clone() }
    }

    /// Hamming weights `k` back to Q-chain labels `k - 1`.
    pub fn unshifted(&self) -> Result<Self> {
        let start = self
            .support_start
            .checked_sub(1)
            .ok_or_else(|| LabError::arg("cannot shift a law supported at 0"))?;
        Ok(WeightDistribution { support_start: start, ..self.clone() })
    }
}

impl WeightDistribution<BigRational> {
    pub fn to_f64(&self) -> WeightDistribution<f64> {
        WeightDistribution {
            n: self.n,
            flavor: self.flavor,
            support_start: self.support_start,
            values: self.values.iter().map(rational_to_f64).collect(),
        }
    }
}

impl WeightDistribution<f64> {
    /// `sum_{k >= 1} |f(k)| / 3^k` over the sites carried.
    pub fn star_norm(&self) -> f64 {
        self.sites().filter(|&k| k >= 1).map(|k| self.at(k).abs() / 3f64.powi(k as i32)).sum()
    }

    /// `sum_{k >= 1} |f(k)| * 3n / (k 3^k)`.
    pub fn box_norm(&self) -> f64 {
        let n = self.n as f64;
        self.sites()
            .filter(|&k| k >= 1)
            .map(|k| self.at(k).abs() * 3.0 * n / (k as f64 * 3f64.powi(k as i32)))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.sites().map(|k| k as f64 * self.at(k)).sum()
    }

    /// CSV with header `k,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value\n");
        for k in self.sites() {
            let _ = writeln!(out, "{k},{}", format_float(self.at(k)));
        }
        out
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        if self.values.iter().any(|&v| v < -tol || !v.is_finite()) {
            return Err(LabError::NumericalIntegrity("negative or non-finite mass".into()));
        }
        let total: f64 = self.total();
        if (total - 1.0).abs() > tol {
            return Err(LabError::NumericalIntegrity(format!("mass {total} differs from 1")));
        }
        Ok(())
    }
}

/// `sum_k |f(k)| / 3^k` for a vector indexed from `k = 1`.
pub fn star_norm(f_from_one: &[f64]) -> f64 {
    f_from_one.iter().enumerate().map(|(i, v)| v.abs() / 3f64.powi(i as i32 + 1)).sum()
}

/// `sum_k |f(k)| * 3n / (k 3^k)` for a vector indexed from `k = 1`.
pub fn box_norm(f_from_one: &[f64], n: usize) -> f64 {
    let n = n as f64;
    f_from_one
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let k = (i + 1) as f64;
            v.abs() * 3.0 * n / (k * 3f64.powi(i as i32 + 1))
        })
        .sum()
}

/// Tridiagonal chain on sites `start ..= start + len - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain<T> {
    pub start: usize,
    pub up: Vec<T>,
    pub down: Vec<T>,
    pub stay: Vec<T>,
}

impl<T> BirthDeathChain<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + PartialEq,
{
    pub fn len(&self) -> usize {
        self.stay.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stay.is_empty()
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len()
    }

    /// Dense matrix indexed by position within the chain.
    pub fn matrix(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut m = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.stay[i].clone();
            if i + 1 < n {
                m[i][i + 1] = self.up[i].clone();
            }
            if i > 0 {
                m[i][i - 1] = self.down[i].clone();
            }
        }
        m
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.len())
            .map(|i| self.up[i].clone() + self.down[i].clone() + self.stay[i].clone())
            .collect()
    }

    pub fn rows_sum_to_one(&self) -> bool {
        self.row_sums().iter().all(|s| s == &T::one())
    }

    /// One step of the row-vector evolution `f -> f P`.
    pub fn step(&self, f: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(f.len(), n, "distribution length must match chain");
        (0..n)
            .map(|j| {
                let mut acc = f[j].clone() * self.stay[j].clone();
                if j > 0 {
                    acc = acc + f[j - 1].clone() * self.up[j - 1].clone();
                }
                if j + 1 < n {
                    acc = acc + f[j + 1].clone() * self.down[j + 1].clone();
                }
                acc
            })
            .collect()
    }

    pub fn evolve(&self, f: &[T], t: usize) -> Vec<T> {
        let mut cur = f.to_vec();
        for _ in 0..t {
            cur = self.step(&cur);
        }
        cur
    }
}

impl BirthDeathChain<BigRational> {
    pub fn to_f64(&self) -> BirthDeathChain<f64> {
        let conv = |v: &Vec<BigRational>| v.iter().map(rational_to_f64).collect();
        BirthDeathChain {
            start: self.start,
            up: conv(&self.up),
            down: conv(&self.down),
            stay: conv(&self.stay),
        }
    }

    /// `pi(k) P(k, k+1) = pi(k+1) P(k+1, k)` for all adjacent pairs.
    pub fn detailed_balance(&self, pi: &[BigRational]) -> bool {
        (0..self.len().saturating_sub(1)).all(|i| &pi[i] * &self.up[i] == &pi[i + 1] * &self.down[i + 1])
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::arg(format!("chain needs n >= 2, got {n}")));
    }
    Ok(())
}

/// The weight chain `P` on `{0..n}`.
pub fn p_transition(n: usize) -> Result<BirthDeathChain<BigRational>> {
    check_n(n)?;
    let den = BigInt::from(5 * n * (n - 1));
    let mut up = Vec::with_capacity(n + 1);
    let mut down = Vec::with_capacity(n + 1);
    let mut stay = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let u = BigRational::new(BigInt::from(6 * k * (n - k)), den.clone());
        let d = BigRational::new(BigInt::from(2 * k * k.saturating_sub(1)), den.clone());
        let s = BigRational::one() - BigRational::new(BigInt::from(2 * k * (3 * n - 2 * k - 1)), den.clone());
        up.push(u);
        down.push(d);
        stay.push(s);
    }
    Ok(BirthDeathChain { start: 0, up, down, stay })
}

/// `P` as doubles, for any number of sites. Chains with fewer than two
/// sites never move.
pub fn p_chain_f64(n: usize) -> BirthDeathChain<f64> {
    if n < 2 {
        return BirthDeathChain { start: 0, up: vec![0.0; n + 1], down: vec![0.0; n + 1], stay: vec![1.0; n + 1] };
    }
    let den = (5 * n * (n - 1)) as f64;
    let mut chain = BirthDeathChain { start: 0, up: vec![], down: vec![], stay: vec![] };
    for k in 0..=n {
        let u = (6 * k * (n - k)) as f64 / den;
        let d = (2 * k * k.saturating_sub(1)) as f64 / den;
        chain.up.push(u);
        chain.down.push(d);
        chain.stay.push(1.0 - (2 * k * (3 * n - 2 * k - 1)) as f64 / den);
    }
    chain
}

/// `pi(k) = C(n,k) 3^k / (4^n - 1)` on `{1..n}`.
pub fn stationary_p(n: usize) -> Result<WeightDistribution<BigRational>> {
    if n < 1 {
        return Err(LabError::arg("stationary law needs n >= 1"));
    }
    let den: BigInt = big_pow(4, n) - 1u32;
    let values = (1..=n)
        .map(|k| BigRational::new(big_binomial(n, k) * big_pow(3, k), den.clone()))
        .collect();
    Ok(WeightDistribution { n, flavor: Flavor::PChain, support_start: 1, values })
}

/// Weight law of a uniform string in `{0,3}^n \ 0^n`: `C(n,k)/(2^n - 1)`.
pub fn p_initial(n: usize) -> Result<WeightDistribution<BigRational>> {
    if n < 1 {
        return Err(LabError::arg("initial law needs n >= 1"));
    }
    let den: BigInt = big_pow(2, n) - 1u32;
    let values = (1..=n).map(|k| BigRational::new(big_binomial(n, k), den.clone())).collect();
    Ok(WeightDistribution { n, flavor: Flavor::PChain, support_start: 1, values })
}

/// The accelerated chain `Q` on `{0..n-1}`:
/// `p_i = 3(n-i-1)/(3n-1)`, `q_i = i/(3n-1)`, `r_i = 2(i+1)/(3n-1)`.
pub fn q_transition(n: usize) -> Result<BirthDeathChain<BigRational>> {
    check_n(n)?;
    let den = BigInt::from(3 * n - 1);
    let mut chain = BirthDeathChain { start: 0, up: vec![], down: vec![], stay: vec![] };
    for i in 0..n {
        chain.up.push(BigRational::new(BigInt::from(3 * (n - i - 1)), den.clone()));
        chain.down.push(BigRational::new(BigInt::from(i), den.clone()));
        chain.stay.push(BigRational::new(BigInt::from(2 * (i + 1)), den.clone()));
    }
    Ok(chain)
}

pub fn q_chain_f64(n: usize) -> Result<BirthDeathChain<f64>> {
    check_n(n)?;
    let den = (3 * n - 1) as f64;
    let mut chain = BirthDeathChain { start: 0, up: vec![], down: vec![], stay: vec![] };
    for i in 0..n {
        chain.up.push((3 * (n - i - 1)) as f64 / den);
        chain.down.push(i as f64 / den);
        chain.stay.push((2 * (i + 1)) as f64 / den);
    }
    Ok(chain)
}

/// `pi_Q(i) = C(n-1,i) 3^i / 4^(n-1)` on `{0..n-1}`.
pub fn stationary_q(n: usize) -> Result<WeightDistribution<BigRational>> {
    check_n(n)?;
    let den = big_pow(4, n - 1);
    let values = (0..n)
        .map(|i| BigRational::new(big_binomial(n - 1, i) * big_pow(3, i), den.clone()))
        .collect();
    Ok(WeightDistribution { n, flavor: Flavor::QChain, support_start: 0, values })
}

/// `Q_0(i) = C(n, i+1) / (2^n - 1)`, the initial law shifted to Q labels.
pub fn q_initial(n: usize) -> Result<WeightDistribution<BigRational>> {
    check_n(n)?;
    let mut d = p_initial(n)?.unshifted()?;
    d.flavor = Flavor::QChain;
    Ok(d)
}

/// Binomial pmf `C(n,k) p^k (1-p)^(n-k)` for all `k`, computed by the
/// multiplicative recurrence from the larger end to avoid underflow.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    use statrs::distribution::{Binomial, Discrete};
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let b = Binomial::new(p, n as u64).expect("valid binomial parameters");
    (0..=n as u64).map(|k| b.pmf(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn p_chain_examples() {
        let p = p_transition(2).unwrap();
        assert!(p.stay[0].is_one());
        assert_eq!(p.up[1], ratio(3, 5));
        assert!(p_transition(10).unwrap().rows_sum_to_one());
        assert!(p_transition(1).is_err());
        let m = p_transition(3).unwrap().matrix();
        assert_eq!(m.len(), 4);
        assert!(m[0][1].is_zero());
    }

    #[test]
    fn stationary_p_examples() {
        let pi = stationary_p(2).unwrap();
        assert_eq!(pi.values, vec![ratio(6, 15), ratio(9, 15)]);
        assert!(stationary_p(1).unwrap().values[0].is_one());
    }

    #[test]
    fn p_stationarity_and_balance() {
        for n in 2..=20 {
            let chain = p_transition(n).unwrap();
            let pi = stationary_p(n).unwrap();
            assert!(pi.total().is_one());
            let mut full = vec![BigRational::zero()];
            full.extend(pi.values.iter().cloned());
            assert_eq!(chain.step(&full), full, "pi P != pi at n={n}");
            assert!(chain.detailed_balance(&full), "detailed balance at n={n}");
        }
    }

    #[test]
    fn q_chain_examples() {
        let q = q_transition(10).unwrap();
        assert!(q.rows_sum_to_one());
        assert_eq!(q.stay[0], ratio(2, 29));
        for n in 2..=20 {
            let chain = q_transition(n).unwrap();
            let pi = stationary_q(n).unwrap();
            assert!(pi.total().is_one());
            assert_eq!(chain.step(&pi.values), pi.values);
            assert!(chain.detailed_balance(&pi.values));
        }
    }

    #[test]
    fn initial_laws_normalized() {
        for n in 2..=12 {
            assert!(p_initial(n).unwrap().total().is_one());
            let q0 = q_initial(n).unwrap();
            assert_eq!(q0.support_start, 0);
            assert_eq!(q0.at(0), ratio(n as i64, (1i64 << n) - 1));
        }
    }

    #[test]
    fn float_chains_match_exact() {
        for n in [2usize, 5, 11] {
            let close = |a: &BirthDeathChain<f64>, b: &BirthDeathChain<f64>| {
                let flat = |c: &BirthDeathChain<f64>| [c.up.clone(), c.down.clone(), c.stay.clone()].concat();
                flat(a).iter().zip(flat(b)).all(|(x, y)| (x - y).abs() < 1e-15)
            };
            assert!(close(&p_transition(n).unwrap().to_f64(), &p_chain_f64(n)));
            assert!(close(&q_transition(n).unwrap().to_f64(), &q_chain_f64(n).unwrap()));
        }
        let one = p_chain_f64(1);
        assert_eq!(one.evolve(&[0.25, 0.75], 9), vec![0.25, 0.75]);
    }

    #[test]
    fn norm_examples() {
        assert!((star_norm(&[1.0]) - 1.0 / 3.0).abs() < 1e-16);
        for n in [1usize, 5, 40] {
            assert!(star_norm(&vec![1.0; n]) <= 0.5);
        }
        for k in 1..=6usize {
            let mut f = vec![0.0; 6];
            f[k - 1] = 1.0;
            let expect = 18.0 / (k as f64 * 3f64.powi(k as i32));
            assert!((box_norm(&f, 6) - expect).abs() < 1e-15);
        }
        let pi = stationary_p(7).unwrap().to_f64();
        assert!((pi.star_norm() - 1.0 / 129.0).abs() < 1e-15);
        assert!((pi.star_norm() - star_norm(&pi.values)).abs() < 1e-18);
        assert!((pi.box_norm() - box_norm(&pi.values, 7)).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let d = stationary_p(2).unwrap().to_f64();
        let csv = d.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,value");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
        assert_eq!(lines[2].split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.6);
    }

    #[test]
    fn shift_round_trip() {
        let q0 = q_initial(6).unwrap();
        assert_eq!(q0.shifted().unshifted().unwrap(), q0);
        assert_eq!(q0.shifted().at(1), q0.at(0));
        assert!(q0.unshifted().is_err());
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let v = binomial_pmf(30, 0.75);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(binomial_pmf(3, 0.0), vec![1.0, 0.0, 0.0, 0.0]);
    }
}
