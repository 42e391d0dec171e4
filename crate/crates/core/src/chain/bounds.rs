//! Upper and lower bounds on the expected collision probability.

use serde::Serialize;
use statrs::function::factorial::binomial;

use super::weight::p_chain_f64;
use crate::error::{LabError, Result};

/// Slack parameter `delta` of the upper bound.
pub const DELTA: f64 = 0.5;

/// Step size of the grid used by [`calibrate_c`].
pub const C_GRID: f64 = 0.05;

/// `t > n ln(n / delta) / 2`.
pub fn min_admissible_t(n: usize) -> f64 {
    n as f64 * (n as f64 / DELTA).ln() / 2.0
}

/// `||P_t^(k)||_*` for the `k`-site sub-chain started from the weight law
/// of `S_0` restricted to a fixed set of `k` sites out of `n`:
/// `Pr[|S_0(H)| = j] = C(k,j) 2^(n-k) / (2^n - 1)` for `j >= 1`.
/// The empty chain has norm 1 by convention.
pub fn sub_chain_star_norm(n: usize, k: usize, t: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let chain = p_chain_f64(k);
    let norm = 2f64.powi((n - k) as i32) / (2f64.powi(n as i32) - 1.0);
    let mut f: Vec<f64> = (0..=k).map(|j| if j == 0 { 0.0 } else { binomial(k as u64, j as u64) * norm }).collect();
    f = chain.evolve(&f, t);
    f.iter().enumerate().skip(1).map(|(j, v)| v.abs() / 3f64.powi(j as i32)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub n: usize,
    pub t: usize,
    pub bound: f64,
    /// `C(n,m) e^(-tm/n) ||P_t^(n-m)||_*` for `m = 0..=n`.
    pub terms: Vec<f64>,
}

/// `2^-n + (1 + delta) sum_m C(n,m) e^(-tm/n) ||P_t^(n-m)||_*`.
pub fn coll_upper_bound_terms(n: usize, t: usize) -> Result<UpperBound> {
    if n < 2 {
        return Err(LabError::arg(format!("bound needs n >= 2, got {n}")));
    }
    let tmin = min_admissible_t(n);
    if (t as f64) <= tmin {
        return Err(LabError::domain(format!(
            "collision upper bound requires t > n ln(n/delta)/2 = {tmin:.3} (delta = {DELTA}), got t = {t}"
        )));
    }
    let terms: Vec<f64> = (0..=n)
        .map(|m| {
            binomial(n as u64, m as u64) * (-(t as f64) * m as f64 / n as f64).exp() * sub_chain_star_norm(n, n - m, t)
        })
        .collect();
    let bound = 0.5f64.powi(n as i32) + (1.0 + DELTA) * terms.iter().sum::<f64>();
    Ok(UpperBound { n, t, bound, terms })
}

pub fn coll_upper_bound(n: usize, t: usize) -> Result<f64> {
    Ok(coll_upper_bound_terms(n, t)?.bound)
}

/// `(1/2^n)(1 + e^(-3t/n))^n`.
pub fn coll_lower_bound(n: usize, t: usize) -> f64 {
    0.5f64.powi(n as i32) * (1.0 + (-3.0 * t as f64 / n as f64).exp()).powi(n as i32)
}

/// `t = ceil(c n ln^2 n)`.
pub fn depth_for(c: f64, n: usize) -> usize {
    let ln = (n as f64).ln();
    (c * n as f64 * ln * ln).ceil() as usize
}

/// Smallest `c` on a grid of step [`C_GRID`] in `(0, c_max]` for which the
/// upper bound at depth `ceil(c n ln^2 n)` is admissible and at most
/// `target`.
pub fn calibrate_c(n: usize, target: f64, c_max: f64) -> Result<f64> {
    let steps = (c_max / C_GRID).round() as usize;
    for i in 1..=steps {
        let c = i as f64 * C_GRID;
        let t = depth_for(c, n);
        if (t as f64) <= min_admissible_t(n) {
            continue;
        }
        if coll_upper_bound(n, t)? <= target {
            return Ok(c);
        }
    }
    Err(LabError::domain(format!("no c <= {c_max} brings the bound below {target} at n = {n}")))
}
