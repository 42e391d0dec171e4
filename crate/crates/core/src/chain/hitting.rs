//! Expected first-passage times of the weight chain `P`.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingTime {
    pub n: usize,
    pub l: usize,
    /// `E_{l-1}(T_l)` from the first-passage recurrence.
    pub recurrence: f64,
    /// `(1/q_l) sum_{i<l} pi(i)/pi(l)`.
    pub stationary_form: f64,
    /// `(5/2) sum_{i<l} C(n,i) / (C(n-2,l-2) 3^(l-i))`.
    pub closed_form: f64,
    /// Geometric-sum upper bound.
    pub e_l_bound: f64,
    /// `(5/6) n (1/(l-1) + 1/(3n/4 - l + 7/4))`, only meaningful for `l < 3n/4`.
    pub simplified_bound: f64,
}

fn up(n: usize, k: usize) -> f64 {
    (6 * k * (n - k)) as f64 / (5 * n * (n - 1)) as f64
}

fn down(n: usize, k: usize) -> f64 {
    (2 * k * k.saturating_sub(1)) as f64 / (5 * n * (n - 1)) as f64
}

fn check(n: usize, l: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::arg(format!("chain needs n >= 2, got {n}")));
    }
    if l < 1 || l > n {
        return Err(LabError::arg(format!("level {l} outside 1..={n}")));
    }
    Ok(())
}

/// `E_{l-1}(T_l)` for `l = 1..=n`, by
/// `E_{l-1}(T_l) = (1 + q_{l-1} E_{l-2}(T_{l-1})) / p_{l-1}`.
/// The entry for `l = 1` is 0 by convention (site 0 is absorbing).
pub fn one_step_times(n: usize) -> Result<Vec<f64>> {
    check(n, 1)?;
    let mut out = vec![0.0; n + 1];
    for l in 2..=n {
        let prev = if l >= 3 { out[l - 1] } else { 0.0 };
        out[l] = (1.0 + down(n, l - 1) * prev) / up(n, l - 1);
    }
    Ok(out)
}

fn ln_pi(n: usize, k: usize) -> f64 {
    ln_binomial(n as u64, k as u64) + k as f64 * 3f64.ln()
}

pub fn hitting_time(n: usize, l: usize) -> Result<HittingTime> {
    check(n, l)?;
    let recurrence = one_step_times(n)?[l];
    if l == 1 {
        return Ok(HittingTime {
            n,
            l,
            recurrence,
            stationary_form: 0.0,
            closed_form: 0.0,
            e_l_bound: 0.0,
            simplified_bound: 0.0,
        });
    }
    let stationary_form = (1..l).map(|i| (ln_pi(n, i) - ln_pi(n, l)).exp()).sum::<f64>() / down(n, l);
    let ln3 = 3f64.ln();
    let lb = ln_binomial((n - 2) as u64, (l - 2) as u64);
    let closed_form = 2.5
        * (1..l)
            .map(|i| (ln_binomial(n as u64, i as u64) - lb - (l - i) as f64 * ln3).exp())
            .sum::<f64>();
    let lead = (ln_binomial(n as u64, (l - 1) as u64) - lb).exp();
    let r = (l - 1) as f64 / (3.0 * (n - l + 2) as f64);
    let e_l_bound = 5.0 / 6.0 * (1..l).map(|i| lead * r.powi((l - i - 1) as i32)).sum::<f64>();
    let nf = n as f64;
    let simplified_bound = 5.0 / 6.0 * nf * (1.0 / (l - 1) as f64 + 1.0 / (0.75 * nf - l as f64 + 1.75));
    Ok(HittingTime { n, l, recurrence, stationary_form, closed_form, e_l_bound, simplified_bound })
}

/// `E_1[T_target] = sum_{l=2}^{target} E_{l-1}(T_l)`.
pub fn cumulative_hitting_time(n: usize, target: usize) -> Result<f64> {
    check(n, target)?;
    Ok(one_step_times(n)?[2..=target.max(1)].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use rand::Rng;

    #[test]
    fn two_site_example() {
        let h = hitting_time(2, 2).unwrap();
        assert!((h.recurrence - 5.0 / 3.0).abs() < 1e-14);
        assert!((h.closed_form - 5.0 / 3.0).abs() < 1e-12);
        assert!((h.stationary_form - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(hitting_time(5, 1).unwrap().recurrence, 0.0);
        assert!(hitting_time(5, 6).is_err());
        assert!(hitting_time(5, 0).is_err());
    }

    #[test]
    fn three_forms_agree_and_bound_holds() {
        for n in [5usize, 12, 40, 200] {
            for l in 2..=n {
                let h = hitting_time(n, l).unwrap();
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
                assert!(rel(h.recurrence, h.closed_form) < 1e-9, "n={n} l={l}");
                assert!(rel(h.recurrence, h.stationary_form) < 1e-9, "n={n} l={l}");
                assert!(h.recurrence <= h.e_l_bound * (1.0 + 1e-9), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn monte_carlo_two_sites() {
        let chain = crate::chain::weight::p_chain_f64(2);
        let trials = 50_000u64;
        let samples: Vec<f64> = (0..trials)
            .map(|i| {
                let mut rng = trial_rng(21, i);
                let (mut x, mut steps) = (1usize, 0u32);
                while x < 2 {
                    let u: f64 = rng.random();
                    if u < chain.up[x] {
                        x += 1;
                    } else if u < chain.up[x] + chain.down[x] {
                        x -= 1;
                    }
                    steps += 1;
                }
                f64::from(steps)
            })
            .collect();
        let est = crate::stats::Estimate::from_samples(&samples);
        assert!(est.within_sigmas(5.0 / 3.0, 3.0), "{est:?}");
    }

    #[test]
    fn cumulative_is_sum() {
        let n = 30;
        let steps = one_step_times(n).unwrap();
        let c = cumulative_hitting_time(n, 10).unwrap();
        assert!((c - steps[2..=10].iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(cumulative_hitting_time(n, 1).unwrap(), 0.0);
    }
}
