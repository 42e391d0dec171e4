//! Coupling of the weight chain `P` with the accelerated chain `Q`, the
//! decoupled bit-flip chain, and its Poissonized weight law.
//!
//! Here `Q` is used in Hamming-weight labels `{1..n}`:
//! `Q(x,x) = 2x/(3n-1)`, `Q(x,x+1) = 3(n-x)/(3n-1)`, `Q(x,x-1) = (x-1)/(3n-1)`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::weight::{binomial_pmf, p_chain_f64, Flavor, WeightDistribution};
use crate::error::{LabError, Result};

/// `alpha(x) = 1 - 2x(3n-1) / (5n(n-1))`.
pub fn alpha(n: usize, x: usize) -> f64 {
    let (n, x) = (n as f64, x as f64);
    1.0 - 2.0 * x * (3.0 * n - 1.0) / (5.0 * n * (n - 1.0))
}

/// `beta(x) = (2x(3n-1) - 5n(n-1)) / (4x^2)`, meaningful where `alpha(x) <= 0`.
pub fn beta(n: usize, x: usize) -> f64 {
    let (n, x) = (n as f64, x as f64);
    (2.0 * x * (3.0 * n - 1.0) - 5.0 * n * (n - 1.0)) / (4.0 * x * x)
}

/// Number of failures before the first success, by inverse CDF. The
/// success probability is clamped to `[1e-12, 1]`.
pub fn geometric_failures<R: Rng + ?Sized>(success: f64, rng: &mut R) -> u64 {
    let p = success.clamp(1e-12, 1.0);
    if p >= 1.0 {
        return 0;
    }
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / (-p).ln_1p()).floor() as u64
}

fn q_step<R: Rng + ?Sized>(n: usize, x: usize, rng: &mut R) -> usize {
    let den = (3 * n - 1) as f64;
    let up = (3 * (n - x)) as f64 / den;
    let down = (x - 1) as f64 / den;
    let u: f64 = rng.random();
    if u < up {
        x + 1
    } else if u < up + down {
        x - 1
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledTrace {
    pub y_path: Vec<usize>,
    pub x_path: Vec<usize>,
    pub t_left: u64,
    pub t_right: u64,
    /// Consecutive equal right-region visits of the `Y` path.
    pub right_stalls: u64,
    pub x_time: u64,
}

struct Coupler {
    n: usize,
    trace: CoupledTrace,
}

impl Coupler {
    fn new(n: usize, x0: usize) -> Self {
        Coupler {
            n,
            trace: CoupledTrace {
                y_path: vec![x0],
                x_path: vec![x0],
                t_left: 0,
                t_right: 0,
                right_stalls: 0,
                x_time: 0,
            },
        }
    }

    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.n;
        let tr = &mut self.trace;
        let y = *tr.y_path.last().expect("path starts non-empty");
        let next = q_step(n, y, rng);
        let a = alpha(n, y);
        if a > 0.0 {
            // X waits a geometric number of steps before following Y.
            let extra = geometric_failures(1.0 - a, rng);
            tr.x_path.extend(std::iter::repeat_n(y, extra as usize));
            tr.x_path.push(next);
            tr.t_left += extra;
        } else if next != y {
            tr.x_path.push(next);
        } else {
            tr.right_stalls += 1;
            if rng.random::<f64>() < beta(n, y) {
                tr.t_right += 1;
            } else {
                tr.x_path.push(y);
            }
        }
        tr.y_path.push(next);
        let s = (tr.y_path.len() - 1) as u64;
        tr.x_time = s + tr.t_left - tr.t_right;
    }
}

fn check_start(n: usize, x0: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::arg(format!("coupling needs n >= 2, got {n}")));
    }
    if x0 < 1 || x0 > n {
        return Err(LabError::arg(format!("start {x0} outside 1..={n}")));
    }
    Ok(())
}

/// Runs `s` steps of `Y` and the coupled `X` path.
pub fn coupled_walk<R: Rng + ?Sized>(n: usize, s: usize, x0: usize, rng: &mut R) -> Result<CoupledTrace> {
    check_start(n, x0)?;
    let mut c = Coupler::new(n, x0);
    for _ in 0..s {
        c.advance(rng);
    }
    Ok(c.trace)
}

/// `X_t` of the coupled process, running `Y` until the `X` path is long
/// enough.
pub fn coupled_x_at<R: Rng + ?Sized>(n: usize, x0: usize, t: usize, rng: &mut R) -> Result<usize> {
    check_start(n, x0)?;
    let mut c = Coupler::new(n, x0);
    while c.trace.x_path.len() <= t {
        c.advance(rng);
    }
    Ok(c.trace.x_path[t])
}

/// Direct simulation of the `P` chain for `t` steps.
pub fn simulate_p<R: Rng + ?Sized>(n: usize, x0: usize, t: usize, rng: &mut R) -> Result<usize> {
    check_start(n, x0)?;
    let chain = p_chain_f64(n);
    let mut x = x0;
    for _ in 0..t {
        let u: f64 = rng.random();
        if u < chain.up[x] {
            x += 1;
        } else if u < chain.up[x] + chain.down[x] {
            x -= 1;
        }
    }
    Ok(x)
}

/// Direct simulation of `Q` (weight labels) for `t` steps.
pub fn simulate_q<R: Rng + ?Sized>(n: usize, x0: usize, t: usize, rng: &mut R) -> Result<usize> {
    check_start(n, x0)?;
    let mut x = x0;
    for _ in 0..t {
        x = q_step(n, x, rng);
    }
    Ok(x)
}

/// One step of the decoupled chain: a uniform position; `0 -> 1`, and
/// `1 -> 0` with probability 1/3.
pub fn decoupled_step<R: Rng + ?Sized>(word: &mut [bool], rng: &mut R) -> Result<()> {
    if word.is_empty() {
        return Err(LabError::arg("decoupled chain needs n >= 1"));
    }
    let i = rng.random_range(0..word.len());
    if !word[i] {
        word[i] = true;
    } else if rng.random_range(0..3) == 0 {
        word[i] = false;
    }
    Ok(())
}

/// Weight of the decoupled chain after `t` steps from weight `z`.
pub fn simulate_decoupled_weight<R: Rng + ?Sized>(n: usize, z: usize, t: u64, rng: &mut R) -> Result<usize> {
    if n == 0 || z > n {
        return Err(LabError::arg(format!("need 0 <= z <= n and n >= 1, got z = {z}, n = {n}")));
    }
    let mut word: Vec<bool> = (0..n).map(|i| i < z).collect();
    for _ in 0..t {
        decoupled_step(&mut word, rng)?;
    }
    Ok(word.iter().filter(|&&b| b).count())
}

/// Weight after `Pois(tau)` decoupled steps from weight `z`.
pub fn simulate_poissonized<R: Rng + ?Sized>(n: usize, z: usize, tau: f64, rng: &mut R) -> Result<usize> {
    let steps = if tau > 0.0 {
        Poisson::new(tau).map_err(|e| LabError::domain(e.to_string()))?.sample(rng) as u64
    } else {
        0
    };
    simulate_decoupled_weight(n, z, steps, rng)
}

fn decay(n: usize, tau: f64) -> f64 {
    (-4.0 * tau / (3.0 * n as f64)).exp()
}

/// `nu_tau = z e^(-4 tau/3n) + (3/4) n (1 - e^(-4 tau/3n))`.
pub fn nu_tau(n: usize, z: usize, tau: f64) -> f64 {
    let e = decay(n, tau);
    z as f64 * e + 0.75 * n as f64 * (1.0 - e)
}

/// `Bin(n - z, alpha_tau) * Bin(z, beta_tau)` with
/// `alpha_tau = (3/4)(1 - e^(-4 tau/3n))`, `beta_tau = 3/4 + e^(-4 tau/3n)/4`.
pub fn poissonized_dist(n: usize, z: usize, tau: f64) -> Result<WeightDistribution> {
    if z > n || n == 0 {
        return Err(LabError::arg(format!("need 0 <= z <= n, got z = {z}, n = {n}")));
    }
    if tau.is_nan() || tau < 0.0 {
        return Err(LabError::domain(format!("tau must be >= 0, got {tau}")));
    }
    let e = decay(n, tau);
    let a = binomial_pmf(n - z, 0.75 * (1.0 - e));
    let b = binomial_pmf(z, 0.75 + 0.25 * e);
    let mut values = vec![0.0; n + 1];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            values[i + j] += pa * pb;
        }
    }
    Ok(WeightDistribution { n, flavor: Flavor::Decoupled, support_start: 0, values })
}

/// `sqrt(tau) e exp(-(nu_tau - x)^2 / (2 nu_tau))`, the lower-tail bound
/// for the accelerated chain started at `z`.
pub fn lower_tail_bound(n: usize, z: usize, tau: f64, x: f64) -> f64 {
    let nu = nu_tau(n, z, tau);
    tau.sqrt() * std::f64::consts::E * (-(nu - x).powi(2) / (2.0 * nu)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use crate::stats::{histogram, total_variation};

    #[test]
    fn alpha_beta_values() {
        let n = 30;
        let expect = 1.0 - 2.0 * 89.0 / (5.0 * 30.0 * 29.0);
        assert!((alpha(n, 1) - expect).abs() < 1e-15);
        assert!((alpha(1000, 1) - (1.0 - 6.0 / 5000.0)).abs() < 1e-5);
        for x in 25..=30 {
            if alpha(n, x) <= 0.0 {
                assert!(beta(n, x) > 0.0);
            }
            assert!(beta(n, x) <= 0.25 + 6.0 / (5.0 * n as f64));
        }
    }

    #[test]
    fn geometric_mean() {
        let mut rng = trial_rng(11, 0);
        let p = 0.3;
        let m = 200_000;
        let total: u64 = (0..m).map(|_| geometric_failures(p, &mut rng)).sum();
        let mean = total as f64 / m as f64;
        let expect = (1.0 - p) / p;
        let sd = ((1.0 - p) / (p * p) / m as f64).sqrt();
        assert!((mean - expect).abs() < 4.0 * sd);
        assert_eq!(geometric_failures(1.0, &mut rng), 0);
        assert!(geometric_failures(0.0, &mut rng) < u64::MAX);
    }

    #[test]
    fn trace_bookkeeping() {
        let mut rng = trial_rng(12, 0);
        for x0 in [1usize, 10, 20] {
            let tr = coupled_walk(20, 300, x0, &mut rng).unwrap();
            assert_eq!(tr.y_path.len(), 301);
            assert_eq!(tr.x_time, 300 + tr.t_left - tr.t_right);
            assert_eq!(tr.x_path.len() as u64, tr.x_time + 1);
            assert!(tr.t_right <= tr.right_stalls);
            assert_eq!(tr.x_path.last(), tr.y_path.last());
            for w in tr.x_path.windows(2) {
                assert!(w[0].abs_diff(w[1]) <= 1);
            }
        }
        assert!(coupled_walk(20, 1, 0, &mut rng).is_err());
    }

    #[test]
    fn coupled_marginal_matches_p_chain() {
        let (n, x0, t, runs) = (12, 2, 25, 40_000u64);
        let a: Vec<usize> = (0..runs).map(|i| coupled_x_at(n, x0, t, &mut trial_rng(13, i)).unwrap()).collect();
        let b: Vec<usize> = (0..runs).map(|i| simulate_p(n, x0, t, &mut trial_rng(14, i)).unwrap()).collect();
        let tv = total_variation(&histogram(&a, n), &histogram(&b, n));
        assert!(tv < 0.03, "tv = {tv}");
    }

    #[test]
    fn decoupled_examples() {
        let mut rng = trial_rng(15, 0);
        let mut w = vec![false; 8];
        decoupled_step(&mut w, &mut rng).unwrap();
        assert_eq!(w.iter().filter(|&&b| b).count(), 1);
        let trials = 60_000;
        let mut drops = 0;
        for _ in 0..trials {
            let mut w = vec![true; 5];
            decoupled_step(&mut w, &mut rng).unwrap();
            drops += usize::from(w.iter().filter(|&&b| b).count() == 4);
        }
        let p = drops as f64 / trials as f64;
        let sd = (2.0 / 9.0 / trials as f64).sqrt();
        assert!((p - 1.0 / 3.0).abs() < 3.0 * sd);
    }

    #[test]
    fn poissonized_limits_and_mean() {
        let d = poissonized_dist(10, 4, 0.0).unwrap();
        assert_eq!(d.at(4), 1.0);
        let far = poissonized_dist(10, 4, 1e4).unwrap();
        let bin = binomial_pmf(10, 0.75);
        for k in 0..=10 {
            assert!((far.at(k) - bin[k]).abs() < 1e-12);
        }
        let d = poissonized_dist(20, 3, 10.0).unwrap();
        d.check_normalized(1e-12).unwrap();
        assert!((d.mean() - nu_tau(20, 3, 10.0)).abs() < 1e-12);
    }
}
