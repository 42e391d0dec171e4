//! Monte Carlo estimators over sampled circuits.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{sample_circuit, CircuitRealization, EnsembleKind, EnsembleSpec};
use super::haar::haar_u4;
use super::state::Statevector;
use crate::chain::process::random_pair;
use crate::error::{LabError, Result};
use crate::rng::trial_rng;
use crate::stats::{format_float, Estimate};

pub const NORM_TOL: f64 = 1e-8;
pub const MIN_TRIALS: usize = 100;
pub const MAX_MONOMIAL_QUBITS: usize = 8;
pub const MAX_SCRAMBLE_QUBITS: usize = 12;

fn check_norm(state: &Statevector) -> Result<()> {
    let drift = (state.norm_sqr() - 1.0).abs();
    if drift > NORM_TOL || !drift.is_finite() {
        return Err(LabError::NumericalIntegrity(format!("state norm drifted by {drift:e}")));
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(LabError::arg(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// `sum_x |<x|C|0>|^4`.
pub fn collision(c: &CircuitRealization) -> Result<f64> {
    let s = c.output_state()?;
    check_norm(&s)?;
    Ok(s.collision())
}

/// Runs `f` on trials `0..trials` with their own streams and collects in
/// trial order.
fn per_trial<T, F>(trials: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut crate::rng::LabRng) -> Result<T> + Sync,
{
    (0..trials as u64).into_par_iter().map(|i| f(&mut trial_rng(seed, i))).collect()
}

pub fn mc_expected_collision(spec: &EnsembleSpec, trials: usize, seed: u64) -> Result<Estimate> {
    check_trials(trials)?;
    let spec = EnsembleSpec::new(spec.kind, spec.n)?;
    let xs = per_trial(trials, seed, |rng| collision(&sample_circuit(&spec, rng)?))?;
    Ok(Estimate::from_samples(&xs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionCurve {
    pub n: usize,
    /// Entry `s` estimates the expected collision after `s` gates.
    pub points: Vec<Estimate>,
}

impl CollisionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,mean,stderr\n");
        for (s, e) in self.points.iter().enumerate() {
            out.push_str(&format!("{s},{},{}\n", format_float(e.mean), format_float(e.stderr)));
        }
        out
    }
}

/// Complete-graph collision for every depth `0..=s_max`. Each trial draws
/// one circuit of `s_max` gates and records the collision after every
/// prefix, so the marginal at depth `s` is exactly the depth-`s` ensemble.
pub fn mc_collision_curve(n: usize, s_max: usize, trials: usize, seed: u64) -> Result<CollisionCurve> {
    check_trials(trials)?;
    EnsembleSpec::complete_graph(n, s_max)?;
    let rows = per_trial(trials, seed, |rng| {
        let mut state = Statevector::zero(n)?;
        let mut row = Vec::with_capacity(s_max + 1);
        row.push(state.collision());
        for _ in 0..s_max {
            let (i, j) = random_pair(n, rng);
            let u = haar_u4(rng);
            state.apply_two(i, j, &u);
            row.push(state.collision());
        }
        check_norm(&state)?;
        Ok(row)
    })?;
    let points = (0..=s_max)
        .map(|s| Estimate::from_samples(&rows.iter().map(|r| r[s]).collect::<Vec<_>>()))
        .collect();
    Ok(CollisionCurve { n, points })
}

/// Fraction of circuits with `|<0|C|0>|^2 >= theta / 2^n`.
pub fn anticoncentration_fraction(spec: &EnsembleSpec, theta: f64, trials: usize, seed: u64) -> Result<Estimate> {
    if theta.is_nan() || theta <= 0.0 || theta.is_infinite() {
        return Err(LabError::arg(format!("theta must be positive, got {theta}")));
    }
    check_trials(trials)?;
    let spec = EnsembleSpec::new(spec.kind, spec.n)?;
    let cut = theta / (1u64 << spec.n) as f64;
    let xs = per_trial(trials, seed, |rng| {
        let s = sample_circuit(&spec, rng)?.output_state()?;
        check_norm(&s)?;
        Ok(if s.amplitude(0).norm_sqr() >= cut { 1.0 } else { 0.0 })
    })?;
    Ok(Estimate::from_samples(&xs))
}

/// Complete-graph anti-concentration fraction for every depth `0..=s_max`,
/// from prefixes of one circuit per trial.
pub fn mc_anticoncentration_curve(
    n: usize,
    s_max: usize,
    theta: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if theta.is_nan() || theta <= 0.0 || theta.is_infinite() {
        return Err(LabError::arg(format!("theta must be positive, got {theta}")));
    }
    check_trials(trials)?;
    EnsembleSpec::complete_graph(n, s_max)?;
    let cut = theta / (1u64 << n) as f64;
    let rows = per_trial(trials, seed, |rng| {
        let mut state = Statevector::zero(n)?;
        let mut row = Vec::with_capacity(s_max + 1);
        row.push(state.amplitude(0).norm_sqr() >= cut);
        for _ in 0..s_max {
            let (i, j) = random_pair(n, rng);
            state.apply_two(i, j, &haar_u4(rng));
            row.push(state.amplitude(0).norm_sqr() >= cut);
        }
        check_norm(&state)?;
        Ok(row)
    })?;
    Ok((0..=s_max)
        .map(|s| Estimate::from_samples(&rows.iter().map(|r| if r[s] { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonomialEstimate {
    pub re: Estimate,
    pub im: Estimate,
    /// Whether the monomial is a product of absolute squares.
    pub diagonal: bool,
}

/// A monomial `prod_a C[i_a, j_a] * prod_a conj(C[k_a, l_a])` given as
/// `rows = (i_1..i_t, k_1..k_t)` and `cols = (j_1..j_t, l_1..l_t)`.
pub fn is_diagonal_monomial(t: usize, rows: &[usize], cols: &[usize]) -> bool {
    let mut plain: Vec<(usize, usize)> = (0..t).map(|a| (rows[a], cols[a])).collect();
    let mut conj: Vec<(usize, usize)> = (0..t).map(|a| (rows[t + a], cols[t + a])).collect();
    plain.sort_unstable();
    conj.sort_unstable();
    plain == conj
}

pub fn monomial_estimate(
    spec: &EnsembleSpec,
    t: usize,
    rows: &[usize],
    cols: &[usize],
    trials: usize,
    seed: u64,
) -> Result<MonomialEstimate> {
    if !(1..=2).contains(&t) {
        return Err(LabError::arg(format!("monomial degree must be 1 or 2, got {t}")));
    }
    if spec.n > MAX_MONOMIAL_QUBITS {
        return Err(LabError::SizeLimit { what: "qubits", value: spec.n as u64, max: MAX_MONOMIAL_QUBITS as u64 });
    }
    if rows.len() != 2 * t || cols.len() != 2 * t {
        return Err(LabError::arg(format!("expected {} row and column indices", 2 * t)));
    }
    let dim = 1usize << spec.n;
    if let Some(&bad) = rows.iter().chain(cols).find(|&&x| x >= dim) {
        return Err(LabError::arg(format!("index {bad} out of range for dimension {dim}")));
    }
    check_trials(trials)?;
    let spec = EnsembleSpec::new(spec.kind, spec.n)?;
    let mut needed: Vec<usize> = cols.to_vec();
    needed.sort_unstable();
    needed.dedup();
    let values = per_trial(trials, seed, |rng| {
        let c = sample_circuit(&spec, rng)?;
        let mut columns = Vec::with_capacity(needed.len());
        for &j in &needed {
            let mut s = Statevector::basis(spec.n, j)?;
            c.apply(&mut s);
            check_norm(&s)?;
            columns.push(s);
        }
        let entry = |i: usize, j: usize| columns[needed.binary_search(&j).expect("collected")].amplitude(i);
        let mut z = Complex64::new(1.0, 0.0);
        for a in 0..t {
            z *= entry(rows[a], cols[a]) * entry(rows[t + a], cols[t + a]).conj();
        }
        Ok(z)
    })?;
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Ok(MonomialEstimate {
        re: Estimate::from_samples(&re),
        im: Estimate::from_samples(&im),
        diagonal: is_diagonal_monomial(t, rows, cols),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScrambleSample {
    pub trace_norm: f64,
    pub purity: f64,
}

impl ScrambleSample {
    /// `||rho - I/2^k||_1^2 <= 2^k Tr rho^2 - 1`, with rounding slack.
    pub fn bound_holds(&self, k: usize) -> bool {
        let rhs = (1u64 << k) as f64 * self.purity - 1.0;
        self.trace_norm * self.trace_norm <= rhs + 1e-9
    }
}

pub fn scramble_sample(state: &Statevector, subset: &[usize]) -> Result<ScrambleSample> {
    let rho = state.reduced_density(subset)?;
    let k = subset.len();
    let dim = 1usize << k;
    let purity = (&rho * &rho).trace().re;
    let shifted = &rho - DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
    let eig = SymmetricEigen::new(shifted);
    let trace_norm = eig.eigenvalues.iter().map(|v| v.abs()).sum();
    Ok(ScrambleSample { trace_norm, purity })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScrambleReport {
    pub trace_norm: Estimate,
    pub purity: Estimate,
    pub bound_violations: usize,
}

pub fn scrambling_check(spec: &EnsembleSpec, subset: &[usize], trials: usize, seed: u64) -> Result<ScrambleReport> {
    if spec.n > MAX_SCRAMBLE_QUBITS {
        return Err(LabError::SizeLimit { what: "qubits", value: spec.n as u64, max: MAX_SCRAMBLE_QUBITS as u64 });
    }
    check_trials(trials)?;
    let spec = EnsembleSpec::new(spec.kind, spec.n)?;
    let samples = per_trial(trials, seed, |rng| {
        let s = sample_circuit(&spec, rng)?.output_state()?;
        check_norm(&s)?;
        scramble_sample(&s, subset)
    })?;
    let k = subset.len();
    let norms: Vec<f64> = samples.iter().map(|s| s.trace_norm).collect();
    let purities: Vec<f64> = samples.iter().map(|s| s.purity).collect();
    Ok(ScrambleReport {
        trace_norm: Estimate::from_samples(&norms),
        purity: Estimate::from_samples(&purities),
        bound_violations: samples.iter().filter(|s| !s.bound_holds(k)).count(),
    })
}

/// Identity ensemble used by sanity checks.
pub fn identity_spec(n: usize) -> Result<EnsembleSpec> {
    EnsembleSpec::new(EnsembleKind::CompleteGraph { s: 0 }, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::weingarten;
    use crate::rng::trial_rng;
    use num_traits::ToPrimitive;

    #[test]
    fn empty_circuit_collision_is_one() {
        let c = sample_circuit(&identity_spec(3).unwrap(), &mut trial_rng(1, 0)).unwrap();
        assert_eq!(collision(&c).unwrap(), 1.0);
    }

    #[test]
    fn uniform_state_collision() {
        let amps = vec![Complex64::new(0.25, 0.0); 16];
        let s = Statevector::from_amplitudes(amps).unwrap();
        assert!((s.collision() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_haar_collision() {
        let spec = EnsembleSpec::complete_graph(2, 1).unwrap();
        let e = mc_expected_collision(&spec, 20_000, 3).unwrap();
        assert!(e.within_sigmas(0.4, 3.0), "{e:?}");
        // per-outcome fourth moment E|<0|C|0>|^4 = 2/(4*5)
        let xs = per_trial(20_000, 4, |rng| {
            let s = sample_circuit(&spec, rng)?.output_state()?;
            Ok(s.amplitude(0).norm_sqr().powi(2))
        })
        .unwrap();
        assert!(Estimate::from_samples(&xs).within_sigmas(0.1, 3.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = EnsembleSpec::complete_graph(3, 5).unwrap();
        let a = mc_expected_collision(&spec, 200, 9).unwrap();
        let b = mc_expected_collision(&spec, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(mc_expected_collision(&spec, 99, 9).is_err());
    }

    #[test]
    fn curve_starts_at_one_and_csv_shape() {
        let c = mc_collision_curve(3, 4, 200, 5).unwrap();
        assert_eq!(c.points[0].mean, 1.0);
        let csv = c.to_csv();
        assert!(csv.starts_with("s,mean,stderr\n"));
        assert_eq!(csv.lines().count(), 6);
        let fixed = mc_expected_collision(&EnsembleSpec::complete_graph(3, 4).unwrap(), 200, 5).unwrap();
        assert_eq!(c.points[4], fixed);
    }

    #[test]
    fn anticoncentration_identity() {
        let e = anticoncentration_fraction(&identity_spec(4).unwrap(), 0.5, 100, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(anticoncentration_fraction(&identity_spec(4).unwrap(), 0.0, 100, 1).is_err());
    }

    #[test]
    fn anticoncentration_curve_matches_fixed_depth() {
        let curve = mc_anticoncentration_curve(3, 4, 0.5, 300, 12).unwrap();
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0].mean, 1.0);
        let spec = EnsembleSpec::complete_graph(3, 4).unwrap();
        let direct = anticoncentration_fraction(&spec, 0.5, 300, 12).unwrap();
        assert_eq!(curve[4].mean, direct.mean);
    }

    #[test]
    fn monomial_haar_values() {
        let spec = EnsembleSpec::haar_full(3).unwrap();
        let m = monomial_estimate(&spec, 1, &[2, 2], &[5, 5], 20_000, 6).unwrap();
        assert!(m.diagonal);
        assert!(m.re.within_sigmas(1.0 / 8.0, 3.0), "{m:?}");
        let off = monomial_estimate(&spec, 1, &[2, 3], &[5, 5], 20_000, 7).unwrap();
        assert!(!off.diagonal);
        assert!(off.re.within_sigmas(0.0, 3.0) && off.im.within_sigmas(0.0, 3.0));
        let u2 = EnsembleSpec::haar_full(1).unwrap();
        let wg = weingarten(2, 2).unwrap();
        let target = wg.value(&crate::perm::Permutation::identity(2)).to_f64().unwrap();
        let m = monomial_estimate(&u2, 2, &[0, 1, 0, 1], &[0, 1, 0, 1], 40_000, 8).unwrap();
        assert!(m.diagonal);
        assert!(m.re.within_sigmas(target, 3.0), "{m:?} vs {target}");
        assert!(monomial_estimate(&spec, 1, &[8, 0], &[0, 0], 100, 1).is_err());
    }

    #[test]
    fn diagonal_classification() {
        assert!(is_diagonal_monomial(2, &[0, 1, 1, 0], &[2, 3, 3, 2]));
        assert!(!is_diagonal_monomial(2, &[0, 1, 1, 0], &[2, 3, 2, 3]));
    }

    #[test]
    fn scramble_empty_circuit() {
        let s = Statevector::zero(4).unwrap();
        let r = scramble_sample(&s, &[0, 1]).unwrap();
        assert!((r.trace_norm - 1.5).abs() < 1e-12);
        assert!((r.purity - 1.0).abs() < 1e-12);
        assert!(r.bound_holds(2));
    }

    #[test]
    fn scramble_bound_per_sample() {
        let spec = EnsembleSpec::complete_graph(4, 6).unwrap();
        let r = scrambling_check(&spec, &[0, 2], 500, 10).unwrap();
        assert_eq!(r.bound_violations, 0);
    }
}
