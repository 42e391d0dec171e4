//! The Pauli-string process `(S_t, H_t)` and exact collision probabilities.

use rand::Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rng::trial_rng;

/// Largest `n` for which the full `4^n` state space is powered.
pub const MAX_EXACT_SITES: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PauliString {
    word: Vec<u8>,
    hit: Vec<bool>,
}

impl PauliString {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        if word.iter().any(|&c| c > 3) {
            return Err(LabError::arg("Pauli letters must lie in {0,1,2,3}"));
        }
        let hit = vec![false; word.len()];
        Ok(PauliString { word, hit })
    }

    /// Uniform string in `{0,3}^n \ 0^n` with an empty hit set.
    pub fn random_initial<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(LabError::arg("need at least one site"));
        }
        loop {
            let word: Vec<u8> = (0..n).map(|_| if rng.random::<bool>() { 3 } else { 0 }).collect();
            if word.iter().any(|&c| c != 0) {
                return PauliString::new(word);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn hit_set(&self) -> Vec<usize> {
        self.hit.iter().enumerate().filter(|(_, &h)| h).map(|(i, _)| i).collect()
    }

    pub fn is_hit(&self, i: usize) -> bool {
        self.hit[i]
    }

    pub fn all_hit(&self) -> bool {
        self.hit.iter().all(|&h| h)
    }

    pub fn weight(&self) -> usize {
        self.word.iter().filter(|&&c| c != 0).count()
    }

    /// Applies the averaged two-site gate to the pair `(i, j)`.
    pub fn apply_pair<R: Rng + ?Sized>(&mut self, i: usize, j: usize, rng: &mut R) {
        debug_assert!(i != j);
        self.hit[i] = true;
        self.hit[j] = true;
        if self.word[i] == 0 && self.word[j] == 0 {
            return;
        }
        let v: u8 = rng.random_range(1..16);
        self.word[i] = v / 4;
        self.word[j] = v % 4;
    }
}

/// Uniform unordered pair of distinct sites.
pub fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

pub fn step_process<R: Rng + ?Sized>(state: &PauliString, rng: &mut R) -> Result<PauliString> {
    let mut next = state.clone();
    step_in_place(&mut next, rng)?;
    Ok(next)
}

pub fn step_in_place<R: Rng + ?Sized>(state: &mut PauliString, rng: &mut R) -> Result<()> {
    let n = state.len();
    if n < 2 {
        return Err(LabError::arg(format!("process needs n >= 2, got {n}")));
    }
    let (i, j) = random_pair(n, rng);
    state.apply_pair(i, j, rng);
    Ok(())
}

fn check_exact(n: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::arg(format!("process needs n >= 2, got {n}")));
    }
    if n > MAX_EXACT_SITES {
        return Err(LabError::SizeLimit { what: "sites for exact chain", value: n as u64, max: MAX_EXACT_SITES as u64 });
    }
    Ok(())
}

fn is_z_string(mut s: usize) -> bool {
    while s > 0 {
        let c = s & 3;
        if c != 0 && c != 3 {
            return false;
        }
        s >>= 2;
    }
    true
}

/// One step of the averaged pair operator on a law over `{0,1,2,3}^n`
/// (site `i` is the base-4 digit of weight `4^i`).
fn averaged_step(n: usize, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let pairs = n * (n - 1) / 2;
    let size = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let si = 1usize << (2 * i);
            let sj = 1usize << (2 * j);
            let mask = (3 * si) | (3 * sj);
            for base in 0..size {
                if base & mask != 0 {
                    continue;
                }
                let mut idx = [0usize; 16];
                let mut moving = 0.0;
                for (ab, slot) in idx.iter_mut().enumerate() {
                    *slot = base + (ab >> 2) * si + (ab & 3) * sj;
                    if ab != 0 {
                        moving += v[*slot];
                    }
                }
                out[idx[0]] += v[idx[0]];
                let share = moving / 15.0;
                for &k in &idx[1..] {
                    out[k] += share;
                }
            }
        }
    }
    let inv = 1.0 / pairs as f64;
    out.iter_mut().for_each(|x| *x *= inv);
}

/// `Coll_t` for `t = 0..=t_max`, from
/// `Coll = 2^-n (1 + (2^n - 1) Pr[S_t in {0,3}^n \ 0^n])` with `S_0`
/// uniform on `{0,3}^n \ 0^n`.
pub fn coll_exact_curve(n: usize, t_max: usize) -> Result<Vec<f64>> {
    check_exact(n)?;
    let size = 1usize << (2 * n);
    let z_states: Vec<usize> = (1..size).filter(|&s| is_z_string(s)).collect();
    let m = (1usize << n) - 1;
    let mut v = vec![0.0; size];
    for &s in &z_states {
        v[s] = 1.0 / m as f64;
    }
    let mut scratch = vec![0.0; size];
    let scale = 0.5f64.powi(n as i32);
    let mut curve = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            averaged_step(n, &v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
        }
        let mass: f64 = z_states.iter().map(|&s| v[s]).sum();
        curve.push(scale * (1.0 + m as f64 * mass));
    }
    Ok(curve)
}

pub fn coll_exact_chain(n: usize, t: usize) -> Result<f64> {
    Ok(*coll_exact_curve(n, t)?.last().expect("curve has t+1 points"))
}

/// `Pr[H_t ⊆ H] <= exp(-(n - |H|) t / n)`.
pub fn coupon_bound(n: usize, t: usize, h: usize) -> Result<f64> {
    if h > n || n == 0 {
        return Err(LabError::arg(format!("need 0 <= h <= n, got h = {h}, n = {n}")));
    }
    Ok((-((n - h) as f64) * t as f64 / n as f64).exp())
}

/// Monte Carlo estimate of `Pr[H_t ⊆ {0..h-1}]` after `t` random pairs.
pub fn mc_cover_probability(n: usize, t: usize, h: usize, trials: u64, seed: u64) -> Result<f64> {
    if n < 2 || h > n {
        return Err(LabError::arg(format!("need n >= 2 and h <= n, got n = {n}, h = {h}")));
    }
    let mut inside = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let ok = (0..t).all(|_| {
            let (i, j) = random_pair(n, &mut rng);
            i < h && j < h
        });
        inside += u64::from(ok);
    }
    Ok(inside as f64 / trials as f64)
}

/// Fraction of runs whose weight is at most `threshold * n` after `t`
/// steps from a uniform `{0,3}^n \ 0^n` start.
pub fn scramble_weight_stats(n: usize, t: usize, threshold: f64, trials: u64, seed: u64) -> Result<f64> {
    if n < 2 {
        return Err(LabError::arg(format!("process needs n >= 2, got {n}")));
    }
    let cutoff = threshold * n as f64;
    let mut low = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut s = PauliString::random_initial(n, &mut rng)?;
        for _ in 0..t {
            step_in_place(&mut s, &mut rng)?;
        }
        low += u64::from(s.weight() as f64 <= cutoff);
    }
    Ok(low as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi_square_gof;

    #[test]
    fn zero_pair_is_frozen() {
        let mut rng = trial_rng(1, 0);
        let mut s = PauliString::new(vec![0, 0]).unwrap();
        for _ in 0..100 {
            s = step_process(&s, &mut rng).unwrap();
            assert_eq!(s.word(), &[0, 0]);
        }
        assert!(s.all_hit());
    }

    #[test]
    fn nonzero_pair_is_uniform_over_fifteen() {
        let mut rng = trial_rng(2, 0);
        let start = PauliString::new(vec![3, 0]).unwrap();
        let mut counts = vec![0usize; 15];
        let trials = 100_000;
        for _ in 0..trials {
            let s = step_process(&start, &mut rng).unwrap();
            let v = (s.word()[0] * 4 + s.word()[1]) as usize;
            assert!(v != 0);
            counts[v - 1] += 1;
        }
        let sigma = (trials as f64 * (1.0 / 15.0) * (14.0 / 15.0)).sqrt();
        for c in &counts {
            assert!((*c as f64 - trials as f64 / 15.0).abs() < 4.0 * sigma);
        }
        let (_, _, p) = chi_square_gof(&counts, &[1.0 / 15.0; 15]);
        assert!(p > 1e-3);
    }

    #[test]
    fn hit_set_grows_by_pairs() {
        let mut rng = trial_rng(3, 0);
        let s = PauliString::random_initial(6, &mut rng).unwrap();
        assert!(s.hit_set().is_empty());
        let s1 = step_process(&s, &mut rng).unwrap();
        assert_eq!(s1.hit_set().len(), 2);
        let mut prev = s1;
        for _ in 0..30 {
            let next = step_process(&prev, &mut rng).unwrap();
            let (a, b) = (prev.hit_set(), next.hit_set());
            assert!(a.iter().all(|i| b.contains(i)));
            assert!(b.len() <= a.len() + 2);
            prev = next;
        }
        assert!(step_process(&PauliString::new(vec![3]).unwrap(), &mut rng).is_err());
    }

    #[test]
    fn initial_strings_are_z_type() {
        let mut rng = trial_rng(4, 0);
        for _ in 0..200 {
            let s = PauliString::random_initial(3, &mut rng).unwrap();
            assert!(s.word().iter().all(|&c| c == 0 || c == 3));
            assert!(s.weight() > 0);
        }
    }

    #[test]
    fn exact_curve_examples() {
        assert!((coll_exact_chain(3, 0).unwrap() - 1.0).abs() < 1e-15);
        // One Haar gate on two qubits: 2 / (4 + 1).
        assert!((coll_exact_chain(2, 1).unwrap() - 0.4).abs() < 1e-15);
        assert!((coll_exact_chain(2, 9).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(coll_exact_chain(8, 1), Err(LabError::SizeLimit { .. })));
    }

    #[test]
    fn exact_curve_nonincreasing_and_haar_limit() {
        for n in 2..=6 {
            let c = coll_exact_curve(n, 100).unwrap();
            for w in c.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "n={n}");
            }
            let haar = 2.0 / ((1u64 << n) as f64 + 1.0);
            assert!(c[100] >= haar - 1e-12);
        }
        let c = coll_exact_curve(4, 400).unwrap();
        assert!((c[400] - 2.0 / 17.0).abs() < 1e-9);
    }

    #[test]
    fn coupon_examples() {
        assert_eq!(coupon_bound(10, 7, 10).unwrap(), 1.0);
        let p = mc_cover_probability(10, 10, 9, 100_000, 5).unwrap();
        assert!(p <= coupon_bound(10, 10, 9).unwrap());
        assert!(coupon_bound(3, 1, 4).is_err());
    }

    #[test]
    fn deep_weight_tail_is_stationary_small() {
        let n = 12;
        let tail: f64 = (1..=4)
            .map(|k| {
                let c = crate::exact::big_binomial(n, k);
                crate::exact::rational_to_f64(&num_rational::BigRational::from_integer(c)) * 3f64.powi(k as i32)
            })
            .sum::<f64>()
            / 4f64.powi(n as i32);
        let p = scramble_weight_stats(n, 500, 1.0 / 3.0, 20_000, 6).unwrap();
        assert!(p <= 10.0 * tail, "p = {p}, tail = {tail}");
    }
}
