//! Statistical invariants, each at a fixed seed.

use designlab::chain::coupling::{lower_tail_bound, simulate_q};
use designlab::chain::process::{step_in_place, PauliString};
use designlab::chain::weight::p_chain_f64;
use designlab::rng::trial_rng;
use designlab::sim::{haar_u4, mc_collision_curve, Statevector};
use designlab::stats::{chi_square_gof, ks_two_sample};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn weight_step_follows_p_chain() {
    let n = 8;
    let chain = p_chain_f64(n);
    for k in 1..=n {
        let mut rng = trial_rng(801, k as u64);
        let mut counts = [0usize; 3];
        for _ in 0..100_000 {
            let mut sites: Vec<usize> = (0..n).collect();
            sites.shuffle(&mut rng);
            let mut word = vec![0u8; n];
            for &i in &sites[..k] {
                word[i] = rng.random_range(1..4);
            }
            let mut s = PauliString::new(word).unwrap();
            step_in_place(&mut s, &mut rng).unwrap();
            counts[s.weight() + 1 - k] += 1;
        }
        let probs = [chain.down[k], chain.stay[k], chain.up[k]];
        let (obs, exp): (Vec<usize>, Vec<f64>) =
            counts.iter().zip(probs).filter(|(_, p)| *p > 0.0).map(|(c, p)| (*c, p)).unzip();
        if obs.len() < 2 {
            continue;
        }
        let (stat, dof, p) = chi_square_gof(&obs, &exp);
        assert!(p > 1e-3, "k={k}: chi2 {stat} dof {dof} p {p} counts {counts:?}");
    }
}

#[test]
fn covered_strings_have_uniform_letters() {
    let n = 5;
    let mut counts = vec![0usize; 3 * n];
    let mut kept = 0;
    for trial in 0..40_000u64 {
        let mut rng = trial_rng(802, trial);
        let mut s = PauliString::random_initial(n, &mut rng).unwrap();
        for _ in 0..12 {
            step_in_place(&mut s, &mut rng).unwrap();
        }
        if !s.all_hit() {
            continue;
        }
        kept += 1;
        for (i, &c) in s.word().iter().enumerate() {
            if c != 0 {
                counts[3 * i + c as usize - 1] += 1;
            }
        }
    }
    assert!(kept > 10_000, "only {kept} covered samples");
    let (stat, dof, p) = chi_square_gof(&counts, &vec![1.0 / (3 * n) as f64; 3 * n]);
    assert!(p > 1e-3, "chi2 {stat} dof {dof} p {p}");
}

#[test]
fn weight_tail_below_bound() {
    // Pr[Y_tau <= x] for the Q chain started at z against
    // sqrt(tau) e exp(-(nu_tau - x)^2 / (2 nu_tau))
    for (n, z, tau) in [(20usize, 1usize, 40usize), (30, 5, 60), (40, 2, 120)] {
        let ys: Vec<usize> = (0..20_000u64).map(|i| simulate_q(n, z, tau, &mut trial_rng(803, i)).unwrap()).collect();
        for x in [z, n / 4, n / 2] {
            let emp = ys.iter().filter(|&&y| y <= x).count() as f64 / ys.len() as f64;
            let bound = lower_tail_bound(n, z, tau as f64, x as f64);
            let se = (emp * (1.0 - emp) / ys.len() as f64).sqrt();
            assert!(emp <= bound + 3.0 * se, "n={n} z={z} tau={tau} x={x}: {emp} > {bound}");
        }
    }
}

#[test]
fn haar_sampler_is_left_invariant() {
    let v = haar_u4(&mut trial_rng(804, u64::MAX));
    let mut plain = Vec::with_capacity(10_000);
    let mut rotated = Vec::with_capacity(10_000);
    for i in 0..10_000u64 {
        let mut s = Statevector::zero(2).unwrap();
        s.apply_two(0, 1, &haar_u4(&mut trial_rng(805, i)));
        plain.push(s.collision());
        let mut s = Statevector::zero(2).unwrap();
        s.apply_two(0, 1, &haar_u4(&mut trial_rng(806, i)));
        s.apply_two(0, 1, &v);
        rotated.push(s.collision());
    }
    let (d, p) = ks_two_sample(&plain, &rotated);
    assert!(p > 1e-3, "KS D {d} p {p}");
}

#[test]
fn monte_carlo_collision_decreases_with_depth() {
    for n in [3usize, 5] {
        let c = mc_collision_curve(n, 40, 20_000, 807).unwrap();
        for w in c.points.windows(2) {
            let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            assert!(w[1].mean <= w[0].mean + slack, "n={n}: {:?} -> {:?}", w[0], w[1]);
        }
    }
}
