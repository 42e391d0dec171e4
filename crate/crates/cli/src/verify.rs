//! Invariant suites. `fast` covers exact identities and small Monte Carlo
//! runs; `full` adds large-n spectral checks and 10^5-trial statistics.

use designlab::chain::bounds::{coll_lower_bound, coll_upper_bound, min_admissible_t};
use designlab::chain::coupling::{coupled_x_at, nu_tau, poissonized_dist, simulate_p, simulate_poissonized};
use designlab::chain::hitting::hitting_time;
use designlab::chain::process::coll_exact_curve;
use designlab::chain::weight::{p_transition, q_initial, q_transition, stationary_p, stationary_q};
use designlab::gap::{c_dnt, qinf_and_bounds, subspace_gap_brute, subspace_gap_gram};
use designlab::perm::{mat_mul_exact, moment_matrix, weingarten};
use designlab::rng::trial_rng;
use designlab::sim::{mc_collision_curve, mc_expected_collision, EnsembleSpec};
use designlab::spectral::{box_mixing, eigen_system, mainortho, orthogonality_check, q_t_direct, q_t_spectral, symmetry_holds};
use designlab::stats::{histogram, total_variation};
use designlab::Result as LabResult;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::config::Level;
use crate::report::VerificationReport;

struct Suite {
    report: VerificationReport,
}

impl Suite {
    /// Runs `f` and records its verdict; errors become failed checks.
    fn check<F>(&mut self, name: &str, anchor: &str, f: F)
    where
        F: FnOnce() -> LabResult<(bool, String, String, String)>,
    {
        match f() {
            Ok((pass, measured, expected, tol)) => self.report.record(name, anchor, pass, measured, expected, tol),
            Err(e) => self.report.record_error(name, anchor, e),
        }
    }
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn is_identity(m: &[Vec<BigRational>]) -> bool {
    m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() }))
}

fn exact(pass: bool) -> LabResult<(bool, String, String, String)> {
    Ok((pass, pass.to_string(), "true".into(), "exact".into()))
}

fn fast_checks(s: &mut Suite) {
    s.check("p_stationarity", "pi P = pi for pi(k) = C(n,k)3^k/(4^n-1), n = 2..20", || {
        let mut ok = true;
        for n in 2..=20 {
            let pc = p_transition(n)?;
            let pi = stationary_p(n)?;
            let mut full = vec![BigRational::zero(); n + 1];
            for k in pi.sites() {
                full[k] = pi.at(k);
            }
            ok &= pc.step(&full) == full;
        }
        exact(ok)
    });
    s.check("detailed_balance", "P and Q are reversible with respect to their stationary laws, n = 2..20", || {
        let mut ok = true;
        for n in 2..=20 {
            let pi = stationary_p(n)?;
            let mut full = vec![BigRational::zero(); n + 1];
            for k in pi.sites() {
                full[k] = pi.at(k);
            }
            ok &= p_transition(n)?.detailed_balance(&full);
            let q = q_transition(n)?;
            let piq = stationary_q(n)?.values;
            ok &= q.detailed_balance(&piq) && q.step(&piq) == piq;
        }
        exact(ok)
    });
    s.check("rows_sum_to_one", "every transition row of P and Q sums to 1", || {
        exact((2..=20).all(|n| {
            p_transition(n).map(|c| c.rows_sum_to_one()).unwrap_or(false)
                && q_transition(n).map(|c| c.rows_sum_to_one()).unwrap_or(false)
        }))
    });
    s.check("krawtchouk_orthogonality", "binomial-weight orthogonality at p = 3/4, N <= 10", || {
        let p = ratio(3, 4);
        let mut ok = true;
        for big_n in 0..=10 {
            for t in 0..=big_n {
                for u in 0..=big_n {
                    let (l, r) = orthogonality_check(big_n, &p, t, u)?;
                    ok &= l == r;
                }
            }
        }
        exact(ok)
    });
    s.check("krawtchouk_symmetry", "C(n-1,x)3^-t K^(t)(x) = C(n-1,t)3^-x K^(x)(t), n <= 10", || {
        let mut ok = true;
        for n in 1..=10 {
            for x in 0..n {
                for t in 0..n {
                    ok &= symmetry_holds(n, x, t)?;
                }
            }
        }
        exact(ok)
    });
    s.check("eigen_normalization", "sum_t K^(t)(m)^2/(C(n-1,t)3^t) = 4^(n-1)/(C(n-1,m)3^m), n <= 15", || {
        let mut ok = true;
        for n in 2..=15 {
            for m in 0..n {
                let (l, r) = mainortho(n, m)?;
                ok &= l == r;
            }
        }
        exact(ok)
    });
    s.check("eigen_relation", "x^(m) Q = lambda_m x^(m) in exact integers, n <= 30", || {
        let mut ok = true;
        for n in 2..=30 {
            ok &= eigen_system(n)?.exact_residuals_vanish();
        }
        exact(ok)
    });
    s.check("eigen_gap", "lambda_0 - lambda_1 = 4/(3n-1), n <= 50", || {
        let mut ok = true;
        for n in 2..=50 {
            let b = eigen_system(n)?;
            ok &= b.eigenvalue_exact(0) - b.eigenvalue_exact(1) == ratio(4, 3 * n as i64 - 1);
        }
        exact(ok)
    });
    s.check("eigen_residuals", "floating residuals of the Krawtchouk eigenvectors, n <= 50", || {
        let mut worst = 0.0f64;
        for n in 2..=50 {
            worst = eigen_system(n)?.residuals().into_iter().fold(worst, f64::max);
        }
        Ok((worst < 1e-10, format!("{worst:e}"), "0".into(), "1e-10".into()))
    });
    s.check("spectral_vs_powering", "sum_m alpha_m lambda_m^t x^(m) equals Q^t applied directly, (n,t) = (20,300)", || {
        let f0 = q_initial(20)?.to_f64();
        let a = q_t_spectral(20, 300, &f0)?;
        let b = q_t_direct(20, 300, &f0)?;
        let scale = b.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rel = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
        Ok((rel < 1e-8, format!("{rel:e}"), "0".into(), "1e-8 relative".into()))
    });
    s.check("mixing_bound", "box norm at t = ceil(3n ln n) is at most 28/2^n, n = 15", || {
        let n = 15;
        let t = (3.0 * n as f64 * (n as f64).ln()).ceil() as usize;
        let v = box_mixing(n, t)?.weighted_sum;
        let limit = 28.0 / 2f64.powi(n as i32);
        Ok((v <= limit, format!("{v:e}"), format!("<= {limit:e}"), "bound".into()))
    });
    s.check("weingarten_identity", "Wg x [d^#cycles] = I for t <= 4, t <= d <= 5", || {
        let mut ok = true;
        for t in 1..=4 {
            for d in (t as u32).max(2)..=5 {
                ok &= is_identity(&mat_mul_exact(&weingarten(t, d)?.matrix(), &moment_matrix(t, d)?));
            }
        }
        exact(ok)
    });
    s.check("weingarten_t2", "Wg(e) = 1/(d^2-1), Wg((12)) = -1/(d(d^2-1)) at d = 2", || {
        let w = weingarten(2, 2)?;
        let m = w.matrix();
        exact(m[0][0] == ratio(1, 3) && m[0][1] == ratio(-1, 6))
    });
    s.check("gap_methods_agree", "Gram-basis and explicit-vector gaps coincide at (d,m,t) = (2,2,2)", || {
        let g = subspace_gap_gram(2, 2, 2)?;
        let b = subspace_gap_brute(2, 2, 2)?;
        let diff = (g.cos_angle - b.cos_angle).abs();
        Ok((diff < 1e-10, format!("{diff:e}"), "0".into(), "1e-10".into()))
    });
    s.check("gap_bound_chain", "gap <= (c q_inf)^2 and q_inf <= Perron bound <= row-sum bound at (2,2,2)", || {
        let g = subspace_gap_gram(2, 2, 2)?;
        let q = qinf_and_bounds(2, 2, 2)?;
        let bound = (c_dnt(2, 2, 2) * q.q_inf).powi(2);
        let ok = g.gap_value <= bound + 1e-12 && q.q_inf <= q.perron_bound + 1e-12 && q.perron_bound <= q.row_bound + 1e-12;
        Ok((ok, format!("gap {} q {} perron {} row {}", g.gap_value, q.q_inf, q.perron_bound, q.row_bound), format!("gap <= {bound}"), "1e-12".into()))
    });
    s.check("collision_monotone", "exact expected collision is non-increasing in depth, n <= 5, t <= 100", || {
        let mut ok = true;
        for n in 2..=5 {
            let c = coll_exact_curve(n, 100)?;
            ok &= c.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        }
        exact(ok)
    });
    s.check("collision_bounds", "lower bound <= exact <= upper bound, n <= 5, t <= 80", || {
        let mut ok = true;
        for n in 2..=5 {
            let c = coll_exact_curve(n, 80)?;
            let t0 = min_admissible_t(n).floor() as usize + 1;
            for (t, &v) in c.iter().enumerate() {
                ok &= coll_lower_bound(n, t) <= v + 1e-12;
                if t >= t0 {
                    ok &= coll_upper_bound(n, t)? >= v;
                }
            }
        }
        Ok((ok, ok.to_string(), "true".into(), "1e-12".into()))
    });
    s.check("hitting_forms_agree", "recurrence and stationary-ratio hitting times agree, n = 50", || {
        let mut worst = 0.0f64;
        for l in 2..=50 {
            let h = hitting_time(50, l)?;
            worst = worst.max((h.recurrence - h.stationary_form).abs() / h.recurrence);
        }
        Ok((worst < 1e-9, format!("{worst:e}"), "0".into(), "1e-9 relative".into()))
    });
    s.check("poisson_mean", "mean of the Poissonized weight law equals nu_tau, (n,z,tau) = (12,6,8)", || {
        let d = poissonized_dist(12, 6, 8.0)?;
        let err = (d.mean() - nu_tau(12, 6, 8.0)).abs();
        Ok((err <= 1e-12, format!("{err:e}"), "0".into(), "1e-12".into()))
    });
    s.check("collision_two_qubits", "Haar U(4) collision sum_x |<x|C|0>|^4 = 2/5", || {
        let e = mc_expected_collision(&EnsembleSpec::complete_graph(2, 3)?, 4000, 0x5eed_0001)?;
        Ok((e.within_sigmas(0.4, 3.0), format!("{} ± {}", e.mean, e.stderr), "0.4".into(), "3 sigma".into()))
    });
    s.check("collision_haar_small", "Haar collision 2/(2^n+1) at n = 3", || {
        let e = mc_expected_collision(&EnsembleSpec::haar_full(3)?, 4000, 0x5eed_0002)?;
        let target = 2.0 / 9.0;
        Ok((e.within_sigmas(target, 3.0), format!("{} ± {}", e.mean, e.stderr), target.to_string(), "3 sigma".into()))
    });
}

fn full_checks(s: &mut Suite) {
    s.check("eigen_residuals_large", "Krawtchouk eigenvectors in double precision, n = 400", || {
        let worst = eigen_system(400)?.residuals().into_iter().fold(0.0f64, f64::max);
        Ok((worst < 1e-10, format!("{worst:e}"), "0".into(), "1e-10".into()))
    });
    s.check("chain_vs_statevector", "Monte Carlo collision of complete-graph circuits matches the exact chain, n = 2..5, s <= 30", || {
        let mut worst = 0.0f64;
        for n in 2..=5 {
            let curve = mc_collision_curve(n, 30, 100_000, 2000 + n as u64)?;
            let ex = coll_exact_curve(n, 30)?;
            for t in 1..=30 {
                worst = worst.max(curve.points[t].z_score(ex[t]));
            }
        }
        Ok((worst <= 3.0, format!("max z {worst:.3}"), "0".into(), "3 sigma each".into()))
    });
    s.check("collision_haar", "Haar collision 2/(2^n+1) at n = 4, 10^5 trials", || {
        let e = mc_expected_collision(&EnsembleSpec::haar_full(4)?, 100_000, 1001)?;
        let target = 2.0 / 17.0;
        Ok((e.within_sigmas(target, 3.0), format!("{} ± {}", e.mean, e.stderr), target.to_string(), "3 sigma".into()))
    });
    s.check("coupling_marginal", "X marginal of the coupling matches direct P simulation, n = 20, t = 60", || {
        let runs = 100_000u64;
        let a: Vec<usize> = (0..runs).map(|i| coupled_x_at(20, 1, 60, &mut trial_rng(1100, i))).collect::<LabResult<_>>()?;
        let b: Vec<usize> = (0..runs).map(|i| simulate_p(20, 1, 60, &mut trial_rng(1101, i))).collect::<LabResult<_>>()?;
        let tv = total_variation(&histogram(&a, 20), &histogram(&b, 20));
        Ok((tv < 0.02, format!("{tv}"), "0".into(), "0.02".into()))
    });
    s.check("poissonization", "decoupled chain at Poisson time matches the binomial mixture, (12,6,8)", || {
        let xs: Vec<usize> =
            (0..100_000u64).map(|i| simulate_poissonized(12, 6, 8.0, &mut trial_rng(1200, i))).collect::<LabResult<_>>()?;
        let tv = total_variation(&histogram(&xs, 12), &poissonized_dist(12, 6, 8.0)?.values);
        Ok((tv < 0.01, format!("{tv}"), "0".into(), "0.01".into()))
    });
}

pub fn verify_suite(level: Level) -> VerificationReport {
    let name = match level {
        Level::Fast => "fast",
        Level::Full => "full",
    };
    let mut s = Suite { report: VerificationReport::new(name) };
    fast_checks(&mut s);
    if level == Level::Full {
        full_checks(&mut s);
    }
    s.report
}
