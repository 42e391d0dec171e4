//! One function per subcommand. Each returns the tables it produced and a
//! JSON summary; writing them out is left to the caller.

use designlab::chain::bounds::{coll_lower_bound, coll_upper_bound, depth_for, min_admissible_t};
use designlab::chain::coupling::{lower_tail_bound, nu_tau, poissonized_dist, simulate_poissonized};
use designlab::chain::hitting::{cumulative_hitting_time, hitting_time, one_step_times};
use designlab::chain::process::{coll_exact_curve, MAX_EXACT_SITES};
use designlab::gap::{subspace_gap_brute, subspace_gap_gram, GapReport};
use designlab::perm::{enumerate_sym, f_t, f_t_upper_bound, gram_matrix, mat_mul_exact, moment_matrix, transposition_distance, weingarten};
use designlab::rng::{derive_seed, trial_rng};
use designlab::sim::ensemble::EnsembleName;
use designlab::sim::estimators::{mc_anticoncentration_curve, scrambling_check};
use designlab::sim::{anticoncentration_fraction, mc_collision_curve, mc_expected_collision, EnsembleKind, EnsembleSpec};
use designlab::spectral::{eigen_system, mixing_curve, mixing_depth};
use designlab::stats::{format_float, histogram, total_variation, Estimate};
use designlab::LabError;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, also the plot kind for tables that have one.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&'static str]) -> Self {
        Table { name: name.into(), columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub experiment: &'static str,
    pub settings: Settings,
    /// Effective seed for randomized experiments.
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
    pub results: Value,
}

impl Artifact {
    pub fn sidecar(&self) -> Value {
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|t| json!({"file": format!("{}.csv", t.name), "columns": t.columns, "rows": t.rows.len()}))
            .collect();
        json!({
            "experiment": self.experiment,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.settings,
            "seed": self.seed,
            "tables": tables,
            "results": self.results,
        })
    }
}

fn f(x: f64) -> String {
    format_float(x)
}

fn int(x: impl ToString) -> String {
    x.to_string()
}

/// Seed from the settings or, failing that, from the clock.
pub fn effective_seed(settings: &Settings) -> u64 {
    settings.seed.unwrap_or_else(|| {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap_or_default();
        now.as_nanos() as u64 ^ u64::from(std::process::id()).rotate_left(32)
    })
}

fn ensemble(settings: &Settings, default: &str) -> CliResult<EnsembleName> {
    Ok(settings.ensemble.as_deref().unwrap_or(default).parse()?)
}

fn lattice_reps(c: Option<f64>) -> CliResult<usize> {
    let c = c.unwrap_or(1.0);
    if c < 0.0 || c.fract() != 0.0 {
        return Err(CliError::Usage(format!("--c must be a non-negative integer for 2D lattices, got {c}")));
    }
    Ok(c as usize)
}

fn kind_for(name: EnsembleName, s: usize, c: Option<f64>) -> CliResult<EnsembleKind> {
    let reps = if name == EnsembleName::Lattice2D { lattice_reps(c)? } else { 0 };
    Ok(name.with_depth(s, reps))
}

fn haar_collision(n: usize) -> f64 {
    2.0 / (2f64.powi(n as i32) + 1.0)
}

pub fn coll_mc(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(4);
    let s_max = *st.s.get_or_insert(30);
    let trials = *st.trials.get_or_insert(10_000);
    let name = ensemble(&st, "cg")?;
    st.ensemble = Some(name_str(name).into());
    let seed = effective_seed(&st);
    let mut table = Table::new("coll_vs_depth", &["s", "mean", "stderr"]);
    let estimates: Vec<(usize, Estimate)> = match name {
        EnsembleName::CompleteGraph => {
            mc_collision_curve(n, s_max, trials, seed)?.points.into_iter().enumerate().collect()
        }
        EnsembleName::HaarFull => vec![(0, mc_expected_collision(&EnsembleSpec::haar_full(n)?, trials, seed)?)],
        _ => (1..=s_max)
            .map(|s| {
                let spec = EnsembleSpec::new(kind_for(name, s, st.c)?, n)?;
                Ok((s, mc_expected_collision(&spec, trials, derive_seed(seed, &format!("depth-{s}")))?))
            })
            .collect::<CliResult<_>>()?,
    };
    for (s, e) in &estimates {
        table.push(vec![int(s), f(e.mean), f(e.stderr)]);
    }
    let last = estimates.last().map(|(_, e)| *e);
    let haar = haar_collision(n);
    let results = json!({
        "haar_value": haar,
        "final_mean": last.map(|e| e.mean),
        "final_stderr": last.map(|e| e.stderr),
        "final_z_vs_haar": last.map(|e| e.z_score(haar)),
    });
    Ok(Artifact { experiment: "coll-mc", settings: st, seed: Some(seed), tables: vec![table], results })
}

fn name_str(name: EnsembleName) -> &'static str {
    match name {
        EnsembleName::CompleteGraph => "complete_graph",
        EnsembleName::Lattice1D => "lattice_1d",
        EnsembleName::Lattice2D => "lattice_2d",
        EnsembleName::HaarFull => "haar_full",
    }
}

pub fn coll_chain(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(4);
    let t_max = *st.t.get_or_insert(50);
    let curve = coll_exact_curve(n, t_max)?;
    let mut table = Table::new("coll_chain", &["t", "coll"]);
    for (t, v) in curve.iter().enumerate() {
        table.push(vec![int(t), f(*v)]);
    }
    let results = json!({"haar_value": haar_collision(n), "final": curve.last()});
    Ok(Artifact { experiment: "coll-chain", settings: st, seed: None, tables: vec![table], results })
}

pub fn coll_bound(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(6);
    let depths: Vec<usize> = match st.c {
        Some(c) => vec![depth_for(c, n)],
        None => {
            let t_max = *st.t.get_or_insert(100);
            let t0 = min_admissible_t(n).floor() as usize + 1;
            if t0 > t_max {
                return Err(CliError::Usage(format!("--t {t_max} is below the first admissible depth {t0}")));
            }
            (t0..=t_max).collect()
        }
    };
    let exact = if n <= MAX_EXACT_SITES { Some(coll_exact_curve(n, *depths.last().expect("non-empty"))?) } else { None };
    let mut table = Table::new("coll_bound", &["t", "upper", "lower", "exact"]);
    let mut consistent = true;
    for &t in &depths {
        let upper = coll_upper_bound(n, t)?;
        let ex = exact.as_ref().map_or(f64::NAN, |e| e[t]);
        consistent &= ex.is_nan() || upper >= ex;
        table.push(vec![int(t), f(upper), f(coll_lower_bound(n, t)), f(ex)]);
    }
    let results = json!({"upper_dominates_exact": consistent, "haar_value": haar_collision(n)});
    Ok(Artifact { experiment: "coll-bound", settings: st, seed: None, tables: vec![table], results })
}

pub fn spectral_mix(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(20);
    let depth = mixing_depth(n);
    let t_max = *st.t.get_or_insert(2 * depth);
    let ts: Vec<usize> = (0..=t_max).collect();
    let curve = mixing_curve(n, &ts)?;
    let mut mix = Table::new("mixing_curve", &["t", "box_norm"]);
    for b in &curve {
        mix.push(vec![int(b.t), f(b.weighted_sum)]);
    }
    let basis = eigen_system(n)?;
    let mut spectrum = Table::new("spectrum", &["m", "lambda", "x0"]);
    for m in 0..n {
        spectrum.push(vec![int(m), f(basis.eigenvalues[m]), f(basis.x0[m])]);
    }
    let limit = 28.0 / 2f64.powi(n as i32);
    let at_depth = curve.get(depth).map(|b| b.weighted_sum);
    let results = json!({
        "mixing_depth": depth,
        "box_norm_at_depth": at_depth,
        "limit": limit,
        "within_limit": at_depth.map(|v| v <= limit),
        "eigenvalue_gap": 4.0 / (3 * n - 1) as f64,
    });
    Ok(Artifact { experiment: "spectral-mix", settings: st, seed: None, tables: vec![mix, spectrum], results })
}

fn gap_row(r: &GapReport, method: &str) -> Vec<String> {
    vec![int(r.d), int(r.m), int(r.t), method.into(), f(r.cos_angle), f(r.gap_value), f(r.q_inf), f(r.c_dnt), f(r.bound)]
}

pub fn gap_2d(mut st: Settings) -> CliResult<Artifact> {
    let d = *st.d.get_or_insert(2);
    let m = *st.m.get_or_insert(2);
    let t = *st.t.get_or_insert(2);
    let gram = subspace_gap_gram(d, m, t)?;
    let mut table = Table::new(
        "gap_table",
        &["d", "m", "t", "method", "cos_angle", "gap_value", "q_inf", "c_dnt", "bound"],
    );
    table.push(gap_row(&gram, "gram"));
    let brute = match subspace_gap_brute(d, m, t) {
        Ok(b) => {
            table.push(gap_row(&b, "brute"));
            Some(b)
        }
        Err(LabError::SizeLimit { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let diff = brute.as_ref().map(|b| (b.cos_angle - gram.cos_angle).abs());
    let results = json!({"gram": gram, "brute": brute, "method_difference": diff});
    Ok(Artifact { experiment: "gap-2d", settings: st, seed: None, tables: vec![table], results })
}

pub fn anticonc(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(5);
    let s_max = *st.s.get_or_insert(80);
    let theta = *st.theta.get_or_insert(0.5);
    let trials = *st.trials.get_or_insert(10_000);
    let name = ensemble(&st, "cg")?;
    st.ensemble = Some(name_str(name).into());
    let seed = effective_seed(&st);
    let mut table = Table::new("anticonc", &["s", "theta", "fraction", "stderr", "pz_bound"]);
    // Paley-Zygmund: Pr[p >= theta/2^n] >= (1-theta)^2 / (2^n E Coll)
    let pz = |coll: f64| (1.0 - theta).powi(2) / (2f64.powi(n as i32) * coll);
    match name {
        EnsembleName::CompleteGraph => {
            let curve = mc_anticoncentration_curve(n, s_max, theta, trials, seed)?;
            let exact = if n <= MAX_EXACT_SITES { Some(coll_exact_curve(n, s_max)?) } else { None };
            for (s, e) in curve.iter().enumerate() {
                let bound = exact.as_ref().map_or(f64::NAN, |c| pz(c[s]));
                table.push(vec![int(s), f(theta), f(e.mean), f(e.stderr), f(bound)]);
            }
        }
        _ => {
            let spec = EnsembleSpec::new(kind_for(name, s_max, st.c)?, n)?;
            let e = anticoncentration_fraction(&spec, theta, trials, seed)?;
            let bound = if name == EnsembleName::HaarFull { pz(haar_collision(n)) } else { f64::NAN };
            table.push(vec![int(s_max), f(theta), f(e.mean), f(e.stderr), f(bound)]);
        }
    }
    let results = json!({"porter_thomas": (-theta).exp()});
    Ok(Artifact { experiment: "anticonc", settings: st, seed: Some(seed), tables: vec![table], results })
}

pub fn hitting(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(100);
    let steps = one_step_times(n)?;
    let mut table = Table::new(
        "hitting",
        &["l", "one_step", "cumulative", "stationary_form", "closed_form", "e_l_bound"],
    );
    let mut cumulative = 0.0;
    for l in 1..=n {
        let h = hitting_time(n, l)?;
        cumulative += steps[l];
        table.push(vec![int(l), f(h.recurrence), f(cumulative), f(h.stationary_form), f(h.closed_form), f(h.e_l_bound)]);
    }
    let target = (3 * n).div_ceil(4) - 1;
    let e = cumulative_hitting_time(n, target.max(1))?;
    let ratio = e / (n as f64 * (n as f64).ln());
    let results = json!({"target": target, "expected_time": e, "ratio_n_ln_n": ratio, "reference": 5.0 / 3.0});
    Ok(Artifact { experiment: "hitting", settings: st, seed: None, tables: vec![table], results })
}

pub fn waittime(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(12);
    let z = *st.z.get_or_insert(6);
    let tau = *st.tau.get_or_insert(8.0);
    let trials = *st.trials.get_or_insert(100_000);
    let seed = effective_seed(&st);
    let dist = poissonized_dist(n, z, tau)?;
    let samples: Vec<usize> = (0..trials as u64)
        .into_par_iter()
        .map(|i| simulate_poissonized(n, z, tau, &mut trial_rng(seed, i)))
        .collect::<Result<_, _>>()?;
    let emp = histogram(&samples, n);
    let mut table = Table::new("waittime", &["k", "poissonized", "empirical", "empirical_cdf", "tail_bound"]);
    let mut cdf = 0.0;
    for k in 0..=n {
        cdf += emp[k];
        table.push(vec![int(k), f(dist.values[k]), f(emp[k]), f(cdf), f(lower_tail_bound(n, z, tau, k as f64))]);
    }
    let results = json!({
        "nu_tau": nu_tau(n, z, tau),
        "mean": dist.mean(),
        "total_variation": total_variation(&emp, &dist.values),
    });
    Ok(Artifact { experiment: "waittime", settings: st, seed: Some(seed), tables: vec![table], results })
}

pub fn scramble(mut st: Settings) -> CliResult<Artifact> {
    let n = *st.n.get_or_insert(6);
    let s = *st.s.get_or_insert(120);
    let k = *st.k.get_or_insert(2);
    let trials = *st.trials.get_or_insert(1000);
    let name = ensemble(&st, "cg")?;
    st.ensemble = Some(name_str(name).into());
    if k > n {
        return Err(CliError::Usage(format!("--k {k} exceeds --n {n}")));
    }
    let seed = effective_seed(&st);
    let spec = EnsembleSpec::new(kind_for(name, s, st.c)?, n)?;
    let subset: Vec<usize> = (0..k).collect();
    let r = scrambling_check(&spec, &subset, trials, seed)?;
    let mut table = Table::new(
        "scramble",
        &["n", "s", "k", "trials", "trace_norm", "trace_norm_stderr", "purity", "purity_stderr", "violations"],
    );
    table.push(vec![
        int(n),
        int(s),
        int(k),
        int(trials),
        f(r.trace_norm.mean),
        f(r.trace_norm.stderr),
        f(r.purity.mean),
        f(r.purity.stderr),
        int(r.bound_violations),
    ]);
    let results = json!({"report": r, "subset": subset});
    Ok(Artifact { experiment: "scramble", settings: st, seed: Some(seed), tables: vec![table], results })
}

pub fn perm_checks(mut st: Settings) -> CliResult<Artifact> {
    let t = *st.t.get_or_insert(3);
    let d = *st.d.get_or_insert(2);
    let perms = enumerate_sym(t)?;
    let mut metric = true;
    for a in &perms {
        for b in &perms {
            let ab = transposition_distance(a, b)?;
            metric &= ab == transposition_distance(b, a)? && ab == t - a.inverse().compose(b).cycle_count();
            for c in &perms {
                metric &= transposition_distance(a, c)? <= ab + transposition_distance(b, c)?;
            }
        }
    }
    let mut table = Table::new("perm_checks", &["check", "status", "measured", "expected"]);
    let status = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
    table.push(vec!["distance_metric".into(), status(metric), int(metric), "true".into()]);

    let g = gram_matrix(t, 1, d)?;
    let (lo, bound) = (g.min_eigenvalue(), g.spectrum_lower_bound());
    table.push(vec!["gram_min_eigenvalue".into(), status(lo >= bound - 1e-12), f(lo), format!(">= {}", f(bound))]);

    let alpha = f64::from(d);
    let (ft, fu) = (f_t(t, alpha)?, f_t_upper_bound(t, alpha));
    let applies = 2.0 * (t * t) as f64 <= alpha;
    table.push(vec![
        "f_t_bound".into(),
        status(!applies || ft <= fu),
        f(ft),
        if applies { format!("<= {}", f(fu)) } else { "n/a (2t^2 > d)".into() },
    ]);

    let (wg_status, wg_json) = match weingarten(t, d) {
        Ok(table) => {
            let prod = mat_mul_exact(&table.matrix(), &moment_matrix(t, d)?);
            let id = prod
                .iter()
                .enumerate()
                .all(|(i, r)| r.iter().enumerate().all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() }));
            (status(id), table.to_json()?)
        }
        Err(LabError::Degenerate { .. }) => ("degenerate".to_string(), Value::Null),
        Err(e) => return Err(e.into()),
    };
    table.push(vec!["weingarten_identity".into(), wg_status, "-".into(), "identity".into()]);
    let results = json!({"weingarten": wg_json, "group_order": perms.len()});
    Ok(Artifact { experiment: "perm-checks", settings: st, seed: None, tables: vec![table], results })
}
