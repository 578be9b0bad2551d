//! End-to-end acceptance runs at full scale. Each criterion prints one line;
//! the test fails if any criterion does.
//!
//! Run with `cargo test -p zrp --test acceptance`.

mod common;

use std::io::Write as _;
use std::time::{Duration, Instant};

use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;
use zrp::{run_experiment, ExperimentResult, ExperimentSpec, Workers};
use zrp_core::equilibrium::equilibrium_sample;
use zrp_core::metrics::dissolution_rate_residual;
use zrp_core::rng::EQUILIBRIUM_STREAM_BIT;
use zrp_core::solid::{ode_oracle, SolidProfile, SolidSolution};
use zrp_core::RngStream;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let k = ((to - from) / step).round() as usize;
    (0..=k).map(|i| from + i as f64 * step).collect()
}

fn run(mut spec: Value, workers: &Workers) -> ExperimentResult {
    let dir = tempfile::tempdir().unwrap();
    spec["out_dir"] = dir.path().to_str().unwrap().into();
    let spec: ExperimentSpec = serde_json::from_value(spec).unwrap();
    run_experiment(&spec, workers).unwrap()
}

fn summary<'a>(r: &'a ExperimentResult, label: &str, key: &str) -> &'a Value {
    let curve = r
        .curves
        .iter()
        .find(|c| c.label == label)
        .unwrap_or_else(|| panic!("no curve {label}"));
    &curve.summary[key]
}

fn oracle(w: &Workers) -> Verdict {
    let started = Instant::now();
    let r = run(
        serde_json::json!({
            "kind": "oracle_validation", "n": [1, 2, 3], "m": [1, 2, 3], "rho": 1.0,
            "grid": [0.5, 1.0, 2.0], "replicas": 100_000, "master_seed": 11,
        }),
        w,
    );
    let elapsed = started.elapsed();
    let max_tv = r.headline[0];
    verdict(
        max_tv <= 0.02 && elapsed < Duration::from_secs(60),
        format!(
            "max TV {max_tv:.4} over {} states (limit 0.02), {:.1}s",
            summary(&r, "oracle", "instances"),
            elapsed.as_secs_f64()
        ),
    )
}

fn worst_case_cutoff(w: &Workers) -> ExperimentResult {
    run(
        serde_json::json!({
            "kind": "cutoff_curve", "n": [1000, 10_000], "rho": 1.0,
            "grid": grid(0.0, 1.8, 0.01), "replicas": 50, "equilibrium_replicas": 5000,
            "statistic": "max_height", "extra_statistics": ["distinguishing_event"],
            "master_seed": 12,
        }),
        w,
    )
}

fn cutoff_location(r: &ExperimentResult) -> Verdict {
    let small = summary(r, "mixing_n1000", "crossing_t_over_n").as_f64();
    match summary(r, "mixing_n10000", "crossing_t_over_n").as_f64() {
        Some(c) => verdict(
            (1.35..=1.65).contains(&c),
            format!(
                "crossing t/n {c:.4} at n=1e4 (window [1.35, 1.65], predicted 1.5); n=1e3 gives {small:?}"
            ),
        ),
        None => verdict(false, "no crossing of 1/4 at n=1e4".into()),
    }
}

fn sharpening(r: &ExperimentResult) -> Verdict {
    let width = |label: &str| summary(r, label, "width_t_over_n").as_f64();
    let (small, large) = (width("mixing_n1000"), width("mixing_n10000"));
    let event = (
        width("mixing_n1000_distinguishing_event"),
        width("mixing_n10000_distinguishing_event"),
    );
    let detail = format!(
        "max-height drop width 0.9->0.1: n=1e3 {small:?}, n=1e4 {large:?}; distinguishing-event widths {event:?}"
    );
    match (small, large) {
        (Some(a), Some(b)) => verdict(b < a, detail),
        _ => verdict(false, detail),
    }
}

fn profile_formula(w: &Workers) -> Verdict {
    let r = run(
        serde_json::json!({
            "kind": "cutoff_curve", "n": [20_000], "rho": 1.0, "u": [0.5, 0.25],
            "grid": grid(0.0, 1.0, 0.005), "replicas": 32, "equilibrium_replicas": 5000,
            "statistic": "max_height", "master_seed": 14,
        }),
        w,
    );
    match summary(&r, "mixing_n20000", "crossing_t_over_n").as_f64() {
        Some(c) => verdict(
            (c - 0.84375).abs() <= 0.08,
            format!("crossing t/n {c:.4} (window 0.84375 +- 0.08)"),
        ),
        None => verdict(false, "no crossing of 1/4".into()),
    }
}

fn dissolution(w: &Workers) -> Verdict {
    let r = run(
        serde_json::json!({
            "kind": "dissolution_track", "n": [20_000], "rho": 1.0, "u": [0.5, 0.25],
            "grid": grid(0.0, 1.0, 0.005), "replicas": 8, "master_seed": 15,
        }),
        w,
    );
    let sup = summary(&r, "trajectory_n20000", "sup_deviation")[0]
        .as_f64()
        .unwrap();
    let vanish = summary(&r, "trajectory_n20000", "vanish_time_mean")[1].as_f64();
    let ok = sup <= 0.03 && vanish.is_some_and(|v| (v - 0.375).abs() <= 0.05);
    verdict(
        ok,
        format!(
            "sup |h1/n - v1| {sup:.4} (limit 0.03); height_2 vanish t/n {vanish:?} (window 0.375 +- 0.05)"
        ),
    )
}

fn fluid(w: &Workers) -> Verdict {
    let horizon = 50.0;
    let point = run(
        serde_json::json!({
            "kind": "fluid_relaxation", "rho": 1.0, "grid": grid(0.0, horizon, 1.0),
            "dt": 1e-3, "k_max": 200, "master_seed": 16,
        }),
        w,
    );
    let get = |r: &ExperimentResult, k: &str| summary(r, "fluid", k).clone();
    let mass = get(&point, "max_mass_defect").as_f64().unwrap();
    let mean = get(&point, "max_mean_defect").as_f64().unwrap();
    let monotone = get(&point, "entropy_monotone").as_bool().unwrap();
    let distance = get(&point, "final_distance").as_f64().unwrap();
    let from = get(&point, "entropy_identity_from");
    let point_identity = get(&point, "entropy_identity_defect");

    // ½𝒢(½) + ½𝒢(3/2) has full support, so V is finite from the start
    let geometric = |l: f64, k: usize| (l / (1.0 + l)).powi(k as i32) / (1.0 + l);
    let q0: Vec<f64> = (0..=200)
        .map(|k| 0.5 * geometric(0.5, k) + 0.5 * geometric(1.5, k))
        .collect();
    let mixture = run(
        serde_json::json!({
            "kind": "fluid_relaxation", "rho": 1.0, "q0": q0, "grid": grid(0.0, 10.0, 1.0),
            "dt": 1e-3, "k_max": 200, "master_seed": 16,
        }),
        w,
    );
    let identity = get(&mixture, "entropy_identity_defect").as_f64().unwrap();
    let monotone = monotone && get(&mixture, "entropy_monotone").as_bool().unwrap();
    let mass = mass.max(get(&mixture, "max_mass_defect").as_f64().unwrap());
    let mean = mean.max(get(&mixture, "max_mean_defect").as_f64().unwrap());
    let budget = 1e-8;
    verdict(
        mass <= budget && mean <= budget && monotone && identity <= 1e-4 && distance < 1e-3,
        format!(
            "mass defect {mass:.1e}, mean defect {mean:.1e} (limit {budget:.0e}); entropy monotone {monotone}; \
             identity defect {identity:.1e} (limit 1e-4; from point mass {point_identity} after t={from}); \
             distance at t={horizon} {distance:.1e} (limit 1e-3)"
        ),
    )
}

fn chaos(w: &Workers) -> Verdict {
    let r = run(
        serde_json::json!({
            "kind": "chaos_scaling", "n": [1000, 10_000], "rho": 1.0,
            "grid": [0.5, 1.0, 1.5, 2.0], "replicas": 20, "dt": 1e-3, "k_max": 200, "master_seed": 17,
        }),
        w,
    );
    let ratio = r.headline[0];
    let err = |label: &str| summary(&r, label, "final_mean_l1").as_f64().unwrap();
    verdict(
        (2.0..=5.0).contains(&ratio),
        format!(
            "error ratio n=1e3/n=1e4 at t=2 {ratio:.3} (window [2, 5]); errors {:.4} and {:.4}",
            err("chaos_n1000"),
            err("chaos_n10000")
        ),
    )
}

fn solid_closed_form() -> Verdict {
    let mut rng = RngStream::new(18, 0);
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for _ in 0..10 {
        let l = 1 + rng.below(8);
        let rho = 0.2 + 1.3 * rng.unit();
        let mut u: Vec<f64> = (0..l).map(|_| rng.unit()).collect();
        u.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = u.iter().sum();
        let fill = 0.05 + 0.9 * rng.unit();
        u.iter_mut().for_each(|x| *x *= fill * rho / total);
        let profile = SolidProfile::new(u, rho).unwrap();
        let solution = SolidSolution::new(profile.clone());
        let horizon = 1.1 * solution.mixing_constant() + 0.1;
        let trajectory = ode_oracle(&profile, horizon, 1e-6).unwrap();
        for (k, &t) in trajectory.times.iter().enumerate() {
            for (a, b) in trajectory.v(k).iter().zip(solution.v(t)) {
                worst = worst.max((a - b).abs());
            }
        }
        sizes.push(l);
    }
    verdict(
        worst <= 1e-6,
        format!("sup |closed form - RK4 oracle| {worst:.2e} over L = {sizes:?} (limit 1e-6)"),
    )
}

fn equilibrium() -> Verdict {
    let (n, m, reps) = (50u64, 50u64, 100_000usize);
    let mut rng = RngStream::new(19, EQUILIBRIUM_STREAM_BIT);
    let mut counts = vec![0u64; m as usize + 1];
    for _ in 0..reps {
        counts[equilibrium_sample(n as usize, m, &mut rng).unwrap().height(0) as usize] += 1;
    }
    let log_total = ln_binomial(m + n - 1, n - 1);
    let (mut stat, mut bins, mut tail_obs, mut tail_exp) = (0.0, 0usize, 0.0, 0.0);
    for k in 0..=m {
        let expected = reps as f64 * (ln_binomial(m - k + n - 2, n - 2) - log_total).exp();
        if expected >= 5.0 {
            stat += (counts[k as usize] as f64 - expected).powi(2) / expected;
            bins += 1;
        } else {
            tail_obs += counts[k as usize] as f64;
            tail_exp += expected;
        }
    }
    stat += (tail_obs - tail_exp).powi(2) / tail_exp;
    let p = 1.0 - ChiSquared::new(bins as f64).unwrap().cdf(stat);

    let big = 10_000;
    let residual = (0..10)
        .map(|i| {
            let c = equilibrium_sample(
                big,
                big as u64,
                &mut RngStream::new(19, EQUILIBRIUM_STREAM_BIT | (i + 1)),
            )
            .unwrap();
            dissolution_rate_residual(&c, 1.0, 0).unwrap()
        })
        .fold(0.0, f64::max);
    verdict(
        p > 0.01 && residual <= 0.02,
        format!("site marginal chi2 {stat:.1} on {bins} dof, p {p:.3} (limit > 0.01); max empty-fraction residual {residual:.4} over 10 samples (limit 0.02)"),
    )
}

fn determinism() -> Verdict {
    let mut diffs = Vec::new();
    for name in common::GOLDEN {
        for threads in [1, 8] {
            for file in common::replay_golden(name, threads) {
                diffs.push(format!("{name}/{file}@{threads}"));
            }
        }
    }
    verdict(
        diffs.is_empty(),
        format!(
            "{} golden runs replayed on 1 and 8 threads; differing files {diffs:?}",
            common::GOLDEN.len()
        ),
    )
}

#[test]
fn acceptance() {
    let workers = Workers::new(0).unwrap();
    let mut lines = Vec::new();
    let mut record = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let v = f();
        let line = format!(
            "criterion {id:>2} {name}: {} [{:.1}s] {}",
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
        // straight to the stderr handle so the line survives output capture
        let _ = writeln!(std::io::stderr(), "{line}");
        lines.push((v.pass, line));
    };
    record(1, "oracle equivalence", &mut || oracle(&workers));
    let mut cutoff = None;
    record(2, "cutoff location", &mut || {
        let r = worst_case_cutoff(&workers);
        let v = cutoff_location(&r);
        cutoff = Some(r);
        v
    });
    record(3, "sharpening with n", &mut || {
        sharpening(cutoff.as_ref().unwrap())
    });
    record(4, "profile formula", &mut || profile_formula(&workers));
    record(5, "dissolution tracking", &mut || dissolution(&workers));
    record(6, "fluid properties", &mut || fluid(&workers));
    record(7, "propagation of chaos", &mut || chaos(&workers));
    record(8, "solid closed form", &mut solid_closed_form);
    record(9, "equilibrium sampler", &mut equilibrium);
    record(10, "determinism", &mut determinism);
    let failed: Vec<&String> = lines.iter().filter(|(p, _)| !p).map(|(_, l)| l).collect();
    assert!(
        failed.is_empty(),
        "failed criteria:\n{}",
        failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n")
    );
}
