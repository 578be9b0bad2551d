//! Execution of [`ExperimentSpec`]s.
//!
//! Replica `r` of the `a`-th system size draws from stream `(a << 32) | r`;
//! equilibrium and bootstrap draws set the corresponding high bits. Results
//! are gathered in index order, so the output does not depend on the number
//! of workers.

use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use serde_json::{json, Map, Value};
use zrp_core::equilibrium::equilibrium_sample;
use zrp_core::exact::ExactChain;
use zrp_core::fluid::{
    entropy, entropy_production, geometric_law, integrate_fluid_with, tilted_density, FluidOptions,
    ProbabilityVector,
};
use zrp_core::metrics::{statistic_tv_with, tv_distance, MixingCurve, Statistic, StatisticLaw};
use zrp_core::rng::{BOOTSTRAP_STREAM_BIT, EQUILIBRIUM_STREAM_BIT};
use zrp_core::solid::{predicted_mixing_constant, SolidProfile, SolidSolution};
use zrp_core::{Configuration, HeightHistogram, RngStream};

use crate::output::{
    fluid_table, mixing_table, num, solid_table, trajectory_table, write_json, MixingSummary, Table,
    TrajectoryRow,
};
use crate::parallel::Workers;
use crate::spec::{
    Curve, ExperimentKind, ExperimentResult, ExperimentSpec, Lineage, StreamRange, Telemetry, SCHEMA_VERSION,
};

/// Name of the result file inside the output directory.
pub const RESULT_FILE: &str = "result.json";

const ORACLE_CHUNK: usize = 10_000;

fn stream_base(size_index: usize) -> u64 {
    (size_index as u64) << 32
}

fn range(role: &str, first: u64, count: usize) -> StreamRange {
    StreamRange {
        role: role.into(),
        first,
        count: count as u64,
    }
}

struct Outcome {
    curves: Vec<Curve>,
    headline: Vec<f64>,
    description: &'static str,
    events: u64,
}

/// Runs `spec`, writes every table plus `result.json` into `spec.out_dir`,
/// and returns the result.
pub fn run_experiment(spec: &ExperimentSpec, workers: &Workers) -> Result<ExperimentResult> {
    spec.validate()?;
    let started = Instant::now();
    let out = spec.out_dir.as_path();
    let outcome = match spec.kind {
        ExperimentKind::CutoffCurve => cutoff_curve(spec, workers, out)?,
        ExperimentKind::DissolutionTrack => dissolution_track(spec, workers, out)?,
        ExperimentKind::FluidRelaxation => fluid_relaxation(spec, out)?,
        ExperimentKind::ChaosScaling => chaos_scaling(spec, workers, out)?,
        ExperimentKind::OracleValidation => oracle_validation(spec, workers, out)?,
    };
    let passed = spec
        .tolerance
        .map(|tol| !outcome.headline.is_empty() && outcome.headline.iter().all(|&x| tol.accepts(x)));
    let result = ExperimentResult {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        curves: outcome.curves,
        headline: outcome.headline,
        headline_description: outcome.description.into(),
        passed,
        telemetry: Telemetry {
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            events: outcome.events,
            threads: workers.threads(),
        },
    };
    write_json(&out.join(RESULT_FILE), &result)?;
    Ok(result)
}

/// Runs one replica from `initial`, recording `observe(state)` at each time.
fn trace<T>(
    initial: &Configuration,
    times: &[f64],
    rng: &mut RngStream,
    mut observe: impl FnMut(&Configuration) -> T,
) -> zrp_core::Result<(Vec<T>, u64)> {
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(times.len());
    let t_end = times.last().copied().unwrap_or(0.0);
    let events = state.run_until(t_end, rng, times, |_, _, c| out.push(observe(c)))?;
    Ok((out, events))
}

fn cutoff_curve(spec: &ExperimentSpec, workers: &Workers, out: &Path) -> Result<Outcome> {
    let profile = spec.profile()?;
    let predicted = predicted_mixing_constant(&profile);
    let mut statistics = vec![spec.statistic()?];
    for s in &spec.extra_statistics {
        statistics.push(s.parse::<Statistic>()?);
    }
    let mut curves = Vec::new();
    let mut headline = Vec::new();
    let mut events = 0;
    for (a, &n) in spec.n.iter().enumerate() {
        let initial = Configuration::from_profile(n, spec.rho, profile.u())?;
        let times: Vec<f64> = spec.grid.iter().map(|x| x * n as f64).collect();
        let base = stream_base(a);
        let traces = workers.map(spec.replicas, |r| {
            let mut rng = RngStream::new(spec.master_seed, base | r as u64);
            trace(&initial, &times, &mut rng, |c| {
                statistics.iter().map(|s| s.evaluate(c)).collect::<Vec<_>>()
            })
        })?;
        events += traces.iter().map(|(_, e)| e).sum::<u64>();
        let equilibrium = workers.map(spec.equilibrium_replicas, |i| {
            let mut rng = RngStream::new(spec.master_seed, EQUILIBRIUM_STREAM_BIT | base | i as u64);
            let c = equilibrium_sample(n, initial.m(), &mut rng)?;
            Ok::<_, zrp_core::Error>(statistics.iter().map(|s| s.evaluate(&c)).collect::<Vec<_>>())
        })?;
        for (j, &stat) in statistics.iter().enumerate() {
            let eq = StatisticLaw::from_samples(stat, n, equilibrium.iter().map(|v| v[j]).collect())?;
            let points = workers.map(spec.grid.len(), |g| {
                let samples = traces.iter().map(|(v, _)| v[g][j]).collect();
                let law = StatisticLaw::from_samples(stat, n, samples)?;
                let mut rng = RngStream::new(spec.master_seed, BOOTSTRAP_STREAM_BIT | base | g as u64);
                statistic_tv_with(&law, &eq, &mut rng, spec.bootstrap)
            })?;
            let curve = MixingCurve::new(
                spec.grid.clone(),
                points.iter().map(|p| p.value).collect(),
                points.iter().map(|p| p.stderr).collect(),
            )?;
            let crossing = curve.first_below(spec.epsilon);
            let width = curve.drop_width(0.9, 0.1);
            let label = if j == 0 {
                format!("mixing_n{n}")
            } else {
                format!("mixing_n{n}_{}", stat.name())
            };
            mixing_table(&curve)?.write(&out.join(format!("{label}.csv")))?;
            let summary = MixingSummary {
                n,
                rho: spec.rho,
                epsilon: spec.epsilon,
                statistic: stat.name().into(),
                crossing_t_over_n: crossing,
                predicted_constant: predicted,
            };
            write_json(&out.join(format!("{label}.json")), &summary)?;
            if j == 0 {
                headline.push(crossing.map_or(f64::INFINITY, |c| (c - predicted).abs()));
            }
            let mut fields = Map::new();
            fields.insert("statistic".into(), json!(stat.name()));
            fields.insert("crossing_t_over_n".into(), json!(crossing));
            fields.insert("width_t_over_n".into(), json!(width));
            fields.insert("final_tv".into(), json!(curve.tv().last()));
            curves.push(Curve {
                label: label.clone(),
                n: Some(n),
                file: format!("{label}.csv"),
                x_label: "t/n".into(),
                y_label: format!("TV lower bound ({})", stat.name()),
                x: spec.grid.clone(),
                y: curve.tv().to_vec(),
                predicted_constant: Some(predicted),
                summary: fields,
                lineage: Lineage {
                    master_seed: spec.master_seed,
                    streams: vec![
                        range("process", base, spec.replicas),
                        range(
                            "equilibrium",
                            EQUILIBRIUM_STREAM_BIT | base,
                            spec.equilibrium_replicas,
                        ),
                        range("bootstrap", BOOTSTRAP_STREAM_BIT | base, spec.grid.len()),
                    ],
                },
            });
        }
    }
    Ok(Outcome {
        curves,
        headline,
        description: "|crossing_t_over_n - predicted_constant| per n",
        events,
    })
}

fn solid_output(
    profile: &SolidProfile,
    grid: &[f64],
    tracked: usize,
) -> (SolidSolution, Vec<f64>, Vec<Vec<f64>>) {
    let solution = SolidSolution::new(profile.clone());
    let f = grid.iter().map(|&t| solution.f(t)).collect();
    let v = grid
        .iter()
        .map(|&t| {
            let mut v = solution.v(t);
            v.resize(tracked, 0.0);
            v
        })
        .collect();
    (solution, f, v)
}

fn dissolution_track(spec: &ExperimentSpec, workers: &Workers, out: &Path) -> Result<Outcome> {
    let profile = spec.profile()?;
    let tracked = spec.track.unwrap_or(profile.u().len());
    let (solution, f, v) = solid_output(&profile, &spec.grid, tracked);
    solid_table(&spec.grid, &f, &v)?.write(&out.join("solid.csv"))?;
    let mut curves = Vec::new();
    let mut headline = Vec::new();
    let mut events = 0;
    for (a, &n) in spec.n.iter().enumerate() {
        ensure!(tracked <= n, "cannot track {tracked} sites with n = {n}");
        let initial = Configuration::from_profile(n, spec.rho, profile.u())?;
        let times: Vec<f64> = spec.grid.iter().map(|x| x * n as f64).collect();
        let base = stream_base(a);
        let traces = workers.map(spec.replicas, |r| {
            let mut rng = RngStream::new(spec.master_seed, base | r as u64);
            trace(&initial, &times, &mut rng, |c| {
                (
                    c.heights()[..tracked].to_vec(),
                    c.nonempty_count() as f64 / n as f64,
                    c.max_height(),
                )
            })
        })?;
        events += traces.iter().map(|(_, e)| e).sum::<u64>();
        let mut rows = Vec::with_capacity(spec.replicas * times.len());
        for (r, (samples, _)) in traces.iter().enumerate() {
            for (t, (h, frac, max)) in times.iter().zip(samples) {
                rows.push(TrajectoryRow {
                    replica: r,
                    t: *t,
                    heights: h.clone(),
                    nonempty_fraction: *frac,
                    max_height: *max,
                });
            }
        }
        let label = format!("trajectory_n{n}");
        trajectory_table(tracked, &rows)?.write(&out.join(format!("{label}.csv")))?;

        let scale = n as f64;
        let mut sup_dev = vec![0.0f64; tracked];
        let mut vanish: Vec<Vec<f64>> = vec![Vec::new(); tracked];
        for (samples, _) in &traces {
            let mut gone = vec![false; tracked];
            for (g, (h, _, _)) in samples.iter().enumerate() {
                for i in 0..tracked {
                    sup_dev[i] = sup_dev[i].max((h[i] as f64 / scale - v[g][i]).abs());
                    if !gone[i] && h[i] == 0 {
                        gone[i] = true;
                        vanish[i].push(spec.grid[g]);
                    }
                }
            }
        }
        let mean_height: Vec<f64> = (0..times.len())
            .map(|g| {
                traces
                    .iter()
                    .map(|(s, _)| s[g].0.first().copied().unwrap_or(0) as f64)
                    .sum::<f64>()
                    / (spec.replicas as f64 * scale)
            })
            .collect();
        let mut fields = Map::new();
        fields.insert("sup_deviation".into(), json!(sup_dev));
        let vanish_mean: Vec<Option<f64>> = vanish
            .iter()
            .map(|v| (v.len() == spec.replicas).then(|| v.iter().sum::<f64>() / v.len() as f64))
            .collect();
        fields.insert("vanish_time_mean".into(), json!(vanish_mean));
        let mut predicted_times = solution.times().to_vec();
        predicted_times.resize(tracked, 0.0);
        fields.insert("predicted_vanish_time".into(), json!(predicted_times));
        headline.push(sup_dev.first().copied().unwrap_or(0.0));
        curves.push(Curve {
            label: label.clone(),
            n: Some(n),
            file: format!("{label}.csv"),
            x_label: "t/n".into(),
            y_label: "mean height_1 / n".into(),
            x: spec.grid.clone(),
            y: mean_height,
            predicted_constant: Some(solution.mixing_constant()),
            summary: fields,
            lineage: Lineage {
                master_seed: spec.master_seed,
                streams: vec![range("process", base, spec.replicas)],
            },
        });
    }
    Ok(Outcome {
        curves,
        headline,
        description: "sup over grid and replicas of |height_1(nt)/n - v_1(t)| per n",
        events,
    })
}

/// `q0` padded to `k_max`, or `δ_ρ`.
fn initial_law(spec: &ExperimentSpec) -> Result<ProbabilityVector> {
    match &spec.q0 {
        Some(q) => {
            let mut w = q.clone();
            w.resize(spec.k_max + 1, 0.0);
            Ok(ProbabilityVector::from_unnormalized(w)?)
        }
        None => Ok(ProbabilityVector::point_mass(spec.rho as usize, spec.k_max)?),
    }
}

/// Fluid states at `grid`, plus trapezoid bookkeeping of `∫V` on the fine
/// steps. The entropy identity is checked from the first time `V` is finite.
struct FluidRun {
    states: Vec<ProbabilityVector>,
    identity_from: Option<f64>,
    identity_defect: f64,
    entropy_monotone: bool,
}

fn fluid_at(q0: &ProbabilityVector, grid: &[f64], dt: f64) -> Result<FluidRun> {
    let mut states = Vec::with_capacity(grid.len());
    let mut q = q0.clone();
    let mut t = 0.0;
    let mut last_h = entropy(q0);
    let v0 = entropy_production(q0).ok();
    let mut start = v0.map(|_| (0.0, last_h));
    let mut prev = v0.map(|v| (0.0, v));
    let mut integral = 0.0;
    let mut monotone = true;
    for &target in grid {
        if target > t {
            let seg = integrate_fluid_with(&q, target - t, FluidOptions::new(dt))?;
            for (s, state) in seg.times.iter().zip(&seg.states).skip(1) {
                let h = entropy(state);
                monotone &= h >= last_h - 1e-12;
                last_h = h;
                let now = t + s;
                match (entropy_production(state).ok(), prev) {
                    (Some(v), Some((tp, vp))) => {
                        integral += 0.5 * (now - tp) * (v + vp);
                        prev = Some((now, v));
                    }
                    (Some(v), None) => {
                        start = Some((now, h));
                        prev = Some((now, v));
                    }
                    (None, _) => {
                        start = None;
                        prev = None;
                        integral = 0.0;
                    }
                }
            }
            q = seg.last().clone();
            t = target;
        }
        states.push(q.clone());
    }
    let (identity_from, identity_defect) = match start {
        Some((t0, h0)) => (Some(t0), (entropy(&q) - h0 - integral).abs()),
        None => (None, f64::NAN),
    };
    Ok(FluidRun {
        states,
        identity_from,
        identity_defect,
        entropy_monotone: monotone,
    })
}

fn fluid_relaxation(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let q0 = initial_law(spec)?;
    let lambda = tilted_density(&q0);
    let target = geometric_law(lambda, spec.k_max)?;
    let run = fluid_at(&q0, &spec.grid, spec.dt)?;
    fluid_table(&spec.grid, &run.states)?.write(&out.join("fluid.csv"))?;
    let distance: Vec<f64> = run.states.iter().map(|s| s.l1_distance(&target)).collect();
    let mass_defect = run
        .states
        .iter()
        .map(|s| (s.total_mass() - 1.0).abs())
        .fold(0.0, f64::max);
    let mean_defect = run
        .states
        .iter()
        .map(|s| (tilted_density(s) - lambda).abs())
        .fold(0.0, f64::max);
    let mut fields = Map::new();
    fields.insert("lambda".into(), json!(lambda));
    fields.insert("final_distance".into(), json!(distance.last()));
    fields.insert("max_mass_defect".into(), json!(mass_defect));
    fields.insert("max_mean_defect".into(), json!(mean_defect));
    fields.insert("entropy_monotone".into(), json!(run.entropy_monotone));
    fields.insert("entropy_identity_from".into(), json!(run.identity_from));
    fields.insert("entropy_identity_defect".into(), finite(run.identity_defect));
    let curve = Curve {
        label: "fluid".into(),
        n: None,
        file: "fluid.csv".into(),
        x_label: "t".into(),
        y_label: "l1 distance to geometric".into(),
        x: spec.grid.clone(),
        y: distance.clone(),
        predicted_constant: None,
        summary: fields,
        lineage: Lineage {
            master_seed: spec.master_seed,
            streams: Vec::new(),
        },
    };
    Ok(Outcome {
        curves: vec![curve],
        headline: distance.last().copied().into_iter().collect(),
        description: "l1 distance to the geometric law at the last grid time",
        events: 0,
    })
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Configuration with `round(n q_k)` sites at height `k` (largest remainder).
pub fn liquid_configuration(n: usize, q: &ProbabilityVector) -> Result<Configuration> {
    let exact: Vec<f64> = q.weights().iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let short = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(short) {
        counts[k] += 1;
    }
    let mut heights = Vec::with_capacity(n);
    for (k, &c) in counts.iter().enumerate() {
        heights.extend(std::iter::repeat_n(k as u64, c));
    }
    Ok(Configuration::new(heights)?)
}

/// `‖Q − q‖₁` including mass above `K_max` on either side.
fn empirical_l1(c: &Configuration, q: &ProbabilityVector) -> f64 {
    let hist = HeightHistogram::of(c);
    let n = c.n() as f64;
    let mut d = q.tail_mass();
    for (k, &w) in q.weights().iter().enumerate() {
        d += (hist.count(k as u64) as f64 / n - w).abs();
    }
    d + hist
        .iter()
        .filter(|&(k, _)| k as usize > q.k_max())
        .map(|(_, c)| c as f64 / n)
        .sum::<f64>()
}

fn chaos_scaling(spec: &ExperimentSpec, workers: &Workers, out: &Path) -> Result<Outcome> {
    let q0 = initial_law(spec)?;
    let mut curves = Vec::new();
    let mut finals = Vec::new();
    let mut events = 0;
    for (a, &n) in spec.n.iter().enumerate() {
        let initial = liquid_configuration(n, &q0)?;
        let start = ProbabilityVector::new(HeightHistogram::of(&initial).frequencies(spec.k_max + 1), 0.0)
            .context("initial heights exceed k_max")?;
        let fluid = fluid_at(&start, &spec.grid, spec.dt)?.states;
        let base = stream_base(a);
        let traces = workers.map(spec.replicas, |r| {
            let mut rng = RngStream::new(spec.master_seed, base | r as u64);
            let mut g = 0;
            trace(&initial, &spec.grid, &mut rng, |c| {
                g += 1;
                empirical_l1(c, &fluid[g - 1])
            })
        })?;
        events += traces.iter().map(|(_, e)| e).sum::<u64>();
        let reps = spec.replicas as f64;
        let mut mean = Vec::with_capacity(spec.grid.len());
        let mut stderr = Vec::with_capacity(spec.grid.len());
        for g in 0..spec.grid.len() {
            let xs: Vec<f64> = traces.iter().map(|(v, _)| v[g]).collect();
            let m = xs.iter().sum::<f64>() / reps;
            let var = if spec.replicas > 1 {
                xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps - 1.0)
            } else {
                0.0
            };
            mean.push(m);
            stderr.push((var / reps).sqrt());
        }
        let label = format!("chaos_n{n}");
        let mut table = Table::new(["t", "mean_l1", "stderr"])?;
        for ((t, m), e) in spec.grid.iter().zip(&mean).zip(&stderr) {
            table.row([num(*t), num(*m), num(*e)])?;
        }
        table.write(&out.join(format!("{label}.csv")))?;
        finals.push(*mean.last().expect("grid is non-empty"));
        let mut fields = Map::new();
        fields.insert("final_mean_l1".into(), json!(mean.last()));
        fields.insert("final_stderr".into(), json!(stderr.last()));
        curves.push(Curve {
            label: label.clone(),
            n: Some(n),
            file: format!("{label}.csv"),
            x_label: "t".into(),
            y_label: "mean l1 distance to fluid".into(),
            x: spec.grid.clone(),
            y: mean,
            predicted_constant: None,
            summary: fields,
            lineage: Lineage {
                master_seed: spec.master_seed,
                streams: vec![range("process", base, spec.replicas)],
            },
        });
    }
    let headline = finals.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(Outcome {
        curves,
        headline,
        description: "ratio of final mean l1 errors between consecutive n",
        events,
    })
}

fn oracle_validation(spec: &ExperimentSpec, workers: &Workers, out: &Path) -> Result<Outcome> {
    let mut instances: Vec<Vec<u64>> = Vec::new();
    match &spec.heights {
        Some(h) => instances.push(h.clone()),
        None => {
            for &n in &spec.n {
                for &m in &spec.m {
                    instances.extend(ExactChain::new(n, m)?.states().iter().cloned());
                }
            }
        }
    }
    ensure!(!instances.is_empty(), "no oracle instances");
    let chunks = spec.replicas.div_ceil(ORACLE_CHUNK);
    let tasks = instances.len() * chunks;
    let chains: Vec<ExactChain> = instances
        .iter()
        .map(|s| ExactChain::new(s.len(), s.iter().sum()))
        .collect::<zrp_core::Result<_>>()?;
    let partial = workers.map(tasks, |task| {
        let (i, chunk) = (task / chunks, task % chunks);
        let chain = &chains[i];
        let initial = Configuration::new(instances[i].clone())?;
        let mut counts = vec![vec![0u64; chain.len()]; spec.grid.len()];
        let mut events = 0;
        let first = chunk * ORACLE_CHUNK;
        for r in first..spec.replicas.min(first + ORACLE_CHUNK) {
            let mut rng = RngStream::new(spec.master_seed, stream_base(i) | r as u64);
            let (idx, e) = trace(&initial, &spec.grid, &mut rng, |c| chain.index_of(c.heights()))?;
            events += e;
            for (g, k) in idx.into_iter().enumerate() {
                counts[g][k.expect("simulated state is enumerated")] += 1;
            }
        }
        Ok::<_, zrp_core::Error>((counts, events))
    })?;
    let mut table = Table::new(["n", "m", "state", "t", "tv"])?;
    let mut tvs = Vec::new();
    let mut events = 0;
    for (i, s) in instances.iter().enumerate() {
        let chain = &chains[i];
        let mut counts = vec![vec![0u64; chain.len()]; spec.grid.len()];
        for (c, e) in &partial[i * chunks..(i + 1) * chunks] {
            events += e;
            for (acc, part) in counts.iter_mut().zip(c) {
                acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
            }
        }
        for (g, &t) in spec.grid.iter().enumerate() {
            let exact = chain.law_from(s, t)?;
            let sampled: Vec<f64> = counts[g]
                .iter()
                .map(|&c| c as f64 / spec.replicas as f64)
                .collect();
            let tv = tv_distance(&sampled, &exact)?;
            let state = s.iter().map(u64::to_string).collect::<Vec<_>>().join("-");
            table.row([s.len().to_string(), chain.m().to_string(), state, num(t), num(tv)])?;
            tvs.push(tv);
        }
    }
    table.write(&out.join("oracle.csv"))?;
    let max_tv = tvs.iter().copied().fold(0.0, f64::max);
    let mut fields = Map::new();
    fields.insert("instances".into(), json!(instances.len()));
    fields.insert("max_tv".into(), json!(max_tv));
    let curve = Curve {
        label: "oracle".into(),
        n: None,
        file: "oracle.csv".into(),
        x_label: "row".into(),
        y_label: "tv to exact law".into(),
        x: (0..tvs.len()).map(|i| i as f64).collect(),
        y: tvs,
        predicted_constant: None,
        summary: fields,
        lineage: Lineage {
            master_seed: spec.master_seed,
            streams: (0..instances.len())
                .map(|i| range("process", stream_base(i), spec.replicas))
                .collect(),
        },
    };
    Ok(Outcome {
        curves: vec![curve],
        headline: vec![max_tv],
        description: "max TV between simulated and exact laws",
        events,
    })
}
