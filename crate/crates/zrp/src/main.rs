use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};
use zrp::experiment::RESULT_FILE;
use zrp::output::{solid_table, trajectory_table, write_json, SolidSummary, TrajectoryRow};
use zrp::replay::load_result;
use zrp::spec::{ExperimentKind, ExperimentSpec};
use zrp::{emit_plot, replay, run_experiment, Workers};
use zrp_core::solid::{predicted_mixing_constant, SolidProfile, SolidSolution};
use zrp_core::{Configuration, RngStream};

#[derive(Parser)]
#[command(name = "zrp", version, about = "Mean-field zero-range process experiments")]
struct Cli {
    /// Master seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicas and write their trajectories.
    Simulate(SimulateArgs),
    /// Integrate the fluid limit.
    Fluid(FluidArgs),
    /// Evaluate the closed-form solid-phase dissolution.
    Solid(SolidArgs),
    /// Estimate the mixing time from a solid-phase start.
    Mixing(MixingArgs),
    /// Run, replay or plot declarative experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Limiting solid heights; defaults to a single site holding everything.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    u: Option<Vec<f64>>,
    /// Final time, in units of n.
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Number of equally spaced sample times after t = 0.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Sites written to the table; defaults to the number of solid heights.
    #[arg(long)]
    track: Option<usize>,
}

#[derive(Args)]
struct FluidArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Initial law (unnormalized weights on 0, 1, ...); defaults to a point mass at rho.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    q0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 200)]
    k_max: usize,
}

#[derive(Args)]
struct SolidArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    u: Option<Vec<f64>>,
    /// Final time; defaults to 1.2 times the mixing constant.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args)]
struct MixingArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    u: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value = "max_height")]
    statistic: String,
    /// Grid start, in units of n.
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    /// Grid end, in units of n; defaults to 1.3 times the predicted constant.
    #[arg(long)]
    to: Option<f64>,
    #[arg(long, default_value_t = 60)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    replicas: usize,
    #[arg(long, default_value_t = 2000)]
    equilibrium_replicas: usize,
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run a spec file; the exit status reports the tolerance check.
    Run {
        spec: PathBuf,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
    },
    /// Re-run a result file and compare its tables byte for byte.
    Replay { result: PathBuf },
    /// Write SVG plots for a result file.
    Plot { result: PathBuf },
}

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1).max(1) as f64)
        .collect()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let workers = Workers::new(cli.threads)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.seed, &out, &workers),
        Command::Fluid(a) => {
            ensure!(a.points >= 2, "need at least two points");
            let spec = ExperimentSpec {
                q0: a.q0,
                dt: a.dt,
                k_max: a.k_max,
                ..base_spec(
                    ExperimentKind::FluidRelaxation,
                    a.rho,
                    linspace(0.0, a.t_end, a.points),
                    cli.seed,
                    &out,
                )
            };
            let result = run_experiment(&spec, &workers)?;
            println!("{}", serde_json::to_string_pretty(&result.curves[0].summary)?);
            Ok(true)
        }
        Command::Solid(a) => {
            let profile = SolidProfile::new(a.u.unwrap_or_else(|| vec![a.rho]), a.rho)?;
            let solution = SolidSolution::new(profile.clone());
            let constant = predicted_mixing_constant(&profile);
            let t_end = a.t_end.unwrap_or(1.2 * constant.max(0.1));
            let grid = linspace(0.0, t_end, a.points.max(2));
            let f: Vec<f64> = grid.iter().map(|&t| solution.f(t)).collect();
            let v: Vec<Vec<f64>> = grid.iter().map(|&t| solution.v(t)).collect();
            solid_table(&grid, &f, &v)?.write(&out.join("solid.csv"))?;
            let summary = SolidSummary {
                rho: profile.rho(),
                u: profile.u().to_vec(),
                t: solution.times().to_vec(),
                mixing_constant: constant,
            };
            write_json(&out.join("solid.json"), &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Mixing(a) => {
            let u = a.u.unwrap_or_else(|| vec![a.rho]);
            let constant = predicted_mixing_constant(&SolidProfile::new(u.clone(), a.rho)?);
            let to = a.to.unwrap_or(1.3 * constant.max(0.1));
            ensure!(a.points >= 2 && to > a.from, "need a non-empty grid");
            let spec = ExperimentSpec {
                n: vec![a.n],
                u: Some(u),
                replicas: a.replicas,
                epsilon: a.epsilon,
                statistic: a.statistic,
                equilibrium_replicas: a.equilibrium_replicas,
                bootstrap: a.bootstrap,
                ..base_spec(
                    ExperimentKind::CutoffCurve,
                    a.rho,
                    linspace(a.from, to, a.points),
                    cli.seed,
                    &out,
                )
            };
            let result = run_experiment(&spec, &workers)?;
            println!(
                "{}",
                std::fs::read_to_string(out.join(format!("mixing_n{}.json", a.n)))?.trim_end()
            );
            Ok(result.curves[0].summary["crossing_t_over_n"].is_number())
        }
        Command::Experiment(ExperimentCommand::Run { spec, plot }) => {
            let mut spec = ExperimentSpec::from_json(&std::fs::read_to_string(&spec)?)?;
            if let Some(dir) = cli.out {
                spec.out_dir = dir;
            }
            let result = run_experiment(&spec, &workers)?;
            if plot {
                emit_plot(&result, &spec.out_dir)?;
            }
            println!(
                "{}: {} = {:?} -> {}",
                spec.kind.name(),
                result.headline_description,
                result.headline,
                match result.passed {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "no tolerance declared",
                }
            );
            Ok(result.passed != Some(false))
        }
        Command::Experiment(ExperimentCommand::Replay { result }) => {
            let dir = cli
                .out
                .unwrap_or_else(|| std::env::temp_dir().join(format!("zrp-replay-{}", std::process::id())));
            let report = replay(&result, &dir, &workers)?;
            for f in &report.files {
                println!(
                    "{} {}",
                    if f.identical { "identical" } else { "DIFFERS  " },
                    f.file
                );
            }
            println!("replayed into {}", dir.join(RESULT_FILE).display());
            Ok(report.identical())
        }
        Command::Experiment(ExperimentCommand::Plot { result }) => {
            let result_data = load_result(&result)?;
            let dir = cli
                .out
                .unwrap_or_else(|| result.parent().map(PathBuf::from).unwrap_or_default());
            for p in emit_plot(&result_data, &dir)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn base_spec(
    kind: ExperimentKind,
    rho: f64,
    grid: Vec<f64>,
    seed: u64,
    out: &std::path::Path,
) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        n: Vec::new(),
        rho,
        u: None,
        heights: None,
        q0: None,
        m: Vec::new(),
        grid,
        replicas: 1,
        master_seed: seed,
        out_dir: out.to_path_buf(),
        epsilon: 0.25,
        statistic: "max_height".into(),
        extra_statistics: Vec::new(),
        equilibrium_replicas: 2000,
        bootstrap: 200,
        track: None,
        dt: 1e-3,
        k_max: 200,
        tolerance: None,
    }
}

fn simulate(a: SimulateArgs, seed: u64, out: &std::path::Path, workers: &Workers) -> Result<bool> {
    ensure!(
        a.samples >= 1 && a.replicas >= 1,
        "need at least one sample and one replica"
    );
    let u = a.u.unwrap_or_else(|| vec![a.rho]);
    let profile = SolidProfile::new(u, a.rho)?;
    let initial = Configuration::from_profile(a.n, a.rho, profile.u())?;
    let tracked = a.track.unwrap_or(profile.u().len()).min(a.n);
    let times = linspace(0.0, a.t_end * a.n as f64, a.samples + 1);
    let traces = workers.map(a.replicas, |r| {
        let mut state = initial.clone();
        let mut rows = Vec::with_capacity(times.len());
        let mut rng = RngStream::new(seed, r as u64);
        state.run_until(*times.last().expect("non-empty"), &mut rng, &times, |_, t, c| {
            rows.push(TrajectoryRow {
                replica: r,
                t,
                heights: c.heights()[..tracked].to_vec(),
                nonempty_fraction: c.nonempty_count() as f64 / c.n() as f64,
                max_height: c.max_height(),
            })
        })?;
        Ok::<_, zrp_core::Error>(rows)
    })?;
    let rows: Vec<TrajectoryRow> = traces.into_iter().flatten().collect();
    let path = out.join("trajectory.csv");
    trajectory_table(tracked, &rows)?.write(&path)?;
    println!("{}", path.display());
    Ok(true)
}
