//! Scenario-driving command line for the snakegait library.
//!
//! Subcommands: `simulate`, `sweep`, `fit-map`, `plan`, `track`, `scenario`.
//! Flags are long-form only; a `--config` TOML file overrides flags; the
//! `SNAKEGAIT_SEED` environment variable overrides the `--seed` flag (and is
//! itself overridden by the config file).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 no path, 5 tracking failure.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use snakegait_core::dynamics::{simulate_gait, FrictionCoeffs};
use snakegait_core::gait::TipGaitParams;
use snakegait_core::io;
use snakegait_core::maps::{
    fit_map, run_sweep, ControlToActionMap, GaitId, GaitMaps, DEFAULT_AVG_CYCLES,
    DEFAULT_TRANSIENT_CYCLES,
};
use snakegait_core::planner::{plan_scenario, Environment, PlannerConfig};
use snakegait_core::tracking::{run_closed_loop, Disturbance, Gains, PlantModel};
use snakegait_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_NO_PATH: u8 = 4;
const EXIT_TRACKING: u8 = 5;

#[derive(Parser)]
#[command(
    name = "snakegait",
    about = "Planar snake-robot gait simulation, reduction, planning and tracking",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the turn-in-place gait and export the trajectory.
    Simulate(SimulateArgs),
    /// Sweep peak amplitudes, time-average, fit and save a motion map.
    Sweep(SweepArgs),
    /// Fit a control-to-action map from a sweep CSV.
    FitMap(FitMapArgs),
    /// Run the three planning passes on a scenario and save the plan.
    Plan(PlanArgs),
    /// Track a saved plan closed-loop on a plant model.
    Track(TrackArgs),
    /// Plan and track a scenario end to end, with plots.
    Scenario(ScenarioArgs),
}

#[derive(Args, Clone)]
struct GaitFlags {
    /// Peak amplitude, mm (signed).
    #[arg(long, default_value_t = 120.0)]
    abar: f64,
    /// Gait frequency, Hz.
    #[arg(long, default_value_t = 0.2)]
    freq: f64,
    /// Body arc length, mm.
    #[arg(long, default_value_t = 800.0)]
    length: f64,
    /// Minimum contact-segment length, mm.
    #[arg(long = "ell-min", default_value_t = 100.0)]
    ell_min: f64,
    /// Body samples (odd).
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

impl GaitFlags {
    fn params(&self) -> TipGaitParams {
        TipGaitParams {
            a_bar: self.abar,
            freq: self.freq,
            l_bar: self.length,
            ell_min: self.ell_min,
            n_samples: self.samples,
        }
    }
}

#[derive(Args, Clone)]
struct FrictionFlags {
    /// Forward drag coefficient.
    #[arg(long = "mu-f", default_value_t = 0.1)]
    mu_f: f64,
    /// Backward drag coefficient.
    #[arg(long = "mu-b", default_value_t = 0.1)]
    mu_b: f64,
    /// Lateral drag coefficient.
    #[arg(long = "mu-n", default_value_t = 0.5)]
    mu_n: f64,
}

impl FrictionFlags {
    fn coeffs(&self) -> FrictionCoeffs {
        FrictionCoeffs {
            mu_b: self.mu_b,
            mu_f: self.mu_f,
            mu_n: self.mu_n,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    gait: GaitFlags,
    #[command(flatten)]
    friction: FrictionFlags,
    /// Gait cycles to run.
    #[arg(long, default_value_t = 10)]
    cycles: usize,
    /// Integrator step, s (default: period/1000).
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
    /// TOML config file whose values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    abar: Option<f64>,
    freq: Option<f64>,
    length: Option<f64>,
    ell_min: Option<f64>,
    samples: Option<usize>,
    mu_f: Option<f64>,
    mu_b: Option<f64>,
    mu_n: Option<f64>,
    cycles: Option<usize>,
    dt: Option<f64>,
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    gait: GaitFlags,
    #[command(flatten)]
    friction: FrictionFlags,
    /// Smallest amplitude, mm.
    #[arg(long, default_value_t = -120.0)]
    amin: f64,
    /// Largest amplitude, mm.
    #[arg(long, default_value_t = 120.0)]
    amax: f64,
    /// Amplitude step, mm.
    #[arg(long, default_value_t = 20.0)]
    astep: f64,
    /// Steady-behavior cycles to average.
    #[arg(long = "avg-cycles", default_value_t = DEFAULT_AVG_CYCLES)]
    avg_cycles: usize,
    /// Start-up cycles discarded as transient.
    #[arg(long = "transient-cycles", default_value_t = DEFAULT_TRANSIENT_CYCLES)]
    transient_cycles: usize,
    /// Integrator step, s (default: period/1000).
    #[arg(long)]
    dt: Option<f64>,
    /// Worker pool size (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    freq: Option<f64>,
    length: Option<f64>,
    ell_min: Option<f64>,
    samples: Option<usize>,
    mu_f: Option<f64>,
    mu_b: Option<f64>,
    mu_n: Option<f64>,
    amin: Option<f64>,
    amax: Option<f64>,
    astep: Option<f64>,
    avg_cycles: Option<usize>,
    transient_cycles: Option<usize>,
    dt: Option<f64>,
    jobs: Option<usize>,
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitMapArgs {
    /// Sweep CSV with columns a_bar_mm, vx_mm_s, vy_mm_s, omega_rad_s.
    #[arg(long)]
    input: PathBuf,
    /// Gait the samples belong to: tip or rl.
    #[arg(long, default_value = "tip")]
    gait: String,
    /// Output map file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ScenarioSource {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Bundled scenario number (1..=3).
    #[arg(long)]
    bundled: Option<usize>,
}

impl ScenarioSource {
    fn load(&self) -> Result<Environment, Error> {
        match (&self.scenario, self.bundled) {
            (Some(path), None) => Environment::from_file(path),
            (None, Some(k)) => Environment::bundled_scenario(k),
            _ => Err(Error::InvalidConfig(
                "give exactly one of --scenario or --bundled".into(),
            )),
        }
    }
}

#[derive(Args, Clone)]
struct MapFlags {
    /// Turn-in-place map file (default: built-in reference map).
    #[arg(long = "tip-map")]
    tip_map: Option<PathBuf>,
    /// Rectilinear map file (default: built-in reference map).
    #[arg(long = "rl-map")]
    rl_map: Option<PathBuf>,
}

impl MapFlags {
    fn maps(&self) -> Result<GaitMaps, Error> {
        let mut maps = GaitMaps::default();
        if let Some(p) = &self.tip_map {
            maps.tip = ControlToActionMap::from_kv_str(&std::fs::read_to_string(p)?)?;
        }
        if let Some(p) = &self.rl_map {
            maps.rl = ControlToActionMap::from_kv_str(&std::fs::read_to_string(p)?)?;
        }
        Ok(maps)
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    maps: MapFlags,
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args, Clone)]
struct TrackingFlags {
    /// Plant model: map-kinematic or tip-dynamics.
    #[arg(long, default_value = "map-kinematic")]
    plant: String,
    /// RNG seed for disturbances (SNAKEGAIT_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Forward-speed bias on rectilinear epochs, mm/s.
    #[arg(long, default_value_t = 0.0)]
    bias: f64,
    /// Uniform twist noise half-widths: vx mm/s, vy mm/s, omega rad/s.
    #[arg(long = "noise-vx", default_value_t = 0.0)]
    noise_vx: f64,
    #[arg(long = "noise-vy", default_value_t = 0.0)]
    noise_vy: f64,
    #[arg(long = "noise-omega", default_value_t = 0.0)]
    noise_omega: f64,
    /// Terminal goal tolerance, mm.
    #[arg(long = "goal-tol", default_value_t = 100.0)]
    goal_tol: f64,
}

impl TrackingFlags {
    fn disturbance(&self, seed: u64) -> Option<Disturbance> {
        let noisy = self.bias != 0.0
            || self.noise_vx > 0.0
            || self.noise_vy > 0.0
            || self.noise_omega > 0.0;
        noisy.then_some(Disturbance {
            noise_half_width: [self.noise_vx, self.noise_vy, self.noise_omega],
            forward_bias: self.bias,
            seed,
        })
    }

    fn plant(&self, seed: u64) -> Result<PlantModel, Error> {
        match self.plant.as_str() {
            "map-kinematic" => Ok(PlantModel::MapKinematic {
                disturbance: self.disturbance(seed),
            }),
            "tip-dynamics" => {
                let params = TipGaitParams::default();
                let dt = params.period() / 200.0;
                Ok(PlantModel::TipDynamics {
                    params,
                    mu: FrictionCoeffs::default(),
                    dt,
                    disturbance: self.disturbance(seed),
                })
            }
            other => Err(Error::InvalidConfig(format!("unknown plant '{other}'"))),
        }
    }
}

#[derive(Args)]
struct TrackArgs {
    /// Plan CSV produced by `plan` or `scenario`.
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    maps: MapFlags,
    #[command(flatten)]
    tracking: TrackingFlags,
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    maps: MapFlags,
    #[command(flatten)]
    tracking: TrackingFlags,
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    scenario: Option<PathBuf>,
    bundled: Option<usize>,
    plant: Option<String>,
    seed: Option<u64>,
    bias: Option<f64>,
    noise_vx: Option<f64>,
    noise_vy: Option<f64>,
    noise_omega: Option<f64>,
    goal_tol: Option<f64>,
    out_dir: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NoPath => EXIT_NO_PATH,
        Error::BudgetExhausted { .. } => EXIT_TRACKING,
        Error::InvalidConfig(_) | Error::DegenerateFit(_) | Error::Io(_) | Error::Json(_) => {
            EXIT_CONFIG
        }
        Error::RootFind(_)
        | Error::SingularInertia
        | Error::TrajectoryTooShort { .. }
        | Error::ZeroSlope
        | Error::Divergence { .. }
        | Error::UnreachableRotation { .. } => EXIT_NUMERICAL,
    }
}

fn read_config<T: serde::de::DeserializeOwned + Default>(
    path: &Option<PathBuf>,
) -> Result<T, Error> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("config file: {e}")))
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("SNAKEGAIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

macro_rules! overlay {
    ($cfg:expr, $dst:expr, $($field:ident),* $(,)?) => {
        $( if let Some(v) = $cfg.$field { $dst.$field = v; } )*
    };
}

fn cmd_simulate(mut args: SimulateArgs) -> Result<(), Error> {
    let cfg: SimulateConfig = read_config(&args.config)?;
    overlay!(cfg, args.gait, abar, freq, length, ell_min, samples);
    overlay!(cfg, args.friction, mu_f, mu_b, mu_n);
    overlay!(cfg, args, cycles, out_dir);
    if let Some(dt) = cfg.dt {
        args.dt = Some(dt);
    }
    let params = args.gait.params();
    params.validate()?;
    let mu = args.friction.coeffs();
    mu.validate()?;
    let dt = args.dt.unwrap_or(params.period() / 1000.0);
    let traj = simulate_gait(&params, &mu, args.cycles, dt)?;
    write_file(&args.out_dir, "trajectory.csv", &io::trajectory_csv(&traj))?;
    write_file(&args.out_dir, "trajectory.svg", &io::trajectory_svg(&traj))?;
    let g = traj.final_pose();
    println!(
        "simulated {} cycles at abar = {} mm: final pose ({:.2} mm, {:.2} mm, {:.4} rad), net displacement {:.2} mm",
        args.cycles,
        params.a_bar,
        g.x,
        g.y,
        g.theta,
        g.translation().norm()
    );
    Ok(())
}

fn cmd_sweep(mut args: SweepArgs) -> Result<(), Error> {
    let cfg: SweepConfig = read_config(&args.config)?;
    overlay!(cfg, args.gait, freq, length, ell_min, samples);
    overlay!(cfg, args.friction, mu_f, mu_b, mu_n);
    overlay!(
        cfg,
        args,
        amin,
        amax,
        astep,
        avg_cycles,
        transient_cycles,
        jobs,
        out_dir
    );
    if let Some(dt) = cfg.dt {
        args.dt = Some(dt);
    }
    if !(args.astep > 0.0) || args.amax < args.amin {
        return Err(Error::InvalidConfig(
            "sweep grid needs astep > 0 and amax >= amin".into(),
        ));
    }
    let base = args.gait.params();
    let mu = args.friction.coeffs();
    mu.validate()?;
    let mut amplitudes = Vec::new();
    let mut a = args.amin;
    while a <= args.amax + 1e-9 {
        amplitudes.push(a);
        a += args.astep;
    }
    let dt = args.dt.unwrap_or(base.period() / 1000.0);
    let rows = run_sweep(
        &base,
        &mu,
        &amplitudes,
        args.avg_cycles,
        args.transient_cycles,
        dt,
        args.jobs,
    )?;
    write_file(&args.out_dir, "sweep.csv", &io::sweep_csv(&rows))?;
    let samples: Vec<(f64, snakegait_core::se2::Twist2)> =
        rows.iter().map(|r| (r.a_bar, r.twist)).collect();
    let fitted = fit_map(&samples, GaitId::Tip)?;
    write_file(&args.out_dir, "tip_map_fit.txt", &fitted.to_kv_string())?;
    println!(
        "swept {} amplitudes: omega fit slope {:.6} deg/s/mm, bias {:.6} deg/s, R^2 = {:.6}",
        rows.len(),
        fitted.omega_slope,
        fitted.omega_bias,
        fitted.r_squared.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_fit_map(args: FitMapArgs) -> Result<(), Error> {
    let rows = io::parse_sweep_csv(&std::fs::read_to_string(&args.input)?)?;
    let samples: Vec<(f64, snakegait_core::se2::Twist2)> =
        rows.iter().map(|r| (r.a_bar, r.twist)).collect();
    let gait = GaitId::parse(&args.gait)?;
    let fitted = fit_map(&samples, gait)?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&args.out, fitted.to_kv_string())?;
    println!(
        "fitted {} map from {} samples: R^2 = {:.6}",
        gait,
        rows.len(),
        fitted.r_squared.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<(), Error> {
    let env = args.source.load()?;
    let maps = args.maps.maps()?;
    let out = plan_scenario(&env, &maps, &PlannerConfig::default())?;
    write_file(&args.out_dir, "plan.csv", &io::plan_csv(&out.plan))?;
    let rolled = out.plan.rollout(&maps);
    let roll_err = (rolled.last().unwrap().translation() - env.goal_point()).norm();
    println!(
        "planned {} waypoints ({} turn-in-place, {} rectilinear); open-loop rollout ends {:.1} mm from goal",
        out.plan.len(),
        out.plan.gait_ids.iter().filter(|&&g| g == GaitId::Tip).count(),
        out.plan.gait_ids.iter().filter(|&&g| g == GaitId::Rl).count(),
        roll_err
    );
    Ok(())
}

fn run_tracking(
    env: &Environment,
    plan: &snakegait_core::planner::MultiGaitPlan,
    maps: &GaitMaps,
    tracking: &TrackingFlags,
    config_seed: Option<u64>,
    out_dir: &Path,
    svg_name: &str,
) -> Result<f64, Error> {
    let mut seed = tracking.seed;
    if let Some(s) = env_seed() {
        seed = s;
    }
    if let Some(s) = config_seed {
        seed = s;
    }
    let plant = tracking.plant(seed)?;
    let result = run_closed_loop(plan, &plant, &Gains::default(), maps)?;
    write_file(out_dir, "executed.csv", &io::executed_csv(&result.executed))?;
    write_file(out_dir, "error_log.csv", &io::error_log_csv(&result.log))?;
    write_file(
        out_dir,
        svg_name,
        &io::scenario_svg(env, &plan.poses, &result.executed),
    )?;
    let goal_err = (result.final_pose().translation() - env.goal_point()).norm();
    println!(
        "tracked {} epochs (hold engaged: {}): terminal goal error {:.1} mm",
        result.log.len(),
        result.hold_engaged,
        goal_err
    );
    Ok(goal_err)
}

fn cmd_track(args: TrackArgs) -> Result<u8, Error> {
    let env = args.source.load()?;
    let maps = args.maps.maps()?;
    let plan = io::parse_plan_csv(&std::fs::read_to_string(&args.plan)?)?;
    let goal_err = run_tracking(
        &env,
        &plan,
        &maps,
        &args.tracking,
        None,
        &args.out_dir,
        "track.svg",
    )?;
    Ok(if goal_err <= args.tracking.goal_tol {
        0
    } else {
        EXIT_TRACKING
    })
}

fn cmd_scenario(mut args: ScenarioArgs) -> Result<u8, Error> {
    let cfg: ScenarioConfig = read_config(&args.config)?;
    if cfg.scenario.is_some() {
        args.source.scenario = cfg.scenario.clone();
    }
    if cfg.bundled.is_some() {
        args.source.bundled = cfg.bundled;
    }
    overlay!(cfg, args.tracking, plant, bias, noise_vx, noise_vy, noise_omega, goal_tol);
    overlay!(cfg, args, out_dir);
    let env = args.source.load()?;
    let maps = args.maps.maps()?;
    let out = plan_scenario(&env, &maps, &PlannerConfig::default())?;
    write_file(&args.out_dir, "plan.csv", &io::plan_csv(&out.plan))?;
    let goal_err = run_tracking(
        &env,
        &out.plan,
        &maps,
        &args.tracking,
        cfg.seed,
        &args.out_dir,
        "scenario.svg",
    )?;
    Ok(if goal_err <= args.tracking.goal_tol {
        0
    } else {
        println!(
            "goal error exceeds the {:.1} mm tolerance",
            args.tracking.goal_tol
        );
        EXIT_TRACKING
    })
}

fn run() -> u8 {
    let cli = Cli::parse();
    let outcome: Result<u8, Error> = match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a).map(|()| 0),
        Cmd::Sweep(a) => cmd_sweep(a).map(|()| 0),
        Cmd::FitMap(a) => cmd_fit_map(a).map(|()| 0),
        Cmd::Plan(a) => cmd_plan(a).map(|()| 0),
        Cmd::Track(a) => cmd_track(a),
        Cmd::Scenario(a) => cmd_scenario(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
