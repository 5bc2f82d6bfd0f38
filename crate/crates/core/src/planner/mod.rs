//! Three-pass multi-gait trajectory synthesis: seed path search, constrained
//! unicycle time parametrization, and turn-in-place insertion.

pub mod environment;
pub mod geom;
pub mod refine;
pub mod seed;
pub mod unicycle;

pub use environment::Environment;
pub use refine::{is_rl_traversable, refine_multigait, MultiGaitPlan};
pub use seed::plan_seed_path;
pub use unicycle::{synthesize_unicycle, UnicycleTrajectory};

use crate::error::Result;
use crate::maps::GaitMaps;
use crate::se2::{normalize_angle, Pose2, Vec2};

/// Tunables for all three passes.
#[derive(Debug, Clone, Copy)]
pub struct PlannerConfig {
    /// Grid cell for the seed search, mm.
    pub grid_cell: f64,
    /// Obstacle inflation radius, mm (half of a half body length).
    pub inflation: f64,
    /// Robot body length, mm; scales the divergence and rollout bounds.
    pub body_len: f64,
    /// Control interval: two rectilinear gait cycles, s.
    pub t_intvl: f64,
    /// Receding horizon length, stages.
    pub horizon: usize,
    /// Coordinate-descent sweep budget per horizon solve.
    pub mpc_iters: usize,
    /// Stop a solve when a sweep improves the cost by less than this.
    pub mpc_tol: f64,
    /// Slack around the rectilinear cruise speed, mm/s.
    pub v_slack: f64,
    /// Quadratic control penalty weight.
    pub ctrl_weight: f64,
    /// Turn-in-place cycles per inserted block.
    pub tip_cycles_per_block: usize,
    /// Non-traversable runs separated by at most this many feasible waypoints
    /// merge into one bridge.
    pub bridge_merge_gap: usize,
    /// Turn-in-place gait frequency, Hz.
    pub f_tip: f64,
    /// Rectilinear gait frequency magnitude, Hz (the published sign encodes
    /// the wave direction; durations use the magnitude).
    pub f_rl_mag: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            grid_cell: 50.0,
            inflation: 200.0,
            body_len: 800.0,
            t_intvl: 2.0 / 0.4,
            horizon: 5,
            mpc_iters: 200,
            mpc_tol: 1e-9,
            v_slack: 4.0,
            ctrl_weight: 1e-3,
            tip_cycles_per_block: 6,
            bridge_merge_gap: 2,
            f_tip: 0.2,
            f_rl_mag: 0.4,
        }
    }
}

impl PlannerConfig {
    /// Heading misalignment beyond which a leading turn block is inserted:
    /// the angle the rectilinear gait could close over one turn block's worth
    /// of feasible steering, `0.85 * w_rl_max / f_tip`.
    pub fn align_threshold_rad(&self, maps: &GaitMaps) -> f64 {
        let (_, w_max_deg) = maps.rl.omega_range_deg();
        (0.85 * w_max_deg).to_radians() / self.f_tip
    }
}

/// Everything the three passes produce for one scenario.
#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub seed: Vec<Vec2>,
    pub unicycle: UnicycleTrajectory,
    pub plan: MultiGaitPlan,
}

/// Run all three passes on a scenario.
///
/// When the start heading disagrees with the seed path's initial direction by
/// more than the alignment threshold, pass 2 runs from a virtually aligned
/// start and a leading turn block closing the true misalignment is prepended
/// to the refined plan, mirroring how the gait pairing is meant to be used:
/// turn in place first, then track.
pub fn plan_scenario(
    env: &Environment,
    maps: &GaitMaps,
    cfg: &PlannerConfig,
) -> Result<PlanOutput> {
    env.validate(cfg.inflation + cfg.grid_cell)?;
    let seed = plan_seed_path(env, cfg)?;
    let start = env.start_pose();
    let first_dir = seed
        .iter()
        .skip(1)
        .find(|p| (**p - seed[0]).norm() > 1e-6)
        .map(|p| {
            let d = *p - seed[0];
            d.y.atan2(d.x)
        })
        .unwrap_or(start.theta);
    let delta0 = normalize_angle(first_dir - start.theta);

    if delta0.abs() > cfg.align_threshold_rad(maps) {
        let aligned = Pose2::new(start.x, start.y, first_dir);
        let unicycle = synthesize_unicycle(aligned, &seed, maps, cfg)?;
        let refined = refine_multigait(&unicycle, maps, cfg)?;
        let plan = prepend_alignment_block(&refined, &start, delta0, maps, cfg)?;
        Ok(PlanOutput {
            seed,
            unicycle,
            plan,
        })
    } else {
        let unicycle = synthesize_unicycle(start, &seed, maps, cfg)?;
        let plan = refine_multigait(&unicycle, maps, cfg)?;
        Ok(PlanOutput {
            seed,
            unicycle,
            plan,
        })
    }
}

/// Prepend a leading turn block closing `delta0` at the true start pose; the
/// refined plan's first waypoint (the virtually aligned start) is replaced by
/// the block's final cycle.
fn prepend_alignment_block(
    refined: &MultiGaitPlan,
    start: &Pose2,
    delta0: f64,
    maps: &GaitMaps,
    cfg: &PlannerConfig,
) -> Result<MultiGaitPlan> {
    let cycles = cfg.tip_cycles_per_block as f64;
    let tip = &maps.tip;
    let (w_lo_deg, w_hi_deg) = tip.omega_range_deg();
    let bound_deg = if delta0 >= 0.0 { w_hi_deg } else { -w_lo_deg };
    let mut n_blocks = 1usize;
    loop {
        let w_deg = (delta0 / n_blocks as f64 * cfg.f_tip / cycles).to_degrees();
        if w_deg.abs() <= bound_deg {
            break;
        }
        n_blocks += 1;
    }
    let delta_block = delta0 / n_blocks as f64;
    let w_mg = delta_block * cfg.f_tip / cycles;
    let a_bar = tip.invert_omega(w_mg.to_degrees())?;
    let per_cycle = delta_block / cycles;
    let cycle_dur = 1.0 / cfg.f_tip;

    let mut plan = MultiGaitPlan {
        poses: vec![*start],
        times: vec![0.0],
        gait_ids: vec![crate::maps::GaitId::Rl],
        params: vec![0.0],
    };
    let mut heading = start.theta;
    let mut t = 0.0;
    let total_cycles = n_blocks * cfg.tip_cycles_per_block;
    for _ in 0..total_cycles {
        heading = normalize_angle(heading + per_cycle);
        t += cycle_dur;
        plan.poses.push(Pose2::new(start.x, start.y, heading));
        plan.times.push(t);
        plan.gait_ids.push(crate::maps::GaitId::Tip);
        plan.params.push(a_bar);
    }
    let shift = t;
    // skip the refined plan's waypoint 0: it coincides with the block's end
    for i in 1..refined.len() {
        plan.poses.push(refined.poses[i]);
        plan.times.push(refined.times[i] + shift);
        plan.gait_ids.push(refined.gait_ids[i]);
        plan.params.push(refined.params[i]);
    }
    Ok(plan)
}
