//! Pass 2: time-parametrize the seed path with a receding-horizon unicycle
//! tracker whose controls are limited to what the two gaits can deliver.

use crate::error::{Error, Result};
use crate::maps::GaitMaps;
use crate::planner::PlannerConfig;
use crate::se2::{exp_twist, normalize_angle, Pose2, Twist2, Vec2};

/// Time-stamped unicycle trajectory. `controls[i]` is the (v, w) pair applied
/// over the interval arriving at `poses[i]`; `controls[0]` is a nominal
/// placeholder inside the constraint box.
#[derive(Debug, Clone)]
pub struct UnicycleTrajectory {
    pub poses: Vec<Pose2>,
    pub times: Vec<f64>,
    pub controls: Vec<(f64, f64)>,
}

impl UnicycleTrajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Control box from the gait maps: linear speed within a slack band of the
/// rectilinear cruise speed, angular rate within the turn-in-place range.
#[derive(Debug, Clone, Copy)]
pub struct ControlBox {
    pub v_min: f64,
    pub v_max: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl ControlBox {
    pub fn from_maps(maps: &GaitMaps, cfg: &PlannerConfig) -> ControlBox {
        let v_nom = maps.rl.vx_const;
        let (w_lo_deg, w_hi_deg) = maps.tip.omega_range_deg();
        ControlBox {
            v_min: v_nom - cfg.v_slack,
            v_max: v_nom + cfg.v_slack,
            w_min: w_lo_deg.to_radians(),
            w_max: w_hi_deg.to_radians(),
        }
    }

    fn clamp(&self, u: (f64, f64)) -> (f64, f64) {
        (
            u.0.clamp(self.v_min, self.v_max),
            u.1.clamp(self.w_min, self.w_max),
        )
    }
}

/// Resample a polyline at uniform arc spacing; the exact endpoint is always
/// the last sample.
fn resample_polyline(path: &[Vec2], spacing: f64) -> Vec<Vec2> {
    let mut out = vec![path[0]];
    let mut residual = spacing;
    for w in path.windows(2) {
        let seg = w[1] - w[0];
        let len = seg.norm();
        if len < 1e-12 {
            continue;
        }
        let dir = seg * (1.0 / len);
        let mut travelled = 0.0;
        while travelled + residual <= len {
            travelled += residual;
            out.push(w[0] + dir * travelled);
            residual = spacing;
        }
        residual -= len - travelled;
    }
    let end = *path.last().unwrap();
    if (out.last().unwrap().clone() - end).norm() > 1e-6 {
        out.push(end);
    }
    out
}

fn unicycle_advance(pose: &Pose2, u: (f64, f64), dt: f64) -> Pose2 {
    pose.compose(&exp_twist(&Twist2::new(u.0, 0.0, u.1), dt))
}

fn rollout_cost(
    pose: &Pose2,
    u_seq: &[(f64, f64)],
    targets: &[Vec2],
    dt: f64,
    ctrl_weight: f64,
) -> f64 {
    let mut g = *pose;
    let mut cost = 0.0;
    for (u, target) in u_seq.iter().zip(targets) {
        g = unicycle_advance(&g, *u, dt);
        let e = g.translation() - *target;
        cost += e.dot(e) + ctrl_weight * (u.0 * u.0 + u.1 * u.1);
    }
    cost
}

/// Pure-pursuit rollout used to warm start each horizon solve.
fn pure_pursuit_warm_start(
    pose: &Pose2,
    targets: &[Vec2],
    boxc: &ControlBox,
    dt: f64,
) -> Vec<(f64, f64)> {
    let mut g = *pose;
    let mut seq = Vec::with_capacity(targets.len());
    for target in targets {
        let d = *target - g.translation();
        let bearing = d.y.atan2(d.x);
        let alpha = normalize_angle(bearing - g.theta);
        let u = boxc.clamp((d.norm() / dt, alpha / dt));
        g = unicycle_advance(&g, u, dt);
        seq.push(u);
    }
    seq
}

/// Projected coordinate-descent pattern search over the horizon's control
/// sequence. Deterministic; stops after `iters` sweeps or when a sweep
/// improves the cost by less than `tol`.
fn optimize_horizon(
    pose: &Pose2,
    targets: &[Vec2],
    warm: Vec<(f64, f64)>,
    boxc: &ControlBox,
    cfg: &PlannerConfig,
) -> Vec<(f64, f64)> {
    let dt = cfg.t_intvl;
    let mut u = warm;
    let mut cost = rollout_cost(pose, &u, targets, dt, cfg.ctrl_weight);
    let mut step_v = cfg.v_slack / 2.0;
    let mut step_w = (boxc.w_max - boxc.w_min) / 8.0;
    for _ in 0..cfg.mpc_iters {
        let before = cost;
        for h in 0..u.len() {
            for comp in 0..2 {
                let step = if comp == 0 { step_v } else { step_w };
                for dir in [1.0, -1.0] {
                    let mut cand = u.clone();
                    if comp == 0 {
                        cand[h].0 += dir * step;
                    } else {
                        cand[h].1 += dir * step;
                    }
                    cand[h] = boxc.clamp(cand[h]);
                    let c = rollout_cost(pose, &cand, targets, dt, cfg.ctrl_weight);
                    if c < cost {
                        cost = c;
                        u = cand;
                        break;
                    }
                }
            }
        }
        let improvement = before - cost;
        if improvement <= 0.0 {
            step_v *= 0.5;
            step_w *= 0.5;
            if step_v < 1e-10 && step_w < 1e-12 {
                break;
            }
        } else if improvement < cfg.mpc_tol {
            break;
        }
    }
    u
}

/// Synthesize the timed unicycle trajectory tracking the seed path.
///
/// The seed is resampled at the arc distance one control interval covers at
/// the rectilinear cruise speed; a receding-horizon tracker then follows the
/// resampled references under the gait-derived control box.
pub fn synthesize_unicycle(
    start: Pose2,
    seed: &[Vec2],
    maps: &GaitMaps,
    cfg: &PlannerConfig,
) -> Result<UnicycleTrajectory> {
    if seed.len() < 2 {
        return Err(Error::InvalidConfig(
            "seed path needs at least 2 points".into(),
        ));
    }
    let boxc = ControlBox::from_maps(maps, cfg);
    let spacing = maps.rl.vx_const * cfg.t_intvl;
    let refs = resample_polyline(seed, spacing);
    let m = refs.len();
    let v_nom = maps.rl.vx_const;

    let mut poses = vec![start];
    let mut times = vec![0.0];
    let mut controls: Vec<(f64, f64)> = vec![(v_nom, 0.0)];
    let mut u_prev: Option<Vec<(f64, f64)>> = None;

    for i in 1..m {
        let pose = *poses.last().unwrap();
        // the horizon shrinks near the path end: padding it with the final
        // point would make the speed-constrained unicycle orbit the goal
        let hi = (i + cfg.horizon).min(m);
        let targets: Vec<Vec2> = refs[i..hi].to_vec();
        let mut warm = pure_pursuit_warm_start(&pose, &targets, &boxc, cfg.t_intvl);
        if let Some(prev) = &u_prev {
            // shift the previous solution one stage and keep the pursuit tail
            for (w, p) in warm.iter_mut().zip(prev.iter().skip(1)) {
                *w = *p;
            }
        }
        let u_seq = optimize_horizon(&pose, &targets, warm, &boxc, cfg);
        let u0 = u_seq[0];
        poses.push(unicycle_advance(&pose, u0, cfg.t_intvl));
        times.push(i as f64 * cfg.t_intvl);
        controls.push(u0);
        u_prev = Some(u_seq);
    }

    let terminal_err = (poses.last().unwrap().translation() - refs[m - 1]).norm();
    let limit = 4.0 * cfg.body_len;
    if terminal_err > limit {
        return Err(Error::Divergence {
            error_mm: terminal_err,
            limit_mm: limit,
        });
    }
    Ok(UnicycleTrajectory {
        poses,
        times,
        controls,
    })
}
