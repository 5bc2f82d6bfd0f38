//! Pass 3: split the unicycle trajectory into rectilinear segments where its
//! turn rates are achievable and turn-in-place / straight / turn-in-place
//! bridges where they are not.

use crate::error::{Error, Result};
use crate::maps::{ControlToActionMap, GaitId, GaitMaps};
use crate::planner::unicycle::UnicycleTrajectory;
use crate::planner::PlannerConfig;
use crate::se2::{exp_twist, normalize_angle, Pose2, Vec2};

/// Timed waypoint sequence with per-waypoint gait and feed-forward input.
/// `params[i]` commands the motion arriving at waypoint `i` (curvature for
/// RL, peak amplitude for TiP); index 0 is the start state and its entry is
/// never commanded.
#[derive(Debug, Clone)]
pub struct MultiGaitPlan {
    pub poses: Vec<Pose2>,
    pub times: Vec<f64>,
    pub gait_ids: Vec<GaitId>,
    pub params: Vec<f64>,
}

impl MultiGaitPlan {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    fn push(&mut self, pose: Pose2, t: f64, gait: GaitId, param: f64) {
        self.poses.push(pose);
        self.times.push(t);
        self.gait_ids.push(gait);
        self.params.push(param);
    }

    /// Open-loop kinematic rollout through the maps: each waypoint's twist is
    /// applied for its scheduled duration.
    pub fn rollout(&self, maps: &GaitMaps) -> Vec<Pose2> {
        let mut out = vec![self.poses[0]];
        for i in 1..self.len() {
            let dur = self.times[i] - self.times[i - 1];
            let twist = maps.get(self.gait_ids[i]).eval_twist_rad(self.params[i]);
            out.push(out[i - 1].compose(&exp_twist(&twist, dur)));
        }
        out
    }
}

/// Whether the rectilinear gait can deliver a unicycle turn rate: the
/// magnitude must stay within 0.85 of the map's peak rate.
pub fn is_rl_traversable(w_uni_rad: f64, rl: &ControlToActionMap) -> bool {
    let (_, w_max_deg) = rl.omega_range_deg();
    w_uni_rad.to_degrees().abs() <= 0.85 * w_max_deg
}

struct Refiner<'a> {
    plan: MultiGaitPlan,
    maps: &'a GaitMaps,
    cfg: &'a PlannerConfig,
    t: f64,
    heading: f64,
}

impl<'a> Refiner<'a> {
    /// Insert turn-in-place blocks closing `delta` at the anchor point. Each
    /// block is `tip_cycles_per_block` one-cycle waypoints; when the single
    /// block's rate would exceed the map range, the rotation is split across
    /// more blocks, which halves the per-block rate until it fits.
    fn push_tip_blocks(&mut self, anchor: Vec2, delta: f64) -> Result<()> {
        let tip = &self.maps.tip;
        let cycles = self.cfg.tip_cycles_per_block as f64;
        let f_tip = self.cfg.f_tip;
        let (w_lo_deg, w_hi_deg) = tip.omega_range_deg();
        let bound_deg = if delta >= 0.0 { w_hi_deg } else { -w_lo_deg };
        let mut n_blocks = 1usize;
        loop {
            let w_deg = (delta / n_blocks as f64 * f_tip / cycles).to_degrees();
            if w_deg.abs() <= bound_deg {
                break;
            }
            n_blocks += 1;
            if n_blocks > 1024 {
                return Err(Error::UnreachableRotation { omega_deg_s: w_deg });
            }
        }
        let delta_block = delta / n_blocks as f64;
        let w_mg = delta_block * f_tip / cycles; // rad/s commanded per block
        let a_bar = tip.invert_omega(w_mg.to_degrees())?;
        let per_cycle = delta_block / cycles;
        for _ in 0..n_blocks {
            for _ in 0..self.cfg.tip_cycles_per_block {
                self.heading = normalize_angle(self.heading + per_cycle);
                self.t += 1.0 / f_tip;
                self.plan.push(
                    Pose2::new(anchor.x, anchor.y, self.heading),
                    self.t,
                    GaitId::Tip,
                    a_bar,
                );
            }
        }
        Ok(())
    }

    /// Straight rectilinear run from `from` to `to` at zero curvature, split
    /// into one-cycle waypoints of at most one cycle's travel each.
    fn push_rl_line(&mut self, from: Vec2, to: Vec2, heading: f64) {
        let dist = (to - from).norm();
        if dist < 1e-9 {
            return;
        }
        let v = self.maps.rl.vx_const;
        let cycle_travel = v / self.cfg.f_rl_mag;
        let m = (dist / cycle_travel).ceil().max(1.0) as usize;
        let spacing = dist / m as f64;
        let dur = spacing / v;
        for step in 1..=m {
            let p = from + (to - from) * (step as f64 / m as f64);
            self.t += dur;
            self.plan
                .push(Pose2::new(p.x, p.y, heading), self.t, GaitId::Rl, 0.0);
        }
        self.heading = heading;
    }
}

/// Refine the unicycle trajectory into a multi-gait plan.
///
/// Waypoints whose arrival turn rate passes `is_rl_traversable` stay
/// rectilinear with the curvature that reproduces the rate. Each maximal
/// non-traversable run is bridged by a turn toward the straight line
/// connecting its endpoints, a zero-curvature rectilinear run along it, and
/// a turn restoring the unicycle heading. A leading turn block aligns the
/// start heading with the first displacement when they disagree by more than
/// the alignment threshold.
pub fn refine_multigait(
    uni: &UnicycleTrajectory,
    maps: &GaitMaps,
    cfg: &PlannerConfig,
) -> Result<MultiGaitPlan> {
    if uni.is_empty() {
        return Err(Error::InvalidConfig("empty unicycle trajectory".into()));
    }
    let n = uni.len();
    let mut r = Refiner {
        plan: MultiGaitPlan {
            poses: vec![uni.poses[0]],
            times: vec![uni.times[0]],
            gait_ids: vec![GaitId::Rl],
            params: vec![0.0],
        },
        maps,
        cfg,
        t: uni.times[0],
        heading: uni.poses[0].theta,
    };

    // leading alignment to the first actual displacement
    if n >= 2 {
        if let Some(j) = (1..n).find(|&j| {
            (uni.poses[j].translation() - uni.poses[0].translation()).norm() > 1e-6
        }) {
            let d = uni.poses[j].translation() - uni.poses[0].translation();
            let first_heading = d.y.atan2(d.x);
            let delta = normalize_angle(first_heading - uni.poses[0].theta);
            if delta.abs() > cfg.align_threshold_rad(maps) {
                r.push_tip_blocks(uni.poses[0].translation(), delta)?;
            }
        }
    }

    let mut i = 1;
    while i < n {
        let w_i = uni.controls[i].1;
        if is_rl_traversable(w_i, &maps.rl) {
            let kappa = maps.rl.invert_omega(w_i.to_degrees())?;
            r.t += cfg.t_intvl;
            r.plan.push(uni.poses[i], r.t, GaitId::Rl, kappa);
            r.heading = uni.poses[i].theta;
            i += 1;
        } else {
            // maximal non-traversable run i..=k, bridged from anchor j = i-1;
            // runs separated by short feasible stretches are one corner the
            // tracker dithered across, so they merge into a single bridge
            let j = i - 1;
            let mut k = i;
            loop {
                while k + 1 < n && !is_rl_traversable(uni.controls[k + 1].1, &maps.rl) {
                    k += 1;
                }
                let mut probe = k + 1;
                while probe < n
                    && probe - k <= cfg.bridge_merge_gap
                    && is_rl_traversable(uni.controls[probe].1, &maps.rl)
                {
                    probe += 1;
                }
                if probe < n
                    && probe - k - 1 <= cfg.bridge_merge_gap
                    && !is_rl_traversable(uni.controls[probe].1, &maps.rl)
                {
                    k = probe;
                } else {
                    break;
                }
            }
            let pos_j = uni.poses[j].translation();
            let pos_k = uni.poses[k].translation();
            let line = pos_k - pos_j;
            let line_heading = if line.norm() > 1e-9 {
                line.y.atan2(line.x)
            } else {
                r.heading
            };
            let delta_in = normalize_angle(line_heading - r.heading);
            r.push_tip_blocks(pos_j, delta_in)?;
            r.push_rl_line(pos_j, pos_k, line_heading);
            if k + 1 < n {
                // restore the unicycle heading so the next segment lines up;
                // pointless at the terminal waypoint, where only the goal
                // position matters
                let delta_out = normalize_angle(uni.poses[k].theta - line_heading);
                r.push_tip_blocks(pos_k, delta_out)?;
            }
            i = k + 1;
        }
    }
    Ok(r.plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn straight_uni(n: usize, t_intvl: f64) -> UnicycleTrajectory {
        let poses = (0..n)
            .map(|i| Pose2::new(180.0 * i as f64, 0.0, 0.0))
            .collect();
        let times = (0..n).map(|i| t_intvl * i as f64).collect();
        let controls = (0..n).map(|_| (36.0, 0.0)).collect();
        UnicycleTrajectory {
            poses,
            times,
            controls,
        }
    }

    #[test]
    fn traversability_threshold() {
        let rl = ControlToActionMap::rl_reference();
        assert!(is_rl_traversable(0.0, &rl));
        assert!(!is_rl_traversable(2.164f64.to_radians(), &rl));
        assert!(is_rl_traversable((-2.0f64).to_radians(), &rl));
    }

    #[test]
    fn all_traversable_stays_rectilinear() {
        let maps = GaitMaps::default();
        let cfg = PlannerConfig::default();
        let uni = straight_uni(5, cfg.t_intvl);
        let plan = refine_multigait(&uni, &maps, &cfg).unwrap();
        assert_eq!(plan.len(), 5);
        assert!(plan.gait_ids.iter().all(|&g| g == GaitId::Rl));
        assert!(plan.params.iter().all(|&k| k == 0.0));
        for w in plan.times.windows(2) {
            assert!((w[1] - w[0] - cfg.t_intvl).abs() < 1e-12);
        }
    }

    #[test]
    fn leading_alignment_fires_on_misaligned_start() {
        let maps = GaitMaps::default();
        let cfg = PlannerConfig::default();
        let mut uni = straight_uni(4, cfg.t_intvl);
        // start facing north, path heading east
        uni.poses[0] = Pose2::new(0.0, 0.0, PI / 2.0);
        let plan = refine_multigait(&uni, &maps, &cfg).unwrap();
        let n_tip = plan.gait_ids.iter().filter(|&&g| g == GaitId::Tip).count();
        assert_eq!(n_tip % cfg.tip_cycles_per_block, 0);
        assert!(n_tip >= cfg.tip_cycles_per_block);
        // the block closes the quarter turn under the map model
        let after_block = plan.poses[n_tip].theta;
        assert!((after_block - 0.0).abs() < 1e-9);
        // block rotation matches the commanded change
        let total: f64 = (1..=n_tip)
            .map(|i| normalize_angle(plan.poses[i].theta - plan.poses[i - 1].theta))
            .sum();
        assert!((total - (-PI / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn corner_is_bridged_with_tip_blocks() {
        let maps = GaitMaps::default();
        let cfg = PlannerConfig::default();
        // right-angle corner: east then north, with an infeasible turn at i=3
        let mut poses = vec![
            Pose2::new(0.0, 0.0, 0.0),
            Pose2::new(180.0, 0.0, 0.0),
            Pose2::new(360.0, 0.0, 0.0),
            Pose2::new(360.0, 180.0, PI / 2.0),
            Pose2::new(360.0, 360.0, PI / 2.0),
        ];
        let times = (0..5).map(|i| cfg.t_intvl * i as f64).collect();
        let mut controls = vec![(36.0, 0.0); 5];
        controls[3] = (36.0, (PI / 2.0) / cfg.t_intvl); // far beyond feasible
        poses[3] = Pose2::new(360.0, 180.0, PI / 2.0);
        let uni = UnicycleTrajectory {
            poses,
            times,
            controls,
        };
        let plan = refine_multigait(&uni, &maps, &cfg).unwrap();
        let n_tip = plan.gait_ids.iter().filter(|&&g| g == GaitId::Tip).count();
        assert!(n_tip >= 2 * cfg.tip_cycles_per_block);
        assert_eq!(n_tip % cfg.tip_cycles_per_block, 0);
        // plan ends at the unicycle endpoint
        let last = plan.poses.last().unwrap();
        assert!((last.x - 360.0).abs() < 1e-9);
        assert!((last.y - 360.0).abs() < 1e-9);
        // every rectilinear waypoint satisfies the threshold under its curvature
        for (i, &g) in plan.gait_ids.iter().enumerate().skip(1) {
            if g == GaitId::Rl {
                let w = maps.rl.omega_deg(plan.params[i]);
                assert!(w.abs() <= 0.85 * maps.rl.omega_range_deg().1 + 1e-9);
            }
        }
    }

    #[test]
    fn turn_rate_formula_examples() {
        // quarter-turn correction at 0.2 Hz over 6 cycles: 3 deg/s in range
        let w_mg = (PI / 2.0) * 0.2 / 6.0;
        assert!((w_mg - 0.05236).abs() < 1e-5);
        assert!((w_mg.to_degrees() - 3.0).abs() < 0.01);
        let tip = ControlToActionMap::tip_reference();
        let a = tip.invert_omega(-w_mg.to_degrees()).unwrap();
        assert!((a - (3.0 + 0.0352) / 0.0382).abs() < 0.02);
        // 30 degree correction gives 1 deg/s
        let w30 = (30.0f64.to_radians()) * 0.2 / 6.0;
        assert!((w30.to_degrees() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oversized_rotation_splits_into_more_blocks() {
        let maps = GaitMaps::default();
        let cfg = PlannerConfig::default();
        let mut uni = straight_uni(4, cfg.t_intvl);
        // start heading opposite to travel: |delta| = pi needs 6 deg/s, above
        // the 4.5/4.6 deg/s range, so two blocks of 6 cycles are required
        uni.poses[0] = Pose2::new(0.0, 0.0, PI);
        let plan = refine_multigait(&uni, &maps, &cfg).unwrap();
        let n_tip = plan.gait_ids.iter().filter(|&&g| g == GaitId::Tip).count();
        assert_eq!(n_tip, 2 * cfg.tip_cycles_per_block);
        let total: f64 = (1..=n_tip)
            .map(|i| normalize_angle(plan.poses[i].theta - plan.poses[i - 1].theta))
            .sum();
        assert!((total.abs() - PI).abs() < 1e-9);
    }

    #[test]
    fn rollout_of_straight_plan_reaches_endpoint() {
        let maps = GaitMaps::default();
        let cfg = PlannerConfig::default();
        let uni = straight_uni(5, cfg.t_intvl);
        let plan = refine_multigait(&uni, &maps, &cfg).unwrap();
        let rolled = plan.rollout(&maps);
        let last = rolled.last().unwrap();
        assert!((last.x - 720.0).abs() < 1e-6);
        assert!(last.y.abs() < 1e-6);
    }
}
