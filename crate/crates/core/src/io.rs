//! File outputs: CSV writers with unit-bearing headers, a plan-file parser,
//! and a small deterministic SVG writer for overhead plots.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::gait::BodyCurve;
use crate::maps::{GaitId, SweepRow};
use crate::planner::environment::Environment;
use crate::planner::MultiGaitPlan;
use crate::se2::{Pose2, Vec2};
use crate::tracking::EpochLog;
use std::fmt::Write as _;

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(
        "t_s,x_mm,y_mm,theta_rad,p1,p2,p3,xi_vx_mm_s,xi_vy_mm_s,xi_omega_rad_s\n",
    );
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.9},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9}",
            s.t, s.g.x, s.g.y, s.g.theta, s.p.fx, s.p.fy, s.p.tau, s.xi.vx, s.xi.vy, s.xi.omega
        );
    }
    out
}

pub fn body_curve_csv(curve: &BodyCurve) -> String {
    let mut out = String::from("s_mm,x_mm,y_mm,theta_rad,vx_mm_s,vy_mm_s,contact\n");
    for i in 0..curve.s.len() {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.9},{:.6},{:.6},{}",
            curve.s[i],
            curve.pos[i].x,
            curve.pos[i].y,
            curve.tangent_theta[i],
            curve.shape_vel[i].x,
            curve.shape_vel[i].y,
            curve.contact[i] as u8
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("a_bar_mm,vx_mm_s,vy_mm_s,omega_rad_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.12}",
            r.a_bar, r.twist.vx, r.twist.vy, r.twist.omega
        );
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidConfig(format!(
                "sweep csv line {} has {} fields, expected 4",
                ln + 1,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number '{s}' on line {}", ln + 1)))
        };
        rows.push(SweepRow {
            a_bar: num(fields[0])?,
            twist: crate::se2::Twist2::new(num(fields[1])?, num(fields[2])?, num(fields[3])?),
        });
    }
    Ok(rows)
}

pub fn plan_csv(plan: &MultiGaitPlan) -> String {
    let mut out = String::from("index,t_s,x_mm,y_mm,theta_rad,gait,param\n");
    for i in 0..plan.len() {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.9},{},{:.12}",
            i,
            plan.times[i],
            plan.poses[i].x,
            plan.poses[i].y,
            plan.poses[i].theta,
            plan.gait_ids[i],
            plan.params[i]
        );
    }
    out
}

pub fn parse_plan_csv(text: &str) -> Result<MultiGaitPlan> {
    let mut plan = MultiGaitPlan {
        poses: vec![],
        times: vec![],
        gait_ids: vec![],
        params: vec![],
    };
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::InvalidConfig(format!(
                "plan csv line {} has {} fields, expected 7",
                ln + 1,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number '{s}' on line {}", ln + 1)))
        };
        plan.times.push(num(fields[1])?);
        plan.poses
            .push(Pose2::new(num(fields[2])?, num(fields[3])?, num(fields[4])?));
        plan.gait_ids.push(GaitId::parse(fields[5])?);
        plan.params.push(num(fields[6])?);
    }
    if plan.is_empty() {
        return Err(Error::InvalidConfig("plan csv has no waypoints".into()));
    }
    Ok(plan)
}

pub fn error_log_csv(log: &[EpochLog]) -> String {
    let mut out = String::from(
        "epoch,waypoint_index,gait,x_err_mm,y_err_mm,theta_err_rad,w_fb_rad_s,command_param\n",
    );
    for e in log {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.9},{:.9},{:.12}",
            e.epoch, e.waypoint_index, e.gait, e.x_err, e.y_err, e.theta_err, e.w_fb, e.command_param
        );
    }
    out
}

pub fn executed_csv(executed: &[(f64, Pose2)]) -> String {
    let mut out = String::from("t_s,x_mm,y_mm,theta_rad\n");
    for (t, g) in executed {
        let _ = writeln!(out, "{:.6},{:.6},{:.6},{:.9}", t, g.x, g.y, g.theta);
    }
    out
}

/// Minimal SVG scene builder: world coordinates in mm, y flipped so north is
/// up on screen, deterministic float formatting.
pub struct SvgScene {
    min: Vec2,
    max: Vec2,
    body: String,
}

const SVG_MARGIN: f64 = 60.0;

impl SvgScene {
    pub fn new(min: Vec2, max: Vec2) -> SvgScene {
        SvgScene {
            min,
            max,
            body: String::new(),
        }
    }

    fn tx(&self, p: Vec2) -> (f64, f64) {
        (p.x - self.min.x + SVG_MARGIN, self.max.y - p.y + SVG_MARGIN)
    }

    pub fn polygon(&mut self, pts: &[Vec2], fill: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.tx(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "  <polygon points=\"{}\" fill=\"{fill}\" stroke=\"none\"/>",
            coords.join(" ")
        );
    }

    pub fn polyline(&mut self, pts: &[Vec2], stroke: &str, width: f64, dashed: bool) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.tx(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let dash = if dashed {
            " stroke-dasharray=\"14 10\""
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width:.1}\"{dash}/>",
            coords.join(" ")
        );
    }

    pub fn circle(&mut self, center: Vec2, r: f64, fill: &str) {
        let (x, y) = self.tx(center);
        let _ = writeln!(
            self.body,
            "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.1}\" fill=\"{fill}\"/>"
        );
    }

    pub fn finish(self) -> String {
        let w = self.max.x - self.min.x + 2.0 * SVG_MARGIN;
        let h = self.max.y - self.min.y + 2.0 * SVG_MARGIN;
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w:.1} {h:.1}\" \
             width=\"{w:.1}\" height=\"{h:.1}\">\n\
             <rect x=\"0\" y=\"0\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"white\"/>\n\
             {}</svg>\n",
            self.body
        )
    }
}

/// Overhead plot of a simulated body-frame trajectory.
pub fn trajectory_svg(traj: &Trajectory) -> String {
    let pts: Vec<Vec2> = traj.samples.iter().map(|s| s.g.translation()).collect();
    let (mut min, mut max) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
    for p in &pts {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    // keep a sensible canvas even for a point-like path
    let pad = 50.0;
    min = min - Vec2::new(pad, pad);
    max = max + Vec2::new(pad, pad);
    let mut scene = SvgScene::new(min, max);
    scene.polyline(&pts, "#1f6fb2", 3.0, false);
    if let Some(first) = pts.first() {
        scene.circle(*first, 6.0, "#2ca02c");
    }
    if let Some(last) = pts.last() {
        scene.circle(*last, 6.0, "#d62728");
    }
    scene.finish()
}

/// Overhead plot of a scenario: obstacles, planned waypoints and the executed
/// path.
pub fn scenario_svg(env: &Environment, planned: &[Pose2], executed: &[(f64, Pose2)]) -> String {
    let min = Vec2::new(env.bounds.min[0], env.bounds.min[1]);
    let max = Vec2::new(env.bounds.max[0], env.bounds.max[1]);
    let mut scene = SvgScene::new(min, max);
    for poly in env.obstacle_polys() {
        scene.polygon(&poly, "#b0b0b0");
    }
    let plan_pts: Vec<Vec2> = planned.iter().map(|p| p.translation()).collect();
    scene.polyline(&plan_pts, "#1f6fb2", 3.0, true);
    let exec_pts: Vec<Vec2> = executed.iter().map(|(_, p)| p.translation()).collect();
    scene.polyline(&exec_pts, "#d62728", 3.0, false);
    scene.circle(env.start_pose().translation(), 8.0, "#2ca02c");
    scene.circle(env.goal_point(), 8.0, "#9467bd");
    scene.finish()
}
