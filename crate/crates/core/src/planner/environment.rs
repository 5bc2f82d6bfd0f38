//! Scenario environments: bounds, polygonal obstacles, start pose and goal
//! point, with a JSON file format and three bundled scenarios.

use crate::error::{Error, Result};
use crate::planner::geom;
use crate::se2::{Pose2, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalPoint {
    pub x: f64,
    pub y: f64,
}

/// A planning scenario. Units are mm throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub bounds: Bounds,
    /// Simple polygons as lists of [x, y] vertices.
    pub obstacles: Vec<Vec<[f64; 2]>>,
    pub start: StartPose,
    pub goal: GoalPoint,
}

impl Environment {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    pub fn start_pose(&self) -> Pose2 {
        Pose2::new(self.start.x, self.start.y, self.start.theta)
    }

    pub fn goal_point(&self) -> Vec2 {
        Vec2::new(self.goal.x, self.goal.y)
    }

    pub fn obstacle_polys(&self) -> Vec<Vec<Vec2>> {
        self.obstacles
            .iter()
            .map(|poly| poly.iter().map(|p| Vec2::new(p[0], p[1])).collect())
            .collect()
    }

    fn in_bounds(&self, p: Vec2) -> bool {
        p.x >= self.bounds.min[0]
            && p.x <= self.bounds.max[0]
            && p.y >= self.bounds.min[1]
            && p.y <= self.bounds.max[1]
    }

    /// Check structural validity: ordered bounds, simple polygons, and start
    /// and goal inside the bounds with at least `clearance` mm to every
    /// obstacle (the planner needs inflation plus one grid cell).
    pub fn validate(&self, clearance: f64) -> Result<()> {
        if !(self.bounds.min[0] < self.bounds.max[0] && self.bounds.min[1] < self.bounds.max[1]) {
            return Err(Error::InvalidConfig("bounds must satisfy min < max".into()));
        }
        let polys = self.obstacle_polys();
        for (i, poly) in polys.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::InvalidConfig(format!(
                    "obstacle {i} has fewer than 3 vertices"
                )));
            }
            if !geom::polygon_is_simple(poly) {
                return Err(Error::InvalidConfig(format!(
                    "obstacle {i} is self-intersecting"
                )));
            }
        }
        let start = Vec2::new(self.start.x, self.start.y);
        let goal = self.goal_point();
        for (name, p) in [("start", start), ("goal", goal)] {
            if !self.in_bounds(p) {
                return Err(Error::InvalidConfig(format!("{name} is outside bounds")));
            }
            for (i, poly) in polys.iter().enumerate() {
                if geom::dist_point_polygon(p, poly) < clearance {
                    return Err(Error::InvalidConfig(format!(
                        "{name} is within {clearance} mm of obstacle {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Bundled scenario `k` in 1..=3: (1) corridor with one right-angle
    /// corner, (2) S-corridor with two opposite corners, (3) slalom with
    /// three staggered blocks. Narrowest passages are one body length wide.
    pub fn bundled_scenario(k: usize) -> Result<Self> {
        let text = match k {
            1 => include_str!("../../scenarios/scenario1.json"),
            2 => include_str!("../../scenarios/scenario2.json"),
            3 => include_str!("../../scenarios/scenario3.json"),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "bundled scenario must be 1..=3, got {k}"
                )))
            }
        };
        Self::from_json_str(text)
    }
}
