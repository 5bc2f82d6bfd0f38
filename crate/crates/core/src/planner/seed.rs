//! Pass 1: collision-free seed path by 8-connected grid search over inflated
//! obstacles, followed by line-of-sight shortcutting.

use crate::error::{Error, Result};
use crate::planner::environment::Environment;
use crate::planner::geom;
use crate::planner::PlannerConfig;
use crate::se2::Vec2;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Grid {
    nx: usize,
    ny: usize,
    origin: Vec2,
    cell: f64,
    blocked: Vec<bool>,
}

impl Grid {
    fn build(env: &Environment, cfg: &PlannerConfig) -> Grid {
        let cell = cfg.grid_cell;
        let w = env.bounds.max[0] - env.bounds.min[0];
        let h = env.bounds.max[1] - env.bounds.min[1];
        let nx = (w / cell).floor().max(1.0) as usize;
        let ny = (h / cell).floor().max(1.0) as usize;
        let origin = Vec2::new(env.bounds.min[0], env.bounds.min[1]);
        let polys = env.obstacle_polys();
        let mut blocked = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let c = Vec2::new(
                    origin.x + (ix as f64 + 0.5) * cell,
                    origin.y + (iy as f64 + 0.5) * cell,
                );
                blocked[iy * nx + ix] = polys
                    .iter()
                    .any(|p| geom::dist_point_polygon(c, p) <= cfg.inflation);
            }
        }
        Grid {
            nx,
            ny,
            origin,
            cell,
            blocked,
        }
    }

    fn center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell,
            self.origin.y + (iy as f64 + 0.5) * self.cell,
        )
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let ix = (((p.x - self.origin.x) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let iy = (((p.y - self.origin.y) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        (ix, iy)
    }

    /// The cell containing `p`, or the nearest free cell within two rings.
    fn free_cell_near(&self, p: Vec2) -> Option<(usize, usize)> {
        let (ix, iy) = self.cell_of(p);
        if !self.blocked[iy * self.nx + ix] {
            return Some((ix, iy));
        }
        for ring in 1..=2isize {
            let mut best: Option<(f64, (usize, usize))> = None;
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (jx, jy) = (ix as isize + dx, iy as isize + dy);
                    if jx < 0 || jy < 0 || jx >= self.nx as isize || jy >= self.ny as isize {
                        continue;
                    }
                    let (jx, jy) = (jx as usize, jy as usize);
                    if self.blocked[jy * self.nx + jx] {
                        continue;
                    }
                    let d = (self.center(jx, jy) - p).norm();
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, (jx, jy)));
                    }
                }
            }
            if let Some((_, c)) = best {
                return Some(c);
            }
        }
        None
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest f first;
        // ties break on g then index so expansion order is deterministic
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn astar(grid: &Grid, start: (usize, usize), goal: (usize, usize)) -> Option<Vec<(usize, usize)>> {
    let n = grid.nx * grid.ny;
    let idx = |c: (usize, usize)| c.1 * grid.nx + c.0;
    let mut g_cost = vec![f64::INFINITY; n];
    let mut came: Vec<usize> = vec![usize::MAX; n];
    let mut open = BinaryHeap::new();
    let goal_c = grid.center(goal.0, goal.1);
    let heuristic = |c: (usize, usize)| (grid.center(c.0, c.1) - goal_c).norm();
    g_cost[idx(start)] = 0.0;
    open.push(HeapEntry {
        f: heuristic(start),
        g: 0.0,
        idx: idx(start),
    });
    const OFFS: [(isize, isize); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    while let Some(e) = open.pop() {
        if e.g > g_cost[e.idx] {
            continue;
        }
        let (cx, cy) = (e.idx % grid.nx, e.idx / grid.nx);
        if (cx, cy) == goal {
            let mut path = vec![(cx, cy)];
            let mut cur = e.idx;
            while came[cur] != usize::MAX {
                cur = came[cur];
                path.push((cur % grid.nx, cur / grid.nx));
            }
            path.reverse();
            return Some(path);
        }
        for (dx, dy) in OFFS {
            let (jx, jy) = (cx as isize + dx, cy as isize + dy);
            if jx < 0 || jy < 0 || jx >= grid.nx as isize || jy >= grid.ny as isize {
                continue;
            }
            let j = jy as usize * grid.nx + jx as usize;
            if grid.blocked[j] {
                continue;
            }
            let step = if dx != 0 && dy != 0 {
                grid.cell * std::f64::consts::SQRT_2
            } else {
                grid.cell
            };
            let cand = e.g + step;
            if cand < g_cost[j] {
                g_cost[j] = cand;
                came[j] = e.idx;
                open.push(HeapEntry {
                    f: cand + heuristic((jx as usize, jy as usize)),
                    g: cand,
                    idx: j,
                });
            }
        }
    }
    None
}

/// True when the segment keeps at least the inflation clearance from every
/// obstacle (endpoints must already be clear).
pub fn line_free(a: Vec2, b: Vec2, polys: &[Vec<Vec2>], inflation: f64) -> bool {
    polys
        .iter()
        .all(|p| geom::dist_segment_polygon(a, b, p) > inflation - 1e-9)
}

fn shortcut(points: Vec<Vec2>, polys: &[Vec<Vec2>], inflation: f64) -> Vec<Vec2> {
    if points.len() <= 2 {
        return points;
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let mut j = points.len() - 1;
        while j > i + 1 && !line_free(points[i], points[j], polys, inflation) {
            j -= 1;
        }
        out.push(points[j]);
        i = j;
    }
    out
}

/// Plan a collision-free polyline from the start position to the goal over
/// obstacles inflated by `cfg.inflation`.
pub fn plan_seed_path(env: &Environment, cfg: &PlannerConfig) -> Result<Vec<Vec2>> {
    let start = Vec2::new(env.start.x, env.start.y);
    let goal = env.goal_point();
    let polys = env.obstacle_polys();
    let grid = Grid::build(env, cfg);
    let sc = grid.free_cell_near(start).ok_or(Error::NoPath)?;
    let gc = grid.free_cell_near(goal).ok_or(Error::NoPath)?;
    let cells = astar(&grid, sc, gc).ok_or(Error::NoPath)?;
    let mut points: Vec<Vec2> = Vec::with_capacity(cells.len() + 2);
    points.push(start);
    for &(ix, iy) in &cells {
        points.push(grid.center(ix, iy));
    }
    points.push(goal);
    Ok(shortcut(points, &polys, cfg.inflation))
}
