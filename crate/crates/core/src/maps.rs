//! Reduced-order control-to-action motion models: time-averaged steady
//! behavior of a gait, least-squares map fitting, the two published built-in
//! maps, and a human-readable key-value serialization.
//!
//! Map angular rates are kept in deg/s to match their published form;
//! `eval_twist_rad` converts at the planner boundary.

use crate::dynamics::{simulate_gait, Trajectory};
use crate::error::{Error, Result};
use crate::gait::TipGaitParams;
use crate::se2::Twist2;
use std::fmt;

/// Gait identifier: turn-in-place or rectilinear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitId {
    Tip,
    Rl,
}

impl fmt::Display for GaitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaitId::Tip => write!(f, "TiP"),
            GaitId::Rl => write!(f, "RL"),
        }
    }
}

impl GaitId {
    pub fn parse(s: &str) -> Result<GaitId> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tip" => Ok(GaitId::Tip),
            "rl" => Ok(GaitId::Rl),
            other => Err(Error::InvalidConfig(format!("unknown gait id '{other}'"))),
        }
    }
}

/// Affine map from a gait's scalar input to its time-averaged body twist,
/// with saturation limits on the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlToActionMap {
    pub gait_id: GaitId,
    /// Mean forward speed, mm/s.
    pub vx_const: f64,
    /// Mean lateral speed, mm/s.
    pub vy_const: f64,
    /// Angular-rate slope, (deg/s) per input unit.
    pub omega_slope: f64,
    /// Angular-rate bias, deg/s.
    pub omega_bias: f64,
    /// Input saturation range (mm for peak amplitude, 1/mm for curvature).
    pub input_min: f64,
    pub input_max: f64,
    /// Coefficient of determination of the omega fit, when fitted.
    pub r_squared: Option<f64>,
    /// Free-form note on where the constants came from.
    pub provenance: String,
}

/// Rectilinear gait frequency, Hz. The published value is -0.4 Hz with the
/// sign encoding the anterior wave direction; durations use the magnitude.
pub const RL_FREQ_HZ: f64 = -0.4;

/// Turn-in-place gait frequency used by the planner, Hz.
pub const TIP_FREQ_HZ: f64 = 0.2;

impl ControlToActionMap {
    /// Published turn-in-place map: (5.3, 0, -0.0382 A + 0.0352 deg/s) on
    /// A in [-120, 120] mm.
    pub fn tip_reference() -> Self {
        ControlToActionMap {
            gait_id: GaitId::Tip,
            vx_const: 5.3,
            vy_const: 0.0,
            omega_slope: -0.0382,
            omega_bias: 0.0352,
            input_min: -120.0,
            input_max: 120.0,
            r_squared: None,
            provenance: "reference".into(),
        }
    }

    /// Published rectilinear map: (36, 0, -1696.7 kappa deg/s) on
    /// kappa in [-1.5e-3, 1.5e-3] 1/mm.
    pub fn rl_reference() -> Self {
        ControlToActionMap {
            gait_id: GaitId::Rl,
            vx_const: 36.0,
            vy_const: 0.0,
            omega_slope: -1696.7,
            omega_bias: 0.0,
            input_min: -1.5e-3,
            input_max: 1.5e-3,
            r_squared: None,
            provenance: "reference".into(),
        }
    }

    pub fn clamp_input(&self, input: f64) -> f64 {
        input.clamp(self.input_min, self.input_max)
    }

    /// Angular rate in deg/s at a (saturation-clamped) input.
    pub fn omega_deg(&self, input: f64) -> f64 {
        self.omega_slope * self.clamp_input(input) + self.omega_bias
    }

    /// Evaluate the map: `(vx mm/s, vy mm/s, omega deg/s)`.
    pub fn eval(&self, input: f64) -> (f64, f64, f64) {
        (self.vx_const, self.vy_const, self.omega_deg(input))
    }

    /// Evaluate as a body twist with the angular rate converted to rad/s.
    pub fn eval_twist_rad(&self, input: f64) -> Twist2 {
        Twist2::new(self.vx_const, self.vy_const, self.omega_deg(input).to_radians())
    }

    /// Invert the angular-rate component: input achieving `omega_deg`,
    /// clamped to the saturation range.
    pub fn invert_omega(&self, omega_deg: f64) -> Result<f64> {
        if self.omega_slope == 0.0 {
            return Err(Error::ZeroSlope);
        }
        Ok(self.clamp_input((omega_deg - self.omega_bias) / self.omega_slope))
    }

    /// Extremes of the reachable angular rate over the input range, deg/s,
    /// returned as (min, max).
    pub fn omega_range_deg(&self) -> (f64, f64) {
        let a = self.omega_deg(self.input_min);
        let b = self.omega_deg(self.input_max);
        (a.min(b), a.max(b))
    }

    /// Serialize as ordered `key = value` lines.
    pub fn to_kv_string(&self) -> String {
        let r2 = self
            .r_squared
            .map(|r| format!("{r:.12}"))
            .unwrap_or_else(|| "none".into());
        format!(
            "gait_id = {}\n\
             vx_const_mm_s = {}\n\
             vy_const_mm_s = {}\n\
             omega_slope_deg_s_per_unit = {}\n\
             omega_bias_deg_s = {}\n\
             input_min = {}\n\
             input_max = {}\n\
             r_squared = {}\n\
             provenance = {}\n",
            self.gait_id,
            self.vx_const,
            self.vy_const,
            self.omega_slope,
            self.omega_bias,
            self.input_min,
            self.input_max,
            r2,
            self.provenance
        )
    }

    /// Parse the `key = value` form written by `to_kv_string`.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut map = ControlToActionMap {
            gait_id: GaitId::Tip,
            vx_const: f64::NAN,
            vy_const: f64::NAN,
            omega_slope: f64::NAN,
            omega_bias: f64::NAN,
            input_min: f64::NAN,
            input_max: f64::NAN,
            r_squared: None,
            provenance: String::new(),
        };
        let parse_num = |key: &str, v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number for '{key}': '{v}'")))
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected 'key = value': '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "gait_id" => map.gait_id = GaitId::parse(value)?,
                "vx_const_mm_s" => map.vx_const = parse_num(key, value)?,
                "vy_const_mm_s" => map.vy_const = parse_num(key, value)?,
                "omega_slope_deg_s_per_unit" => map.omega_slope = parse_num(key, value)?,
                "omega_bias_deg_s" => map.omega_bias = parse_num(key, value)?,
                "input_min" => map.input_min = parse_num(key, value)?,
                "input_max" => map.input_max = parse_num(key, value)?,
                "r_squared" => {
                    map.r_squared = if value == "none" {
                        None
                    } else {
                        Some(parse_num(key, value)?)
                    }
                }
                "provenance" => map.provenance = value.to_string(),
                other => {
                    return Err(Error::InvalidConfig(format!("unknown map key '{other}'")));
                }
            }
        }
        for (name, v) in [
            ("vx_const_mm_s", map.vx_const),
            ("vy_const_mm_s", map.vy_const),
            ("omega_slope_deg_s_per_unit", map.omega_slope),
            ("omega_bias_deg_s", map.omega_bias),
            ("input_min", map.input_min),
            ("input_max", map.input_max),
        ] {
            if v.is_nan() {
                return Err(Error::InvalidConfig(format!("missing map key '{name}'")));
            }
        }
        if !(map.input_min < map.input_max) {
            return Err(Error::InvalidConfig(
                "map input_min must be below input_max".into(),
            ));
        }
        Ok(map)
    }
}

/// The planner's pair of gait maps.
#[derive(Debug, Clone)]
pub struct GaitMaps {
    pub tip: ControlToActionMap,
    pub rl: ControlToActionMap,
}

impl Default for GaitMaps {
    fn default() -> Self {
        GaitMaps {
            tip: ControlToActionMap::tip_reference(),
            rl: ControlToActionMap::rl_reference(),
        }
    }
}

impl GaitMaps {
    pub fn get(&self, gait: GaitId) -> &ControlToActionMap {
        match gait {
            GaitId::Tip => &self.tip,
            GaitId::Rl => &self.rl,
        }
    }
}

/// Cycles discarded as start-up transient before averaging.
pub const DEFAULT_TRANSIENT_CYCLES: usize = 2;

/// Cycles in the steady-behavior averaging window.
pub const DEFAULT_AVG_CYCLES: usize = 20;

/// Component-wise mean body twist over the last `n_avg_cycles` gait cycles.
///
/// The trajectory must span at least `n_avg_cycles + 2` cycles so a two-cycle
/// start-up transient can be discarded. The mean covers exactly
/// `n_avg_cycles * steps_per_cycle` trailing samples (the left endpoint is
/// excluded so periodic states are not double counted).
pub fn time_averaged_twist(traj: &Trajectory, n_avg_cycles: usize) -> Result<Twist2> {
    let spc = traj.steps_per_cycle;
    let total_cycles = (traj.samples.len() - 1) / spc;
    let needed = n_avg_cycles + DEFAULT_TRANSIENT_CYCLES;
    if total_cycles < needed {
        return Err(Error::TrajectoryTooShort {
            have: total_cycles as f64,
            need: needed as f64,
        });
    }
    let n = n_avg_cycles * spc;
    let tail = &traj.samples[traj.samples.len() - n..];
    let mut acc = Twist2::ZERO;
    for s in tail {
        acc = acc + s.xi;
    }
    Ok(acc.scaled(1.0 / n as f64))
}

/// Least-squares affine fit of the angular rate against the input, with the
/// linear velocities taken as sample means. Inputs are gait inputs; twist
/// angular rates are rad/s and are converted to deg/s inside the map.
pub fn fit_map(samples: &[(f64, Twist2)], gait_id: GaitId) -> Result<ControlToActionMap> {
    let mut distinct: Vec<f64> = samples.iter().map(|(x, _)| *x).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if samples.len() < 3 || distinct.len() < 3 {
        return Err(Error::DegenerateFit(distinct.len()));
    }
    let n = samples.len() as f64;
    let mean_x: f64 = samples.iter().map(|(x, _)| x).sum::<f64>() / n;
    let omegas_deg: Vec<f64> = samples.iter().map(|(_, t)| t.omega.to_degrees()).collect();
    let mean_w: f64 = omegas_deg.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxw = 0.0;
    for ((x, _), w) in samples.iter().zip(&omegas_deg) {
        sxx += (x - mean_x) * (x - mean_x);
        sxw += (x - mean_x) * (w - mean_w);
    }
    let slope = sxw / sxx;
    let bias = mean_w - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((x, _), w) in samples.iter().zip(&omegas_deg) {
        ss_res += (w - (slope * x + bias)).powi(2);
        ss_tot += (w - mean_w).powi(2);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let vx_const = samples.iter().map(|(_, t)| t.vx).sum::<f64>() / n;
    let vy_const = samples.iter().map(|(_, t)| t.vy).sum::<f64>() / n;
    Ok(ControlToActionMap {
        gait_id,
        vx_const,
        vy_const,
        omega_slope: slope,
        omega_bias: bias,
        input_min: distinct[0],
        input_max: *distinct.last().unwrap(),
        r_squared: Some(r_squared),
        provenance: format!("fit from {} samples", samples.len()),
    })
}

/// One row of an amplitude sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub a_bar: f64,
    pub twist: Twist2,
}

/// Simulate one amplitude and time-average its steady behavior.
pub fn sweep_point(
    base: &TipGaitParams,
    mu: &crate::dynamics::FrictionCoeffs,
    a_bar: f64,
    avg_cycles: usize,
    transient_cycles: usize,
    dt: f64,
) -> Result<SweepRow> {
    let params = TipGaitParams { a_bar, ..*base };
    let traj = simulate_gait(&params, mu, avg_cycles + transient_cycles, dt)?;
    let twist = time_averaged_twist(&traj, avg_cycles)?;
    Ok(SweepRow { a_bar, twist })
}

/// Run an amplitude sweep, fanning the independent simulations across a
/// worker pool. `jobs = 0` uses the rayon default. Rows come back in input
/// order regardless of scheduling.
pub fn run_sweep(
    base: &TipGaitParams,
    mu: &crate::dynamics::FrictionCoeffs,
    amplitudes: &[f64],
    avg_cycles: usize,
    transient_cycles: usize,
    dt: f64,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let run = || -> Result<Vec<SweepRow>> {
        amplitudes
            .par_iter()
            .map(|&a| sweep_point(base, mu, a, avg_cycles, transient_cycles, dt))
            .collect()
    };
    if jobs == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(run)
    }
}
