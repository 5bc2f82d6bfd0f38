//! Turn-in-place gait kinematics: the standing-wave body curve, its local
//! tangent frames and shape velocity, the wavelength root-finder and the
//! body-ground contact schedule.
//!
//! The body curve is parametrized by the reference (projected-x) coordinate
//! `s` spanning `[-lambda/2, lambda/2]`; the grid is uniform in `s` and all
//! quadratures carry the arc-length Jacobian `sqrt(1 + (dy/ds)^2)`.

use crate::error::{Error, Result};
use crate::se2::Vec2;
use std::f64::consts::PI;

/// Default saturation of the peak amplitude input, mm.
pub const AMPLITUDE_SATURATION_MM: f64 = 120.0;

/// Gait inputs: peak amplitude, frequency, fixed body arc length, minimum
/// contact-segment length and body sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipGaitParams {
    /// Peak amplitude, mm (signed; sign mirrors the gait).
    pub a_bar: f64,
    /// Gait frequency, Hz. Period is `1/freq`.
    pub freq: f64,
    /// Fixed body arc length, mm.
    pub l_bar: f64,
    /// Minimum contact-segment length, mm.
    pub ell_min: f64,
    /// Samples along the body; must be odd and at least 11 so s = 0 is a node.
    pub n_samples: usize,
}

impl Default for TipGaitParams {
    fn default() -> Self {
        TipGaitParams {
            a_bar: 120.0,
            freq: 0.2,
            l_bar: 800.0,
            // The minimum contact length is not pinned by the motion design;
            // default to l_bar / 8.
            ell_min: 100.0,
            n_samples: 201,
        }
    }
}

impl TipGaitParams {
    pub fn period(&self) -> f64 {
        1.0 / self.freq
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_bar > 0.0) {
            return Err(Error::InvalidConfig("l_bar must be positive".into()));
        }
        if !(self.freq > 0.0) {
            return Err(Error::InvalidConfig("freq must be positive".into()));
        }
        if !(self.ell_min > 0.0 && self.ell_min <= self.l_bar / 2.0) {
            return Err(Error::InvalidConfig(
                "ell_min must lie in (0, l_bar/2]".into(),
            ));
        }
        if self.n_samples < 11 || self.n_samples % 2 == 0 {
            return Err(Error::InvalidConfig(
                "n_samples must be odd and at least 11".into(),
            ));
        }
        if !(self.a_bar.abs() <= AMPLITUDE_SATURATION_MM) {
            return Err(Error::InvalidConfig(format!(
                "a_bar magnitude exceeds the {AMPLITUDE_SATURATION_MM} mm saturation"
            )));
        }
        Ok(())
    }
}

/// Standing-wave amplitude `A(t) = a_bar * sin(pi * freq * t)`.
///
/// The sign pattern has period `2T`, but the gait only ever queries `t mod T`.
pub fn amplitude(t: f64, params: &TipGaitParams) -> f64 {
    params.a_bar * (PI * params.freq * t).sin()
}

/// Arc length of `s -> (s, a sin(2 pi s / lambda))` over one wavelength,
/// by composite Simpson quadrature with `nodes` grid points (odd).
fn wave_arc_length(a: f64, lambda: f64, nodes: usize) -> f64 {
    debug_assert!(nodes >= 3 && nodes % 2 == 1);
    let k = 2.0 * PI * a / lambda;
    let h = lambda / (nodes - 1) as f64;
    let f = |i: usize| -> f64 {
        let s = -lambda / 2.0 + i as f64 * h;
        let slope = k * (2.0 * PI * s / lambda).cos();
        (1.0 + slope * slope).sqrt()
    };
    let mut acc = f(0) + f(nodes - 1);
    for i in 1..nodes - 1 {
        acc += if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) };
    }
    acc * h / 3.0
}

const ARCLEN_NODES: usize = 2001;
const MAX_BRACKET_EXPANSIONS: usize = 60;

/// Find the wavelength `lambda` such that the arc length of the standing wave
/// with amplitude `a` equals `l_bar` to within `1e-9 * l_bar`.
///
/// The arc length is strictly increasing in `lambda` (it tends to `4|a|` as
/// `lambda -> 0` and exceeds `lambda` itself for any non-zero `a`), so the
/// root on `(0, l_bar]` is unique when it exists. Bisection brackets are
/// established by geometric shrinking of the lower endpoint.
pub fn solve_wavelength(a: f64, params: &TipGaitParams) -> Result<f64> {
    let l_bar = params.l_bar;
    if a == 0.0 {
        return Ok(l_bar);
    }
    let mut hi = l_bar;
    let mut lo = l_bar / 2.0;
    let mut expansions = 0;
    while wave_arc_length(a, lo, ARCLEN_NODES) >= l_bar {
        lo /= 2.0;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::RootFind(format!(
                "no bracket for amplitude {a} after {MAX_BRACKET_EXPANSIONS} expansions \
                 (body too short for this amplitude)"
            )));
        }
    }
    // Bisect down to a fixed tiny interval rather than stopping on the
    // arc-length residual: an early residual exit makes lambda a staircase in
    // A with ~1e-6 steps, which pollutes the finite-difference shape velocity.
    // The interval below leaves the residual far under the 1e-9 * l_bar
    // contract while keeping lambda effectively smooth in A.
    let width_tol = 1e-13 * l_bar;
    let mut iterations = 0;
    while hi - lo > width_tol && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if wave_arc_length(a, mid, ARCLEN_NODES) > l_bar {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(0.5 * (lo + hi))
}

/// Length of each contact segment at phase `t` in `[0, T)`:
/// `max(L/4 (1 + cos(4 pi f t)), ell_min)` with `L = lambda`.
pub fn contact_length(t: f64, lambda: f64, params: &TipGaitParams) -> f64 {
    let raw = lambda / 4.0 * (1.0 + (4.0 * PI * params.freq * t).cos());
    raw.max(params.ell_min)
}

/// Contact predicate for reference coordinate `s` at phase `t` in `[0, T)`.
///
/// For the first half cycle the contact set is two segments of length
/// `contact_length`, one centered at `s = 0` and one at `s = L/2`; the part of
/// the head segment beyond `L/2` wraps around to the tail. For the second
/// half cycle the whole body is in contact. Segment endpoints are inclusive.
pub fn in_contact(t: f64, s: f64, lambda: f64, params: &TipGaitParams) -> bool {
    let period = params.period();
    if t >= period / 2.0 {
        return true;
    }
    let half = contact_length(t, lambda, params) / 2.0;
    s.abs() <= half || s >= lambda / 2.0 - half || s <= -lambda / 2.0 + half
}

/// The contact set as merged closed intervals in `s`, clipped to the body.
pub fn contact_intervals(t: f64, lambda: f64, params: &TipGaitParams) -> Vec<(f64, f64)> {
    let period = params.period();
    let half_body = lambda / 2.0;
    if t >= period / 2.0 {
        return vec![(-half_body, half_body)];
    }
    let half = contact_length(t, lambda, params) / 2.0;
    let raw = [
        (-half, half),
        (half_body - half, half_body),
        (-half_body, -half_body + half),
    ];
    let mut clipped: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(a, b)| (a.max(-half_body), b.min(half_body)))
        .filter(|&(a, b)| b > a)
        .collect();
    clipped.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(3);
    for iv in clipped {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    merged
}

/// Sampled planar gait shape at one instant.
#[derive(Debug, Clone)]
pub struct BodyCurve {
    /// Phase time in `[0, T)`, seconds.
    pub t: f64,
    /// Wavelength = projected body length `L(t)`, mm.
    pub lambda: f64,
    /// Reference coordinates spanning `[-lambda/2, lambda/2]`, mm.
    pub s: Vec<f64>,
    /// Curve points in the body frame, mm.
    pub pos: Vec<Vec2>,
    /// Local tangent-frame angles, rad.
    pub tangent_theta: Vec<f64>,
    /// Body-frame shape velocity at fixed sample index, mm/s.
    pub shape_vel: Vec<Vec2>,
    /// Ground-contact flags.
    pub contact: Vec<bool>,
    /// Arc-length Jacobian `sqrt(1 + (dy/ds)^2)` at each sample.
    pub jac: Vec<f64>,
    /// Grid spacing in `s`, mm.
    pub h: f64,
    /// Simpson mass weights (arc-length measure), used for the smooth
    /// full-body integrals.
    pub w_simpson: Vec<f64>,
    /// Trapezoid mass weights over the whole body.
    pub w_trapezoid: Vec<f64>,
    /// Friction quadrature weights: each sample's cell measure overlapped
    /// with the exact contact interval set, times the Jacobian. Zero for
    /// cells fully outside contact; fractional at contact boundaries so the
    /// net wrench varies continuously as the boundaries sweep the grid.
    pub w_contact: Vec<f64>,
}

impl BodyCurve {
    /// Discrete arc length: Simpson quadrature of the Jacobian over the grid.
    pub fn arc_length(&self) -> f64 {
        let n = self.s.len();
        let mut acc = self.jac[0] + self.jac[n - 1];
        for i in 1..n - 1 {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * self.jac[i];
        }
        acc * self.h / 3.0
    }

    /// Total contact measure in `s`, mm (counting each sample's cell).
    pub fn contact_measure(&self) -> f64 {
        self.contact.iter().filter(|&&c| c).count() as f64 * self.h
    }
}

/// Finite-difference step for the shape velocity, as a fraction of the period.
const SHAPE_VEL_FD_DIV: f64 = 5000.0;

/// Build the body curve at time `t` (reduced mod T).
///
/// Positions sit on a uniform `s`-grid; tangents come from the analytic curve
/// derivative; the shape velocity is a central time difference of positions
/// at fixed sample index with step `T/5000`, which sidesteps differentiating
/// through the wavelength root-finder. The perturbed times are evaluated on
/// the smooth underlying formulas (not re-reduced mod T), so the derivative
/// is correct across cycle boundaries.
pub fn sample_shape(t: f64, params: &TipGaitParams) -> Result<BodyCurve> {
    let period = params.period();
    let tp = t.rem_euclid(period);
    let n = params.n_samples;
    let a = amplitude(tp, params);
    let lambda = solve_wavelength(a, params)?;

    let dt_fd = period / SHAPE_VEL_FD_DIV;
    let a_plus = amplitude(tp + dt_fd, params);
    let a_minus = amplitude(tp - dt_fd, params);
    let lambda_plus = solve_wavelength(a_plus, params)?;
    let lambda_minus = solve_wavelength(a_minus, params)?;
    let inv_2dt = 1.0 / (2.0 * dt_fd);

    let h = lambda / (n - 1) as f64;
    let k = 2.0 * PI / lambda;
    let mut s = Vec::with_capacity(n);
    let mut pos = Vec::with_capacity(n);
    let mut tangent_theta = Vec::with_capacity(n);
    let mut shape_vel = Vec::with_capacity(n);
    let mut contact = Vec::with_capacity(n);
    let mut jac = Vec::with_capacity(n);
    for i in 0..n {
        // fraction in [-1/2, 1/2]; dyadic fractions (quarter points etc.)
        // are exact so contact-boundary ties resolve deterministically
        let frac = i as f64 / (n - 1) as f64 - 0.5;
        let si = lambda * frac;
        // sin(2 pi s / lambda) depends only on the fraction
        let sin_phase = (2.0 * PI * frac).sin();
        let yi = a * sin_phase;
        let slope = a * k * (2.0 * PI * frac).cos();
        s.push(si);
        pos.push(Vec2::new(si, yi));
        tangent_theta.push(slope.atan());
        shape_vel.push(Vec2::new(
            (lambda_plus - lambda_minus) * frac * inv_2dt,
            (a_plus - a_minus) * sin_phase * inv_2dt,
        ));
        contact.push(in_contact(tp, si, lambda, params));
        jac.push((1.0 + slope * slope).sqrt());
    }

    let intervals = contact_intervals(tp, lambda, params);
    let mut w_simpson = Vec::with_capacity(n);
    let mut w_trapezoid = Vec::with_capacity(n);
    let mut w_contact = Vec::with_capacity(n);
    for i in 0..n {
        let cs = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w_simpson.push(cs * h / 3.0 * jac[i]);
        let ct = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        w_trapezoid.push(ct * h * jac[i]);
        let cell_lo = (s[i] - h / 2.0).max(-lambda / 2.0);
        let cell_hi = (s[i] + h / 2.0).min(lambda / 2.0);
        let overlap: f64 = intervals
            .iter()
            .map(|&(a, b)| (cell_hi.min(b) - cell_lo.max(a)).max(0.0))
            .sum();
        w_contact.push(overlap * jac[i]);
    }

    Ok(BodyCurve {
        t: tp,
        lambda,
        s,
        pos,
        tangent_theta,
        shape_vel,
        contact,
        jac,
        h,
        w_simpson,
        w_trapezoid,
        w_contact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TipGaitParams {
        TipGaitParams::default()
    }

    #[test]
    fn amplitude_values() {
        let p = params();
        let t_cyc = p.period();
        assert_eq!(amplitude(0.0, &p), 0.0);
        assert!((amplitude(t_cyc / 2.0, &p) - 120.0).abs() < 1e-12);
        assert!((amplitude(t_cyc / 4.0, &p) - 120.0 / 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wavelength_flat_curve_is_exact() {
        let p = params();
        assert_eq!(solve_wavelength(0.0, &p).unwrap(), 800.0);
    }

    #[test]
    fn wavelength_matches_dense_quadrature_oracle() {
        let p = params();
        let lambda = solve_wavelength(100.0, &p).unwrap();
        // brute-force oracle: Simpson at 1e6+1 nodes
        let arclen = wave_arc_length(100.0, lambda, 1_000_001);
        assert!(
            (arclen - 800.0).abs() < 1e-6,
            "oracle arc length {arclen} not within 1e-6 of 800"
        );
    }

    #[test]
    fn wavelength_monotone_in_amplitude() {
        let p = params();
        let l120 = solve_wavelength(120.0, &p).unwrap();
        let l60 = solve_wavelength(60.0, &p).unwrap();
        assert!(l120 < l60 && l60 < 800.0, "l120={l120}, l60={l60}");
    }

    #[test]
    fn wavelength_no_root_errors() {
        // arc length tends to 4|a| for small lambda; amplitude 250 needs
        // 1000 mm of body, more than l_bar = 800
        let mut p = params();
        p.a_bar = 120.0;
        let err = solve_wavelength(250.0, &p);
        assert!(matches!(err, Err(Error::RootFind(_))));
    }

    #[test]
    fn contact_length_schedule() {
        let p = params();
        let t_cyc = p.period();
        let lambda = 700.0;
        assert!((contact_length(0.0, lambda, &p) - lambda / 2.0).abs() < 1e-12);
        assert!((contact_length(t_cyc / 4.0, lambda, &p) - p.ell_min).abs() < 1e-12);
        for i in 0..50 {
            let t = t_cyc * i as f64 / 50.0;
            assert!(contact_length(t, lambda, &p) >= p.ell_min);
        }
    }

    #[test]
    fn contact_set_full_body_cases() {
        let p = params();
        let t_cyc = p.period();
        // second half cycle: everything touches
        let c = sample_shape(t_cyc / 2.0, &p).unwrap();
        assert!(c.contact.iter().all(|&b| b));
        // t = 0: the two half-wavelength segments tile the body
        let c = sample_shape(0.0, &p).unwrap();
        assert!(c.contact.iter().all(|&b| b));
    }

    #[test]
    fn contact_set_clamped_case() {
        let p = params();
        let t_cyc = p.period();
        let c = sample_shape(t_cyc / 4.0, &p).unwrap();
        let half = p.ell_min / 2.0;
        for (i, &si) in c.s.iter().enumerate() {
            let expect =
                si.abs() <= half || si >= c.lambda / 2.0 - half || si <= -c.lambda / 2.0 + half;
            assert_eq!(c.contact[i], expect, "sample {i} at s = {si}");
        }
        // and that is exactly the points within ell_min/2 of 0 and +-L/2
        let n_contact = c.contact.iter().filter(|&&b| b).count();
        assert!(n_contact > 0 && n_contact < c.s.len());
    }

    #[test]
    fn straight_line_at_cycle_start() {
        let p = params();
        let c = sample_shape(0.0, &p).unwrap();
        for i in 0..c.pos.len() {
            assert_eq!(c.pos[i].y, 0.0);
            assert_eq!(c.tangent_theta[i], 0.0);
        }
        assert_eq!(c.lambda, 800.0);
        // body center sits at the frame origin
        let mid = c.pos.len() / 2;
        assert_eq!(c.pos[mid].x, 0.0);
    }

    #[test]
    fn full_wave_at_half_cycle() {
        let p = params();
        let c = sample_shape(p.period() / 2.0, &p).unwrap();
        // single full sine wave of amplitude a_bar: peak at s = lambda/4
        let peak = c.pos.iter().map(|p| p.y).fold(f64::MIN, f64::max);
        assert!((peak - 120.0).abs() < 1e-9, "peak = {peak}");
        let trough = c.pos.iter().map(|p| p.y).fold(f64::MAX, f64::min);
        assert!((trough + 120.0).abs() < 1e-9);
        assert!(c.lambda < 800.0);
    }

    #[test]
    fn shape_velocity_matches_analytic_rate_at_cycle_start() {
        // d/dt [A(t) sin(2 pi s/lambda)] at t=0 is a_bar*pi*f*sin(2 pi s/lambda);
        // at s = lambda/4 that is a_bar*pi*f = 75.398 mm/s. The lambda-dot term
        // vanishes at t = 0 because lambda depends on A evenly.
        let p = params();
        let c = sample_shape(0.0, &p).unwrap();
        let quarter = (c.s.len() - 1) / 4 * 3; // fraction +1/4 of the span
        assert!((c.s[quarter] - c.lambda / 4.0).abs() < 1e-9);
        let expect = 120.0 * PI * 0.2;
        assert!(
            (c.shape_vel[quarter].y - expect).abs() < 1e-4,
            "got {}, want {expect}",
            c.shape_vel[quarter].y
        );
        assert!(c.shape_vel[quarter].x.abs() < 1e-4);
    }

    #[test]
    fn arc_length_invariant_over_cycle() {
        let p = params();
        let t_cyc = p.period();
        for i in 0..20 {
            let t = t_cyc * i as f64 / 20.0;
            let c = sample_shape(t, &p).unwrap();
            let al = c.arc_length();
            assert!(
                (al - p.l_bar).abs() <= 1e-6 * p.l_bar,
                "t={t}: arc length {al}"
            );
        }
    }

    #[test]
    fn mirror_property_is_exact() {
        let mut plus = params();
        plus.a_bar = 120.0;
        let mut minus = params();
        minus.a_bar = -120.0;
        for frac in [0.1, 0.3, 0.45, 0.7, 0.9] {
            let t = plus.period() * frac;
            let cp = sample_shape(t, &plus).unwrap();
            let cm = sample_shape(t, &minus).unwrap();
            assert_eq!(cp.lambda, cm.lambda);
            for i in 0..cp.pos.len() {
                assert!((cp.pos[i].y + cm.pos[i].y).abs() < 1e-12);
                assert_eq!(cp.pos[i].x, cm.pos[i].x);
                assert!((cp.tangent_theta[i] + cm.tangent_theta[i]).abs() < 1e-12);
                assert!((cp.shape_vel[i].y + cm.shape_vel[i].y).abs() < 1e-12);
                assert_eq!(cp.contact[i], cm.contact[i]);
            }
        }
    }

    #[test]
    fn periodicity() {
        let p = params();
        let t_cyc = p.period();
        for frac in [0.0, 0.2, 0.37, 0.5, 0.81] {
            let t = t_cyc * frac;
            let a = sample_shape(t, &p).unwrap();
            let b = sample_shape(t + t_cyc, &p).unwrap();
            assert!((a.lambda - b.lambda).abs() < 1e-9);
            for i in 0..a.pos.len() {
                assert!((a.pos[i].y - b.pos[i].y).abs() < 1e-9);
                assert!((a.shape_vel[i].y - b.shape_vel[i].y).abs() < 1e-6);
                assert_eq!(a.contact[i], b.contact[i]);
            }
        }
    }

    #[test]
    fn contact_measure_bounds() {
        let p = params();
        let t_cyc = p.period();
        for i in 0..40 {
            let t = t_cyc * i as f64 / 40.0;
            let c = sample_shape(t, &p).unwrap();
            if t < t_cyc / 2.0 {
                assert!(c.contact_measure() >= 2.0 * p.ell_min - 2.5 * c.h);
            } else {
                assert!(c.contact.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn params_validation() {
        let mut p = params();
        p.n_samples = 200;
        assert!(p.validate().is_err());
        let mut p = params();
        p.ell_min = 500.0;
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
