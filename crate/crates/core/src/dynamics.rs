//! Locomotive dynamics of the turn-in-place gait: locked inertia, shape-group
//! coupling, the local connection, viscous ground friction, the net body
//! wrench and fixed-step time integration of pose and momentum.
//!
//! Sign conventions. The connection solves `I * A = -K` (so `A = -I^{-1} K`),
//! and the body twist is assembled as `xi = I^{-1} p + A = I^{-1} (p - K)`.
//! With that pairing, `p` is the total body-frame momentum of the material
//! curve and the zero-friction momentum check holds to discretization error;
//! assembling `xi = I^{-1} p - A` instead makes the frame chase the shape
//! motion and violates momentum conservation.

use crate::error::{Error, Result};
use crate::gait::{sample_shape, BodyCurve, TipGaitParams};
use crate::se2::{dual_ad, exp_twist, Mat3, Pose2, Twist2, Vec2, Wrench2};

/// Viscous friction coefficients per unit body length: backward (`mu_b`),
/// forward (`mu_f`) and lateral (`mu_n`) drag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionCoeffs {
    pub mu_b: f64,
    pub mu_f: f64,
    pub mu_n: f64,
}

impl Default for FrictionCoeffs {
    fn default() -> Self {
        // lateral drag dominant, fore/aft isotropic
        FrictionCoeffs {
            mu_b: 0.1,
            mu_f: 0.1,
            mu_n: 0.5,
        }
    }
}

impl FrictionCoeffs {
    /// Frictionless triple, allowed only for conservation checks.
    pub fn zero() -> Self {
        FrictionCoeffs {
            mu_b: 0.0,
            mu_f: 0.0,
            mu_n: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu_b < 0.0 || self.mu_f < 0.0 || self.mu_n < 0.0 {
            return Err(Error::InvalidConfig(
                "friction coefficients must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Group state carried by the integrator: time, world pose of the body frame
/// and the vertical momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub g: Pose2,
    pub p: Wrench2,
}

impl SystemState {
    pub fn initial() -> Self {
        SystemState {
            t: 0.0,
            g: Pose2::identity(),
            p: Wrench2::ZERO,
        }
    }
}

/// Locked inertia tensor of the instantaneous gait shape (unit linear mass
/// density; friction coefficients absorb any mass scaling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockedInertia(pub Mat3);

impl LockedInertia {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Sylvester criterion on the (symmetric) matrix.
    pub fn is_positive_definite(&self) -> bool {
        let m = &self.0 .0;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        d1 > 0.0 && d2 > 0.0 && d3 > 0.0
    }

    pub fn solve(&self, rhs: [f64; 3]) -> Result<[f64; 3]> {
        self.0.solve(rhs).ok_or(Error::SingularInertia)
    }
}

/// Locked inertia: arc-length-weighted integral of the planar rigid-body
/// block [[I2, J g], [(J g)^T, g^T g]] over the full body.
///
/// Smooth integrand, so Simpson mass weights are used.
pub fn locked_inertia(curve: &BodyCurve) -> LockedInertia {
    let mut m = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut izz = 0.0;
    for (i, w) in curve.w_simpson.iter().enumerate() {
        let p = curve.pos[i];
        m += w;
        // J g = (-y, x)
        cx += w * -p.y;
        cy += w * p.x;
        izz += w * (p.x * p.x + p.y * p.y);
    }
    LockedInertia(Mat3([
        [m, 0.0, cx],
        [0.0, m, cy],
        [cx, cy, izz],
    ]))
}

/// Shape-group coupling: integral of [[I2], [-g^T J]] applied to the
/// body-frame shape velocity, arc-length weighted.
pub fn coupling_term(curve: &BodyCurve) -> Wrench2 {
    let mut kx = 0.0;
    let mut ky = 0.0;
    let mut kt = 0.0;
    for (i, w) in curve.w_simpson.iter().enumerate() {
        let p = curve.pos[i];
        let v = curve.shape_vel[i];
        kx += w * v.x;
        ky += w * v.y;
        // -g^T J r_dot = x*v_y - y*v_x
        kt += w * (p.x * v.y - p.y * v.x);
    }
    Wrench2::new(kx, ky, kt)
}

/// Local connection `A = -I^{-1} K` (solved as `I * A = -K`).
pub fn connection(curve: &BodyCurve) -> Result<Twist2> {
    let inertia = locked_inertia(curve);
    let k = coupling_term(curve);
    let a = inertia.solve([-k.fx, -k.fy, -k.tau])?;
    Ok(Twist2::new(a[0], a[1], a[2]))
}

/// Body twist from momentum: `xi = I^{-1}(p - K)`, i.e. `I^{-1} p + A`.
pub fn body_twist(inertia: &LockedInertia, coupling: &Wrench2, p: &Wrench2) -> Result<Twist2> {
    let xi = inertia.solve([p.fx - coupling.fx, p.fy - coupling.fy, p.tau - coupling.tau])?;
    Ok(Twist2::new(xi[0], xi[1], xi[2]))
}

/// Velocity at a contact sample in its local tangent frame: the linear part
/// of `Ad^{-1}_{g_shape} xi` plus the locally-expressed shape velocity,
/// `R(-phi) (v - w J g + r_dot)`.
pub fn local_velocity(i: usize, curve: &BodyCurve, xi: &Twist2) -> Vec2 {
    let p = curve.pos[i];
    let u = xi.linear() - p.perp() * xi.omega + curve.shape_vel[i];
    u.rotated(-curve.tangent_theta[i])
}

fn heaviside(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Viscous friction force per unit length at a contact sample, in the local
/// tangent frame. Heaviside convention H(0) = 0, so zero velocity gives zero
/// force.
pub fn friction_force_at(
    i: usize,
    curve: &BodyCurve,
    xi: &Twist2,
    mu: &FrictionCoeffs,
) -> Vec2 {
    let v = local_velocity(i, curve, xi);
    Vec2::new(
        -(mu.mu_b * heaviside(-v.x) + mu.mu_f * heaviside(v.x)) * v.x,
        -mu.mu_n * v.y,
    )
}

/// Net external wrench on the body frame: contact-gated integral of
/// `(Ad^{-1}_{g_shape})^T f(s)`, which rotates each local force into the body
/// frame and pairs it with the lever arm of its sample. The weights carry
/// each cell's exact overlap with the contact set, so the wrench varies
/// continuously as the contact boundaries sweep across the grid.
pub fn net_wrench(curve: &BodyCurve, xi: &Twist2, mu: &FrictionCoeffs) -> Wrench2 {
    let mut fx = 0.0;
    let mut fy = 0.0;
    let mut tau = 0.0;
    for i in 0..curve.pos.len() {
        let w = curve.w_contact[i];
        if w == 0.0 {
            continue;
        }
        let f_local = friction_force_at(i, curve, xi, mu);
        let f_body = f_local.rotated(curve.tangent_theta[i]);
        let p = curve.pos[i];
        fx += w * f_body.x;
        fy += w * f_body.y;
        tau += w * f_body.cross(p);
    }
    Wrench2::new(fx, fy, tau)
}

/// Friction power (ought to be non-positive): contact-gated integral of
/// `f(s) . v(s)`.
pub fn friction_power(curve: &BodyCurve, xi: &Twist2, mu: &FrictionCoeffs) -> f64 {
    let mut p = 0.0;
    for i in 0..curve.pos.len() {
        let w = curve.w_contact[i];
        if w == 0.0 {
            continue;
        }
        let v = local_velocity(i, curve, xi);
        let f = Vec2::new(
            -(mu.mu_b * heaviside(-v.x) + mu.mu_f * heaviside(v.x)) * v.x,
            -mu.mu_n * v.y,
        );
        p += w * f.dot(v);
    }
    p
}

/// Precomputed quantities for one integrator stage time.
#[derive(Debug, Clone)]
pub struct StageData {
    pub curve: BodyCurve,
    pub inertia: LockedInertia,
    pub coupling: Wrench2,
}

pub fn stage_data(t: f64, params: &TipGaitParams) -> Result<StageData> {
    let curve = sample_shape(t, params)?;
    let inertia = locked_inertia(&curve);
    let coupling = coupling_term(&curve);
    Ok(StageData {
        curve,
        inertia,
        coupling,
    })
}

/// Instantaneous twist and momentum rate at a stage:
/// `xi = I^{-1}(p - K)`, `p_dot = ad*_xi p + F(xi)`.
fn stage_dynamics(
    sd: &StageData,
    p: &Wrench2,
    mu: &FrictionCoeffs,
) -> Result<(Twist2, Wrench2)> {
    let xi = body_twist(&sd.inertia, &sd.coupling, p)?;
    let force = net_wrench(&sd.curve, &xi, mu);
    let pdot = dual_ad(&xi, p) + force;
    Ok((xi, pdot))
}

/// One RK4 step of the momentum with an exponential pose update driven by the
/// RK4-averaged stage twist. Deterministic for fixed inputs.
pub fn step(
    state: &SystemState,
    dt: f64,
    params: &TipGaitParams,
    mu: &FrictionCoeffs,
) -> Result<SystemState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("step dt must be positive".into()));
    }
    let sd1 = stage_data(state.t, params)?;
    let sd_half = stage_data(state.t + dt / 2.0, params)?;
    let sd4 = stage_data(state.t + dt, params)?;
    rk4_step(state, dt, &sd1, &sd_half, &sd4, mu).map(|(next, _, _)| next)
}

fn rk4_step(
    state: &SystemState,
    dt: f64,
    sd1: &StageData,
    sd_half: &StageData,
    sd4: &StageData,
    mu: &FrictionCoeffs,
) -> Result<(SystemState, Twist2, f64)> {
    let p = state.p;
    let (xi1, k1) = stage_dynamics(sd1, &p, mu)?;
    let (xi2, k2) = stage_dynamics(sd_half, &(p + k1.scaled(dt / 2.0)), mu)?;
    let (xi3, k3) = stage_dynamics(sd_half, &(p + k2.scaled(dt / 2.0)), mu)?;
    let (xi4, k4) = stage_dynamics(sd4, &(p + k3.scaled(dt)), mu)?;
    let p_next = p + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6.0);
    let xi_avg = (xi1 + xi2.scaled(2.0) + xi3.scaled(2.0) + xi4).scaled(1.0 / 6.0);
    let g_next = state.g.compose(&exp_twist(&xi_avg, dt));
    let power = friction_power(&sd1.curve, &xi1, mu);
    Ok((
        SystemState {
            t: state.t + dt,
            g: g_next,
            p: p_next,
        },
        xi1,
        power,
    ))
}

/// One recorded instant of a simulation.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub g: Pose2,
    pub p: Wrench2,
    /// Instantaneous body twist at this state.
    pub xi: Twist2,
}

/// Time series produced by `simulate_gait`, one sample per integrator step
/// plus the initial state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: TipGaitParams,
    pub mu: FrictionCoeffs,
    pub dt: f64,
    pub steps_per_cycle: usize,
    pub samples: Vec<TrajectorySample>,
    /// Largest friction power observed at any step (non-positive when the
    /// dissipation contract holds).
    pub max_friction_power: f64,
}

impl Trajectory {
    pub fn final_pose(&self) -> Pose2 {
        self.samples.last().expect("non-empty trajectory").g
    }

    /// Pose after `cycle` whole gait cycles.
    pub fn pose_at_cycle(&self, cycle: usize) -> Pose2 {
        self.samples[cycle * self.steps_per_cycle].g
    }
}

/// Simulate from identity pose and zero momentum at t = 0.
pub fn simulate_gait(
    params: &TipGaitParams,
    mu: &FrictionCoeffs,
    n_cycles: usize,
    dt: f64,
) -> Result<Trajectory> {
    simulate_from(&SystemState::initial(), params, mu, n_cycles, dt)
}

/// Simulate `n_cycles` whole gait cycles from an arbitrary state whose time
/// sits on the step grid.
///
/// All stage quantities are T-periodic, so they are tabulated once per phase
/// index and reused across cycles; this keeps the per-step cost free of
/// wavelength root-finding.
pub fn simulate_from(
    init: &SystemState,
    params: &TipGaitParams,
    mu: &FrictionCoeffs,
    n_cycles: usize,
    dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    mu.validate()?;
    if n_cycles < 1 {
        return Err(Error::InvalidConfig("n_cycles must be at least 1".into()));
    }
    let period = params.period();
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    let spc_f = period / dt;
    let spc = spc_f.round() as usize;
    if spc < 2 || (spc as f64 * dt - period).abs() > 1e-9 * period {
        return Err(Error::InvalidConfig(format!(
            "dt = {dt} must divide the gait period {period}"
        )));
    }
    let phase = init.t.rem_euclid(period);
    let k0_f = phase / dt;
    let k0 = k0_f.round() as usize % spc;
    if (k0 as f64 * dt - phase).abs() > 1e-6 * period && (phase - period).abs() > 1e-6 * period {
        return Err(Error::InvalidConfig(
            "initial time must sit on the integrator step grid".into(),
        ));
    }

    let mut full = Vec::with_capacity(spc);
    let mut half = Vec::with_capacity(spc);
    for k in 0..spc {
        let tk = k as f64 * dt;
        full.push(stage_data(tk, params)?);
        half.push(stage_data(tk + dt / 2.0, params)?);
    }

    let n_steps = n_cycles * spc;
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut state = *init;
    let mut max_power = f64::NEG_INFINITY;
    for global_k in 0..=n_steps {
        let k = (k0 + global_k) % spc;
        if global_k == n_steps {
            let (xi, _) = stage_dynamics(&full[k], &state.p, mu)?;
            samples.push(TrajectorySample {
                t: state.t,
                g: state.g,
                p: state.p,
                xi,
            });
            break;
        }
        let (next, xi1, power) = rk4_step(
            &state,
            dt,
            &full[k],
            &half[k],
            &full[(k + 1) % spc],
            mu,
        )?;
        samples.push(TrajectorySample {
            t: state.t,
            g: state.g,
            p: state.p,
            xi: xi1,
        });
        max_power = max_power.max(power);
        state = next;
        state.t = init.t + (global_k + 1) as f64 * dt;
    }

    Ok(Trajectory {
        params: *params,
        mu: *mu,
        dt,
        steps_per_cycle: spc,
        samples,
        max_friction_power: max_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::TipGaitParams;

    fn params(a_bar: f64) -> TipGaitParams {
        TipGaitParams {
            a_bar,
            ..TipGaitParams::default()
        }
    }

    /// Straight centered body with a prescribed uniform shape velocity, full
    /// contact, unit Jacobian.
    fn synthetic_straight_curve(n: usize, l: f64, vel: Vec2) -> BodyCurve {
        let h = l / (n - 1) as f64;
        let s: Vec<f64> = (0..n).map(|i| -l / 2.0 + i as f64 * h).collect();
        let pos: Vec<Vec2> = s.iter().map(|&x| Vec2::new(x, 0.0)).collect();
        let mut w_simpson = Vec::with_capacity(n);
        let mut w_trapezoid = Vec::with_capacity(n);
        for i in 0..n {
            let cs = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w_simpson.push(cs * h / 3.0);
            w_trapezoid.push(if i == 0 || i == n - 1 { 0.5 * h } else { h });
        }
        BodyCurve {
            t: 0.0,
            lambda: l,
            s,
            pos,
            tangent_theta: vec![0.0; n],
            shape_vel: vec![vel; n],
            contact: vec![true; n],
            jac: vec![1.0; n],
            h,
            w_simpson,
            w_contact: w_trapezoid.clone(),
            w_trapezoid,
        }
    }

    #[test]
    fn straight_line_inertia_is_analytic() {
        let c = sample_shape(0.0, &params(0.0)).unwrap();
        let inertia = locked_inertia(&c);
        let m = inertia.matrix().0;
        let want_izz = 800.0_f64.powi(3) / 12.0;
        assert!((m[0][0] - 800.0).abs() < 1e-6 * 800.0);
        assert!((m[1][1] - 800.0).abs() < 1e-6 * 800.0);
        assert!((m[2][2] - want_izz).abs() < 1e-6 * want_izz);
        assert_eq!(m[0][2], 0.0);
        assert!(inertia.is_positive_definite());
    }

    #[test]
    fn inertia_is_symmetric_and_spd_over_cycle() {
        let p = params(120.0);
        for i in 0..25 {
            let c = sample_shape(p.period() * i as f64 / 25.0, &p).unwrap();
            let inertia = locked_inertia(&c);
            let diff = inertia.matrix().max_abs_diff(&inertia.matrix().transpose());
            assert!(diff < 1e-9);
            assert!(inertia.is_positive_definite());
        }
    }

    #[test]
    fn inertia_matches_dense_quadrature_oracle() {
        let p = params(120.0);
        let c = sample_shape(p.period() / 2.0, &p).unwrap();
        let got = locked_inertia(&c);
        let mut p_dense = p;
        p_dense.n_samples = 1_000_001;
        let dense = sample_shape(p.period() / 2.0, &p_dense).unwrap();
        let want = locked_inertia(&dense);
        for i in 0..3 {
            for j in 0..3 {
                let scale = want.matrix().0[i][j].abs().max(1.0);
                assert!(
                    (got.matrix().0[i][j] - want.matrix().0[i][j]).abs() / scale < 1e-6,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn coupling_of_uniform_translation() {
        let c = synthetic_straight_curve(201, 800.0, Vec2::new(0.0, 10.0));
        let k = coupling_term(&c);
        assert!((k.fx - 0.0).abs() < 1e-9);
        assert!((k.fy - 8000.0).abs() < 1e-9);
        assert!(k.tau.abs() < 1e-9);
    }

    #[test]
    fn coupling_of_frozen_shape_is_zero() {
        let c = synthetic_straight_curve(201, 800.0, Vec2::ZERO);
        let k = coupling_term(&c);
        assert_eq!((k.fx, k.fy, k.tau), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coupling_matches_dense_quadrature_oracle() {
        // at t = T/2 the amplitude rate vanishes but lambda keeps changing
        let p = params(120.0);
        let c = sample_shape(p.period() / 2.0, &p).unwrap();
        let got = coupling_term(&c);
        let mut p_dense = p;
        p_dense.n_samples = 1_000_001;
        let dense = sample_shape(p.period() / 2.0, &p_dense).unwrap();
        let want = coupling_term(&dense);
        let scale = want.fx.abs().max(want.fy.abs()).max(want.tau.abs()).max(1.0);
        assert!((got.fx - want.fx).abs() / scale < 1e-6);
        assert!((got.fy - want.fy).abs() / scale < 1e-6);
        assert!((got.tau - want.tau).abs() / scale < 1e-6);
    }

    #[test]
    fn connection_examples() {
        let c = synthetic_straight_curve(201, 800.0, Vec2::ZERO);
        let a = connection(&c).unwrap();
        assert_eq!((a.vx, a.vy, a.omega), (0.0, 0.0, 0.0));

        let w = Vec2::new(3.0, 10.0);
        let c = synthetic_straight_curve(201, 800.0, w);
        let a = connection(&c).unwrap();
        assert!((a.vx + w.x).abs() < 1e-12);
        assert!((a.vy + w.y).abs() < 1e-12);
        assert!(a.omega.abs() < 1e-12);
    }

    #[test]
    fn connection_definition_residual() {
        let p = params(120.0);
        for i in 0..10 {
            let c = sample_shape(p.period() * i as f64 / 10.0, &p).unwrap();
            let inertia = locked_inertia(&c);
            let k = coupling_term(&c);
            let a = connection(&c).unwrap();
            let ia = inertia.matrix().mul_vec([a.vx, a.vy, a.omega]);
            assert!((ia[0] + k.fx).abs() < 1e-9);
            assert!((ia[1] + k.fy).abs() < 1e-9);
            assert!((ia[2] + k.tau).abs() < 1e-9);
        }
    }

    #[test]
    fn friction_force_branches() {
        let mu = FrictionCoeffs {
            mu_b: 3.0,
            mu_f: 1.0,
            mu_n: 2.0,
        };
        // still body, shape velocity supplies the local velocity directly
        let c = synthetic_straight_curve(11, 10.0, Vec2::ZERO);
        let f = friction_force_at(5, &c, &Twist2::ZERO, &mu);
        assert_eq!((f.x, f.y), (0.0, 0.0));

        let c = synthetic_straight_curve(11, 10.0, Vec2::new(-2.0, 0.0));
        let f = friction_force_at(5, &c, &Twist2::ZERO, &mu);
        assert!((f.x - 6.0).abs() < 1e-15 && f.y == 0.0);

        let c = synthetic_straight_curve(11, 10.0, Vec2::new(5.0, 1.0));
        let f = friction_force_at(5, &c, &Twist2::ZERO, &mu);
        assert!((f.x + 5.0).abs() < 1e-15);
        assert!((f.y + 2.0).abs() < 1e-15);
    }

    #[test]
    fn net_wrench_translating_line() {
        let mu = FrictionCoeffs {
            mu_b: 1.0,
            mu_f: 1.0,
            mu_n: 0.0,
        };
        let c = synthetic_straight_curve(201, 800.0, Vec2::ZERO);
        let f = net_wrench(&c, &Twist2::new(10.0, 0.0, 0.0), &mu);
        assert!((f.fx + 8000.0).abs() < 1e-9);
        assert!(f.fy.abs() < 1e-9);
        assert!(f.tau.abs() < 1e-9);
    }

    #[test]
    fn net_wrench_spinning_line() {
        let mu = FrictionCoeffs {
            mu_b: 0.0,
            mu_f: 0.0,
            mu_n: 1.0,
        };
        let c = synthetic_straight_curve(201, 800.0, Vec2::ZERO);
        let f = net_wrench(&c, &Twist2::new(0.0, 0.0, 1.0), &mu);
        let want = -800.0_f64.powi(3) / 12.0;
        // trapezoid quadrature of s^2 carries an O(h^2) defect
        assert!((f.tau - want).abs() / want.abs() < 1e-4, "tau = {}", f.tau);
        assert!(f.fx.abs() < 1e-9 && f.fy.abs() < 1e-9);
    }

    #[test]
    fn net_wrench_zero_friction() {
        let mu = FrictionCoeffs::zero();
        let p = params(120.0);
        let c = sample_shape(1.0, &p).unwrap();
        let f = net_wrench(&c, &Twist2::new(10.0, -3.0, 0.2), &mu);
        assert_eq!((f.fx, f.fy, f.tau), (0.0, 0.0, 0.0));
    }

    #[test]
    fn friction_power_is_dissipative() {
        let mu = FrictionCoeffs::default();
        let p = params(120.0);
        for i in 0..10 {
            let c = sample_shape(p.period() * i as f64 / 10.0, &p).unwrap();
            let pw = friction_power(&c, &Twist2::new(12.0, -5.0, 0.4), &mu);
            assert!(pw <= 1e-12, "power = {pw}");
        }
    }

    #[test]
    fn step_frozen_shape_is_stationary() {
        let p = params(0.0);
        let mu = FrictionCoeffs::zero();
        let mut state = SystemState::initial();
        for _ in 0..3 {
            state = step(&state, 0.01, &p, &mu).unwrap();
        }
        assert_eq!(state.g, Pose2::identity());
        assert_eq!(state.p, Wrench2::ZERO);
        assert!((state.t - 0.03).abs() < 1e-12);
    }

    #[test]
    fn zero_friction_keeps_momentum_exactly_zero() {
        let p = params(120.0);
        let mu = FrictionCoeffs::zero();
        let mut state = SystemState::initial();
        for _ in 0..5 {
            state = step(&state, 0.05, &p, &mu).unwrap();
        }
        assert_eq!(state.p, Wrench2::ZERO);
        // the shape is moving, so the frame must have moved
        assert!(state.g.translation().norm() > 0.0 || state.g.theta != 0.0);
    }

    #[test]
    fn simulate_zero_amplitude_stays_at_identity() {
        let p = params(0.0);
        let traj = simulate_gait(&p, &FrictionCoeffs::default(), 2, p.period() / 50.0).unwrap();
        assert_eq!(traj.samples.len(), 101);
        let f = traj.final_pose();
        assert_eq!(f, Pose2::identity());
    }

    #[test]
    fn simulate_rejects_bad_dt() {
        let p = params(60.0);
        let err = simulate_gait(&p, &FrictionCoeffs::default(), 1, 0.4999);
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn mirror_equivariance_one_cycle() {
        let dt = TipGaitParams::default().period() / 100.0;
        let mu = FrictionCoeffs::default();
        let plus = simulate_gait(&params(120.0), &mu, 1, dt).unwrap();
        let minus = simulate_gait(&params(-120.0), &mu, 1, dt).unwrap();
        let gp = plus.final_pose();
        let gm = minus.final_pose();
        let scale = gp.translation().norm().max(1e-6);
        assert!((gp.x - gm.x).abs() / scale < 1e-6);
        assert!((gp.y + gm.y).abs() / scale < 1e-6);
        assert!((gp.theta + gm.theta).abs() < 1e-6 * gp.theta.abs().max(1e-3));
    }

    #[test]
    fn simulate_records_dissipative_power() {
        let p = params(120.0);
        let traj = simulate_gait(&p, &FrictionCoeffs::default(), 1, p.period() / 100.0).unwrap();
        assert!(traj.max_friction_power <= 1e-12);
    }
}
