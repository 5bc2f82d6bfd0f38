//! Planar rigid-body primitives: poses, twists, wrenches, 3x3 matrices,
//! the adjoint family and the closed-form SE(2) exponential map.
//!
//! Angles are radians everywhere; lengths are millimetres. `Pose2` keeps its
//! heading normalized to (-pi, pi] after every group operation.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// Wrap an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Plain 2-vector used for points, velocities and forces in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Planar cross product `self.x * o.y - self.y * o.x`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left multiplication by the 90-degree rotation generator J = [[0,-1],[1,0]].
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// SE(2) group element: position in mm, heading in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Pose2 {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Group law `self * other`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let r = other.translation().rotated(self.theta);
        Pose2::new(self.x + r.x, self.y + r.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose2 {
        let t = (-self.translation()).rotated(-self.theta);
        Pose2::new(t.x, t.y, -self.theta)
    }

    /// Map a point from this frame into the parent frame.
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.translation() + p.rotated(self.theta)
    }
}

/// Body velocity xi = g^{-1} g_dot: linear part in mm/s, angular in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist2 {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist2 {
    pub const ZERO: Twist2 = Twist2 {
        vx: 0.0,
        vy: 0.0,
        omega: 0.0,
    };

    pub fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Twist2 { vx, vy, omega }
    }

    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn scaled(&self, k: f64) -> Twist2 {
        Twist2::new(self.vx * k, self.vy * k, self.omega * k)
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.omega.is_finite()
    }
}

impl Add for Twist2 {
    type Output = Twist2;
    fn add(self, o: Twist2) -> Twist2 {
        Twist2::new(self.vx + o.vx, self.vy + o.vy, self.omega + o.omega)
    }
}

/// Dual vector to `Twist2`: forces in N, torque in N*mm. Also carries the
/// vertical momentum `p`, which has the same coordinate shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench2 {
    pub fx: f64,
    pub fy: f64,
    pub tau: f64,
}

impl Wrench2 {
    pub const ZERO: Wrench2 = Wrench2 {
        fx: 0.0,
        fy: 0.0,
        tau: 0.0,
    };

    pub fn new(fx: f64, fy: f64, tau: f64) -> Self {
        Wrench2 { fx, fy, tau }
    }

    pub fn scaled(&self, k: f64) -> Wrench2 {
        Wrench2::new(self.fx * k, self.fy * k, self.tau * k)
    }

    /// Pairing with a twist, `<p, xi>`.
    pub fn pair(&self, xi: &Twist2) -> f64 {
        self.fx * xi.vx + self.fy * xi.vy + self.tau * xi.omega
    }
}

impl Add for Wrench2 {
    type Output = Wrench2;
    fn add(self, o: Wrench2) -> Wrench2 {
        Wrench2::new(self.fx + o.fx, self.fy + o.fy, self.tau + o.tau)
    }
}

/// Fixed-size 3x3 matrix in row-major order. All matrices in this crate are
/// this size, so no general linear-algebra dependency is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn zeros() -> Self {
        Mat3([[0.0; 3]; 3])
    }

    pub fn identity() -> Self {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut r = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        r
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        d
    }

    /// Solve `self * x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when the matrix is numerically singular.
    pub fn solve(&self, b: [f64; 3]) -> Option<[f64; 3]> {
        let mut a = self.0;
        let mut x = b;
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[pivot][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            x.swap(col, pivot);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                x[row] -= f * x[col];
            }
        }
        for col in (0..3).rev() {
            x[col] /= a[col][col];
            for row in 0..col {
                x[row] -= a[row][col] * x[col];
            }
        }
        Some(x)
    }
}

/// Closed-form SE(2) exponential of `dt * xi`.
///
/// For |omega * dt| below 1e-8 the sin/versine ratios are series-expanded to
/// avoid the 0/0 in the closed form; the limit is a pure translation.
pub fn exp_twist(xi: &Twist2, dt: f64) -> Pose2 {
    let w = xi.omega * dt;
    let ux = xi.vx * dt;
    let uy = xi.vy * dt;
    let (s_ratio, c_ratio) = if w.abs() < 1e-8 {
        // sin(w)/w and (1-cos(w))/w to O(w^4)
        (1.0 - w * w / 6.0, w / 2.0 - w * w * w / 24.0)
    } else {
        // 2 sin^2(w/2) avoids the cancellation in 1 - cos(w)
        let half_sin = (0.5 * w).sin();
        (w.sin() / w, 2.0 * half_sin * half_sin / w)
    };
    Pose2::new(
        s_ratio * ux - c_ratio * uy,
        c_ratio * ux + s_ratio * uy,
        w,
    )
}

/// Adjoint of a group element acting on twists: block structure
/// [[R, J d], [0, 1]] with d the translation and J the 90-degree rotation
/// generator. Satisfies `adjoint(a*b) = adjoint(a) * adjoint(b)` and
/// `adjoint(inverse(g)) = inverse(adjoint(g))`.
pub fn adjoint(g: &Pose2) -> Mat3 {
    let (s, c) = g.theta.sin_cos();
    Mat3([[c, -s, -g.y], [s, c, g.x], [0.0, 0.0, 1.0]])
}

/// Lie bracket `[xi, eta]` via the matrix [[0,-w,vy],[w,0,-vx],[0,0,0]] of `xi`.
pub fn ad(xi: &Twist2, eta: &Twist2) -> Twist2 {
    Twist2::new(
        -xi.omega * eta.vy + xi.vy * eta.omega,
        xi.omega * eta.vx - xi.vx * eta.omega,
        0.0,
    )
}

/// Coadjoint action `ad^*_xi p`: transpose of the `ad` matrix applied to `p`.
pub fn dual_ad(xi: &Twist2, p: &Wrench2) -> Wrench2 {
    Wrench2::new(
        xi.omega * p.fy,
        -xi.omega * p.fx,
        xi.vy * p.fx - xi.vx * p.fy,
    )
}
