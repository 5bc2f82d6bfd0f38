//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Wavelength root-finder could not bracket or converge to a root.
    #[error("wavelength root-finding failed: {0}")]
    RootFind(String),

    /// Locked inertia was numerically singular (cannot occur for valid curves).
    #[error("locked inertia matrix is singular")]
    SingularInertia,

    /// Trajectory too short for the requested averaging window.
    #[error("trajectory spans {have:.3} cycles, need at least {need:.3}")]
    TrajectoryTooShort { have: f64, need: f64 },

    /// Fewer than three distinct inputs in a map fit.
    #[error("map fit needs at least 3 distinct inputs, got {0}")]
    DegenerateFit(usize),

    /// Map with zero angular-rate slope cannot be inverted.
    #[error("cannot invert a control-to-action map with zero omega slope")]
    ZeroSlope,

    /// Grid search exhausted without reaching the goal.
    #[error("no collision-free path from start to goal")]
    NoPath,

    /// Unicycle tracker rollout diverged from the reference path.
    #[error("unicycle synthesis diverged: terminal error {error_mm:.1} mm exceeds {limit_mm:.1} mm")]
    Divergence { error_mm: f64, limit_mm: f64 },

    /// A single turn block would exceed the gait map range even after splitting.
    #[error("required turn rate {omega_deg_s:.4} deg/s is outside the gait map range")]
    UnreachableRotation { omega_deg_s: f64 },

    /// Closed-loop tracker ran out of its epoch budget.
    #[error("tracking epoch budget of {budget} exhausted at waypoint {waypoint}")]
    BudgetExhausted { budget: usize, waypoint: usize },

    /// Invalid parameters or malformed input data.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
