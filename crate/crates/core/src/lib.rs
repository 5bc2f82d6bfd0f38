//! Shape-centric modeling of a planar snake-like robot: turn-in-place gait
//! kinematics, locomotive dynamics under viscous friction, reduced
//! control-to-action motion models, multi-gait trajectory planning and
//! closed-loop tracking.
//!
//! Units: millimetres, seconds, radians (degrees appear only inside the
//! control-to-action maps, matching their published form).

pub mod dynamics;
pub mod error;
pub mod gait;
pub mod io;
pub mod maps;
pub mod planner;
pub mod se2;
pub mod tracking;

pub use error::{Error, Result};
