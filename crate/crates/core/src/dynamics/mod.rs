//! Control systems, fixed-step integration and control sampling.

mod control;
mod integrate;
mod lipschitz;
mod systems;

pub use control::{sample_controls, ControlBox, ControlSampler, ControlSignal};
pub use integrate::{integrate, simulate, SimOutcome, TimeGrid, Trajectory};
pub use lipschitz::{estimate_lipschitz, estimate_lipschitz_with, DEFAULT_SAFETY_FACTOR};
pub use systems::{dubins3d, single_integrator, system_by_name, Dubins3d, FnField, SingleIntegrator, SystemSpec};

use crate::geometry::Domain;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: String, value: f64 },
    #[error("time step {dt} does not divide horizon {tau}")]
    GridMismatch { tau: f64, dt: f64 },
    #[error("control breakpoint {time} is not on the time grid")]
    BreakpointOffGrid { time: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Lipschitz constant `L` (∞-norm, uniform in `u`) and speed bound `M = sup ‖F‖∞`
/// over a domain. `certified` is false for sampled estimates.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldBounds {
    pub lipschitz: f64,
    pub velocity: f64,
    pub certified: bool,
}

/// Right-hand side of `ẋ = F(x, u)` with `u` in a box.
pub trait VectorField: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn controls(&self) -> &ControlBox;

    /// Writes `F(x, u)` into `out`.
    fn eval(&self, x: &[f64], u: &[f64], out: &mut [f64]);

    /// Axes on which `F` is periodic, with their period.
    fn periodic_axes(&self) -> Vec<(usize, f64)> {
        Vec::new()
    }

    /// Bounds derived in closed form, if the system provides them.
    fn analytic_bounds(&self, _domain: &Domain) -> Option<FieldBounds> {
        None
    }
}
