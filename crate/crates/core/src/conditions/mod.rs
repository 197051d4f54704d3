//! The barrier-function inequalities and the robust cell conditions built on them.
//!
//! Safe-side checks certify a whole cell `B_r(x)` from one trajectory of its center;
//! unsafe-side checks quantify over the sampled controls only, so a `true` there is a
//! conservative label rather than a proof of reachability.

mod checks;

pub use checks::{
    check_inside_brt, check_outside_brt, check_robust_nonrecurrent, check_robust_recurrent, rcbf_pointwise,
    InsideMonitor, NonrecurrentMonitor, OutsideMonitor, RecurrentMonitor, Schedule, Verdict,
};

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeGrid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionError {
    #[error("trajectory has {found} samples, the time grid has {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("no trajectories supplied")]
    EmptyInput,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Horizon, rates, field bounds and the time grid shared by every condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcbfParams {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub velocity: f64,
    pub dt: f64,
    pub eps_int: f64,
}

impl RcbfParams {
    /// `dt = τ/100` and `eps_int = 1e-6·e^{Lτ}`.
    pub fn with_defaults(tau: f64, alpha: f64, beta: f64, lipschitz: f64, velocity: f64) -> Self {
        RcbfParams {
            tau,
            alpha,
            beta,
            lipschitz,
            velocity,
            dt: tau / 100.0,
            eps_int: default_eps_int(lipschitz, tau),
        }
    }

    pub fn validate(&self) -> Result<(), ConditionError> {
        let bad = |m: &str| Err(ConditionError::InvalidParams(m.to_string()));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau must be positive");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("alpha and beta must be positive");
        }
        if !(self.lipschitz >= 0.0 && self.velocity >= 0.0) {
            return bad("field bounds must be nonnegative");
        }
        if !(self.dt > 0.0 && self.dt <= self.tau * (1.0 + 1e-12)) {
            return bad("dt must lie in (0, tau]");
        }
        if !(self.eps_int >= 0.0) {
            return bad("eps_int must be nonnegative");
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<TimeGrid, ConditionError> {
        TimeGrid::new(self.tau, self.dt).map_err(|e| ConditionError::InvalidParams(e.to_string()))
    }
}

pub fn default_eps_int(lipschitz: f64, tau: f64) -> f64 {
    1e-6 * (lipschitz * tau).exp()
}

/// `γ_{α,β}(s)`: `alpha` for `s ≥ 0`, `beta` otherwise.
#[inline]
pub fn gamma(s: f64, alpha: f64, beta: f64) -> f64 {
    if s >= 0.0 {
        alpha
    } else {
        beta
    }
}

/// Largest separation at time `t` of two flows started `r` apart under one control: `r·e^{Lt}`.
#[inline]
pub fn deviation_bound(r: f64, lipschitz: f64, t: f64) -> f64 {
    r * (lipschitz * t).exp()
}

/// Parameters of the signed-distance validity bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityParams {
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub delta_bar: f64,
    pub delta_underbar: f64,
}

/// Smallest horizon for which the signed distance to a sector-contained zero-sublevel
/// set is a valid recurrent barrier function:
/// `max{ln(a₂/a₁)/(α̂−α), ln(a₂/a₁)/(β−β̂)} + ln(δ̄/δ̲)/min{α̂, β̂}`.
pub fn validity_min_tau(p: &ValidityParams) -> Result<f64, ConditionError> {
    let bad = |m: &str| Err(ConditionError::InvalidParams(m.to_string()));
    if !(p.a1 > 0.0 && p.a2 >= p.a1) {
        return bad("need a2 >= a1 > 0");
    }
    if !(p.alpha_hat > p.alpha && p.beta_hat < p.beta && p.beta_hat > 0.0 && p.alpha > 0.0) {
        return bad("need alpha_hat > alpha > 0 and beta > beta_hat > 0");
    }
    if !(p.delta_underbar > 0.0 && p.delta_bar >= p.delta_underbar) {
        return bad("need delta_bar >= delta_underbar > 0");
    }
    let sector = (p.a2 / p.a1).ln();
    let first = (sector / (p.alpha_hat - p.alpha)).max(sector / (p.beta - p.beta_hat));
    Ok(first + (p.delta_bar / p.delta_underbar).ln() / p.alpha_hat.min(p.beta_hat))
}
