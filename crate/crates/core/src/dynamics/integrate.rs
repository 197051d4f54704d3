use serde::{Deserialize, Serialize};

use super::{ControlSignal, DynamicsError, VectorField};
use crate::geometry::Domain;

/// Uniform grid `0, Δt, …, τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Fails unless `dt` divides `tau` to relative precision `1e-9`.
    pub fn new(tau: f64, dt: f64) -> Result<Self, DynamicsError> {
        if !(tau > 0.0 && dt > 0.0 && dt <= tau * (1.0 + 1e-12) && tau.is_finite()) {
            return Err(DynamicsError::GridMismatch { tau, dt });
        }
        let ratio = tau / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(DynamicsError::GridMismatch { tau, dt });
        }
        Ok(TimeGrid { tau, steps: steps as usize })
    }

    pub fn with_steps(tau: f64, steps: usize) -> Self {
        assert!(tau > 0.0 && steps >= 1);
        TimeGrid { tau, steps }
    }

    pub fn dt(&self) -> f64 {
        self.tau / self.steps as f64
    }

    /// `t_k`; exact at both ends.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.tau
        } else {
            self.tau * k as f64 / self.steps as f64
        }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Checks that every breakpoint of `signal` lands on a grid node.
    pub fn check_signal(&self, signal: &ControlSignal) -> Result<(), DynamicsError> {
        let dt = self.dt();
        for &b in &signal.breakpoints {
            let k = b / dt;
            if (k - k.round()).abs() > 1e-6 {
                return Err(DynamicsError::BreakpointOffGrid { time: b });
            }
        }
        Ok(())
    }
}

/// Sampled solution of one initial value problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The state left the bounding box; `states` stops at the last in-box node.
    pub escaped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimOutcome {
    Completed,
    /// The visitor asked to stop after node `k`.
    Stopped(usize),
    /// Node `k` left the bounding box or became non-finite; it was not visited.
    Escaped(usize),
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }

    #[inline]
    fn step(&mut self, field: &dyn VectorField, x: &mut [f64], u: &[f64], h: f64) {
        let n = x.len();
        field.eval(x, u, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        field.eval(&self.tmp, u, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        field.eval(&self.tmp, u, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        field.eval(&self.tmp, u, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

fn outside(domain: &Domain, x: &[f64]) -> bool {
    x.iter().enumerate().any(|(i, v)| {
        !v.is_finite() || (!domain.is_periodic(i) && (*v < domain.lower[i] || *v > domain.upper[i]))
    })
}

/// Classical RK4 on `grid`, holding the control of the segment that contains each step.
///
/// `visit(k, x)` sees node `k` after periodic wrapping and returns `false` to stop early.
/// With `bounds`, periodic axes wrap after every step and leaving the box ends the run.
pub fn simulate(
    field: &dyn VectorField,
    x0: &[f64],
    signal: &ControlSignal,
    grid: &TimeGrid,
    bounds: Option<&Domain>,
    mut visit: impl FnMut(usize, &[f64]) -> bool,
) -> Result<SimOutcome, DynamicsError> {
    let n = field.dim();
    if x0.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, found: x0.len() });
    }
    if let Some(u) = signal.values.iter().find(|u| u.len() != field.controls().dim()) {
        return Err(DynamicsError::DimensionMismatch { expected: field.controls().dim(), found: u.len() });
    }
    grid.check_signal(signal)?;
    let mut x = x0.to_vec();
    if let Some(d) = bounds {
        d.wrap(&mut x);
        if outside(d, &x) {
            return Ok(SimOutcome::Escaped(0));
        }
    }
    if !visit(0, &x) {
        return Ok(SimOutcome::Stopped(0));
    }
    let h = grid.dt();
    let mut rk = Rk4::new(n);
    let mut seg = 0usize;
    let last = signal.values.len() - 1;
    for k in 0..grid.steps {
        let mid = grid.time(k) + 0.5 * h;
        while seg < last && signal.breakpoints[seg] < mid {
            seg += 1;
        }
        rk.step(field, &mut x, &signal.values[seg], h);
        if let Some(d) = bounds {
            d.wrap(&mut x);
            if outside(d, &x) {
                return Ok(SimOutcome::Escaped(k + 1));
            }
        }
        if !visit(k + 1, &x) {
            return Ok(SimOutcome::Stopped(k + 1));
        }
    }
    Ok(SimOutcome::Completed)
}

/// Full trajectory on `grid`; see [`simulate`].
pub fn integrate(
    field: &dyn VectorField,
    x0: &[f64],
    signal: &ControlSignal,
    grid: &TimeGrid,
    bounds: Option<&Domain>,
) -> Result<Trajectory, DynamicsError> {
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let outcome = simulate(field, x0, signal, grid, bounds, |k, x| {
        times.push(grid.time(k));
        states.push(x.to_vec());
        true
    })?;
    Ok(Trajectory { times, states, escaped: matches!(outcome, SimOutcome::Escaped(_)) })
}
