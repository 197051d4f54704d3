use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ControlBox, DynamicsError, FieldBounds, VectorField};
use crate::geometry::Domain;

/// Relative Dubins car: `ẋ = (−v + v cos x₃ + u x₂, v sin x₃ − u x₁, −u)`, `u ∈ [−1, 1]`.
#[derive(Clone, Debug)]
pub struct Dubins3d {
    pub v: f64,
    controls: ControlBox,
}

pub fn dubins3d(v: f64) -> Dubins3d {
    assert!(v >= 0.0, "speed must be nonnegative");
    Dubins3d { v, controls: ControlBox::symmetric(1, 1.0) }
}

impl VectorField for Dubins3d {
    fn name(&self) -> &str {
        "dubins3d"
    }

    fn dim(&self) -> usize {
        3
    }

    fn controls(&self) -> &ControlBox {
        &self.controls
    }

    #[inline]
    fn eval(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let (s, c) = x[2].sin_cos();
        out[0] = -self.v + self.v * c + u[0] * x[1];
        out[1] = self.v * s - u[0] * x[0];
        out[2] = -u[0];
    }

    fn periodic_axes(&self) -> Vec<(usize, f64)> {
        vec![(2, 2.0 * PI)]
    }

    fn analytic_bounds(&self, domain: &Domain) -> Option<FieldBounds> {
        let umax = self.controls.max_abs();
        let reach = |i: usize| domain.lower[i].abs().max(domain.upper[i].abs());
        // Jacobian rows (0, u, −v sin x₃), (−u, 0, v cos x₃), 0
        let lipschitz = umax + self.v;
        let velocity = (2.0 * self.v + umax * reach(1)).max(self.v + umax * reach(0)).max(umax);
        Some(FieldBounds { lipschitz, velocity, certified: true })
    }
}

/// `ẋ = u` with `u ∈ [−1, 1]ⁿ`.
#[derive(Clone, Debug)]
pub struct SingleIntegrator {
    controls: ControlBox,
}

pub fn single_integrator(n: usize) -> SingleIntegrator {
    assert!(n >= 1);
    SingleIntegrator { controls: ControlBox::symmetric(n, 1.0) }
}

impl VectorField for SingleIntegrator {
    fn name(&self) -> &str {
        "integrator"
    }

    fn dim(&self) -> usize {
        self.controls.dim()
    }

    fn controls(&self) -> &ControlBox {
        &self.controls
    }

    #[inline]
    fn eval(&self, _x: &[f64], u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }

    fn analytic_bounds(&self, _domain: &Domain) -> Option<FieldBounds> {
        Some(FieldBounds { lipschitz: 0.0, velocity: self.controls.max_abs(), certified: true })
    }
}

type RhsFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// A user-supplied system for library callers.
pub struct FnField {
    name: String,
    dim: usize,
    controls: ControlBox,
    rhs: Box<RhsFn>,
    bounds: Option<FieldBounds>,
}

impl FnField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        controls: ControlBox,
        rhs: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        FnField { name: name.into(), dim, controls, rhs: Box::new(rhs), bounds: None }
    }

    /// Attaches user-asserted bounds, reported as certified.
    pub fn with_bounds(mut self, lipschitz: f64, velocity: f64) -> Self {
        self.bounds = Some(FieldBounds { lipschitz, velocity, certified: true });
        self
    }
}

impl std::fmt::Debug for FnField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnField").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl VectorField for FnField {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn controls(&self) -> &ControlBox {
        &self.controls
    }

    fn eval(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        (self.rhs)(x, u, out)
    }

    fn analytic_bounds(&self, _domain: &Domain) -> Option<FieldBounds> {
        self.bounds
    }
}

/// A built-in system by name plus its parameter table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn new(name: impl Into<String>) -> Self {
        SystemSpec { name: name.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Fills missing parameters with their defaults and returns the names that were filled.
    pub fn materialize(&mut self) -> Result<Vec<String>, DynamicsError> {
        let defaults: &[(&str, f64)] = match self.name.as_str() {
            "dubins3d" => &[("v", 5.0)],
            "integrator" => &[("dim", 1.0)],
            "integrator1d" | "integrator2d" | "integrator3d" => &[],
            other => return Err(DynamicsError::UnknownSystem(other.to_string())),
        };
        let mut filled = Vec::new();
        for (k, v) in defaults {
            if !self.params.contains_key(*k) {
                self.params.insert(k.to_string(), *v);
                filled.push(format!("system.params.{k}"));
            }
        }
        Ok(filled)
    }
}

pub fn system_by_name(spec: &SystemSpec) -> Result<Box<dyn VectorField>, DynamicsError> {
    let param = |key: &str, default: f64| spec.params.get(key).copied().unwrap_or(default);
    let bad = |name: &str, value: f64| DynamicsError::InvalidParameter { name: name.to_string(), value };
    match spec.name.as_str() {
        "dubins3d" => {
            let v = param("v", 5.0);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad("v", v));
            }
            Ok(Box::new(dubins3d(v)))
        }
        "integrator" => {
            let n = param("dim", 1.0);
            if !(n >= 1.0 && n.fract() == 0.0 && n <= 16.0) {
                return Err(bad("dim", n));
            }
            Ok(Box::new(single_integrator(n as usize)))
        }
        "integrator1d" => Ok(Box::new(single_integrator(1))),
        "integrator2d" => Ok(Box::new(single_integrator(2))),
        "integrator3d" => Ok(Box::new(single_integrator(3))),
        other => Err(DynamicsError::UnknownSystem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dubins_substitutions() {
        let f = dubins3d(5.0);
        let mut out = [0.0; 3];
        f.eval(&[0.0, 0.0, PI], &[1.0], &mut out);
        assert!((out[0] + 10.0).abs() < 1e-12 && out[1].abs() < 1e-12 && out[2] == -1.0);
        f.eval(&[1.0, 2.0, PI / 2.0], &[1.0], &mut out);
        assert!((out[0] + 3.0).abs() < 1e-12);
        assert!((out[1] - 4.0).abs() < 1e-12);
        assert_eq!(out[2], -1.0);
        f.eval(&[0.0, 0.0, 0.0], &[0.3], &mut out);
        assert_eq!(out, [0.0, 0.0, -0.3]);
    }

    #[test]
    fn dubins_bounds_on_benchmark_box() {
        let d = Domain::new(vec![-10.0, -10.0, 0.0], vec![10.0, 10.0, 2.0 * PI], vec![false, false, true]).unwrap();
        let b = dubins3d(5.0).analytic_bounds(&d).unwrap();
        assert_eq!(b.lipschitz, 6.0);
        assert_eq!(b.velocity, 20.0);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(system_by_name(&SystemSpec::new("integrator2d")).unwrap().dim(), 2);
        assert_eq!(system_by_name(&SystemSpec::new("integrator").with("dim", 3.0)).unwrap().dim(), 3);
        assert!(matches!(system_by_name(&SystemSpec::new("pendulum")), Err(DynamicsError::UnknownSystem(_))));
        let mut s = SystemSpec::new("dubins3d");
        assert_eq!(s.materialize().unwrap(), vec!["system.params.v".to_string()]);
        assert_eq!(s.params["v"], 5.0);
    }
}
