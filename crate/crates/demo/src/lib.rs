//! Browser bindings: a planar verification run, a Dubins reachability slice and a Dubins trajectory.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use rcbf::conditions::RcbfParams;
use rcbf::dynamics::{dubins3d, integrate, single_integrator, ControlSignal, TimeGrid};
use rcbf::geometry::{Domain, Label, UnsafeSet};
use rcbf::oracle::{brute_force_brt, OracleConfig, OutsidePolicy};
use rcbf::verifier::{verify_region, VerifierConfig};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn dubins_domain() -> Domain {
    Domain::new(vec![-10.0, -10.0, 0.0], vec![10.0, 10.0, 2.0 * PI], vec![false, false, true]).unwrap()
}

/// Labels `[-1, 1]²` around a disk of `radius` for the planar single integrator.
/// Returns `[cx, cy, r, unsafe]` per cell, flattened.
#[wasm_bindgen]
pub fn verify_integrator_2d(radius: f64, tau: f64, r_min: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    let domain = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).map_err(js_err)?;
    let set = UnsafeSet::Ball { center: vec![0.0, 0.0], radius };
    let params = RcbfParams::with_defaults(tau, 1.0, 1.0, 0.0, 1.0);
    let cfg = VerifierConfig { n_s: 20, n_seg: 5, seed: u64::from(seed), ..VerifierConfig::new(set, params, r_min) };
    let v = verify_region(&domain, &single_integrator(2), &cfg).map_err(js_err)?;
    let mut cells: Vec<_> = v.partition.safe.iter().chain(&v.partition.unsafe_cells).collect();
    cells.sort_by_key(|c| c.id);
    Ok(cells
        .iter()
        .flat_map(|c| [c.center[0], c.center[1], c.radius, if c.label == Label::Unsafe { 1.0 } else { 0.0 }])
        .collect())
}

/// Grid value of the Dubins reachable tube around the unit cylinder at heading `theta`,
/// sampled on an `n × n` raster of `[-10, 10]²`, rows from `y = -10` upward.
#[wasm_bindgen]
pub fn dubins_brt_slice(theta: f64, tau: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    let set = UnsafeSet::Cylinder { axis: 2, radius: 1.0, center: vec![0.0, 0.0, 0.0] };
    let cfg = OracleConfig::new(vec![41, 41, 24], tau, 0.05);
    let g = brute_force_brt(&dubins3d(5.0), &set, &dubins_domain(), &cfg).map_err(js_err)?;
    let n = n.max(2);
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = -10.0 + 20.0 * (i as f64 + 0.5) / n as f64;
            let y = -10.0 + 20.0 * (j as f64 + 0.5) / n as f64;
            out.push(g.sample(&mut [x, y, theta], OutsidePolicy::Clamp));
        }
    }
    Ok(out)
}

/// Dubins states `[x, y, θ]` at every step of a constant turn rate `u` over `tau`.
#[wasm_bindgen]
pub fn dubins_trajectory(x: f64, y: f64, theta: f64, u: f64, tau: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(JsValue::from_str("tau must be positive"));
    }
    let grid = TimeGrid::with_steps(tau, steps.max(1));
    let signal = ControlSignal::constant(vec![u.clamp(-1.0, 1.0)], tau);
    let d = dubins_domain();
    let t = integrate(&dubins3d(5.0), &[x, y, theta], &signal, &grid, None).map_err(js_err)?;
    Ok(t.states
        .into_iter()
        .flat_map(|mut s| {
            d.wrap(&mut s);
            s
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_run_covers_the_disk() {
        let cells = verify_integrator_2d(0.3, 0.3, 0.04, 1).unwrap();
        assert_eq!(cells.len() % 4, 0);
        let covered = cells.chunks(4).any(|c| c[3] == 1.0 && c[0].abs() <= c[2] && c[1].abs() <= c[2]);
        assert!(covered);
    }

    #[test]
    fn slice_is_negative_inside_the_cylinder() {
        let v = dubins_brt_slice(0.0, 0.25, 20).unwrap();
        assert_eq!(v.len(), 400);
        // pixel (9, 9) is centered at (-0.5, -0.5)
        assert!(v[9 * 20 + 9] < 0.0);
        assert!(v[0] > 0.0);
    }

    #[test]
    fn straight_run_keeps_the_heading() {
        let s = dubins_trajectory(2.0, 0.0, 0.0, 0.0, 1.0, 10).unwrap();
        assert_eq!(s.len(), 33);
        assert!((s[30] - 2.0).abs() < 1e-12 && s[32].abs() < 1e-12);
    }
}
