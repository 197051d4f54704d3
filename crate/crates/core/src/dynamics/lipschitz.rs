use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FieldBounds, VectorField};
use crate::geometry::Domain;

pub const DEFAULT_SAFETY_FACTOR: f64 = 1.5;

/// Sampled `L̂` and `M̂` inflated by [`DEFAULT_SAFETY_FACTOR`]; never certified.
pub fn estimate_lipschitz(field: &dyn VectorField, domain: &Domain, samples: usize, seed: u64) -> FieldBounds {
    estimate_lipschitz_with(field, domain, samples, seed, DEFAULT_SAFETY_FACTOR)
}

/// Difference quotients over random pairs `y = x + h·s` with sign vectors `s`, plus
/// `‖F(x, u)‖∞` at the same points.
pub fn estimate_lipschitz_with(
    field: &dyn VectorField,
    domain: &Domain,
    samples: usize,
    seed: u64,
    factor: f64,
) -> FieldBounds {
    assert!(samples >= 2);
    let n = field.dim();
    let controls = field.controls();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-4 * (0..n).map(|i| domain.extent(i)).fold(f64::INFINITY, f64::min);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut u = vec![0.0; controls.dim()];
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    let (mut l, mut m) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        for i in 0..n {
            x[i] = rng.gen_range(domain.lower[i]..=domain.upper[i]);
            y[i] = x[i] + if rng.gen::<bool>() { h } else { -h };
        }
        for (a, ua) in u.iter_mut().enumerate() {
            let (lo, hi) = (controls.lower[a], controls.upper[a]);
            *ua = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        }
        field.eval(&x, &u, &mut fx);
        field.eval(&y, &u, &mut fy);
        let diff = fx.iter().zip(&fy).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        l = l.max(diff / h);
        m = m.max(fx.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    FieldBounds { lipschitz: factor * l, velocity: factor * m, certified: false }
}
