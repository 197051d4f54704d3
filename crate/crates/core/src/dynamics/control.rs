use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VectorField;

/// Admissible inputs `U = [lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ControlBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(a, b)| a <= b));
        ControlBox { lower, upper }
    }

    /// `[−a, a]^m`.
    pub fn symmetric(m: usize, a: f64) -> Self {
        ControlBox::new(vec![-a; m], vec![a; m])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.lower.iter().chain(&self.upper).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.iter().enumerate().all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    /// Zero clamped into the box.
    fn rest(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0f64.clamp(*a, *b)).collect()
    }
}

/// Piecewise-constant input on `(0, τ]`: `values[j]` holds on `(breakpoints[j-1], breakpoints[j]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ControlSignal {
    pub fn constant(u: Vec<f64>, tau: f64) -> Self {
        ControlSignal { breakpoints: vec![tau], values: vec![u] }
    }

    /// `n_seg` equal segments on `(0, τ]`.
    pub fn uniform(values: Vec<Vec<f64>>, tau: f64) -> Self {
        let n = values.len();
        let breakpoints = (1..=n).map(|j| if j == n { tau } else { tau * j as f64 / n as f64 }).collect();
        ControlSignal { breakpoints, values }
    }

    pub fn horizon(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    /// Input at time `t` (the first segment for `t ≤ 0`, the last past the horizon).
    pub fn value_at(&self, t: f64) -> &[f64] {
        let j = self.breakpoints.partition_point(|b| *b < t).min(self.values.len() - 1);
        &self.values[j]
    }

    /// Runs `self` then `next`, shifting `next` by this signal's horizon.
    pub fn concat(&self, next: &ControlSignal) -> ControlSignal {
        let shift = self.horizon();
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend(next.breakpoints.iter().map(|b| b + shift));
        let mut values = self.values.clone();
        values.extend(next.values.iter().cloned());
        ControlSignal { breakpoints, values }
    }
}

/// Lazy stream of candidate controls: the constant extremes of each control axis
/// (lower then upper), the rest input, then i.i.d. uniform piecewise-constant signals.
#[derive(Clone, Debug)]
pub struct ControlSampler {
    controls: ControlBox,
    n_seg: usize,
    tau: f64,
    remaining: usize,
    emitted: usize,
    rng: ChaCha8Rng,
}

impl ControlSampler {
    pub fn new(controls: &ControlBox, n_s: usize, n_seg: usize, tau: f64, seed: u64) -> Self {
        assert!(n_seg >= 1);
        ControlSampler {
            controls: controls.clone(),
            n_seg,
            tau,
            remaining: n_s,
            emitted: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn prefix_len(&self) -> usize {
        2 * self.controls.dim() + 1
    }
}

impl Iterator for ControlSampler {
    type Item = ControlSignal;

    fn next(&mut self) -> Option<ControlSignal> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let i = self.emitted;
        self.emitted += 1;
        let m = self.controls.dim();
        if i < self.prefix_len() {
            let mut u = self.controls.rest();
            if i < 2 * m {
                let axis = i / 2;
                u[axis] = if i.is_multiple_of(2) { self.controls.lower[axis] } else { self.controls.upper[axis] };
            }
            return Some(ControlSignal::uniform(vec![u; self.n_seg], self.tau));
        }
        let values = (0..self.n_seg)
            .map(|_| {
                (0..m)
                    .map(|a| {
                        let (lo, hi) = (self.controls.lower[a], self.controls.upper[a]);
                        if hi > lo {
                            self.rng.gen_range(lo..=hi)
                        } else {
                            lo
                        }
                    })
                    .collect()
            })
            .collect();
        Some(ControlSignal::uniform(values, self.tau))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

/// The first `n_s` signals of [`ControlSampler`] for `field`.
pub fn sample_controls(field: &dyn VectorField, n_s: usize, n_seg: usize, tau: f64, seed: u64) -> Vec<ControlSignal> {
    ControlSampler::new(field.controls(), n_s, n_seg, tau, seed).collect()
}
