use serde::{Deserialize, Serialize};

use super::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Pending,
    Safe,
    Unsafe,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Pending => "pending",
            Label::Safe => "safe",
            Label::Unsafe => "unsafe",
        }
    }
}

/// Axis-aligned hypercube `B_r(center)` in the ∞-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: u64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub label: Label,
    /// Verification stage that assigned the current label (0 while pending).
    #[serde(default)]
    pub stage: u8,
}

impl Cell {
    pub fn new(id: u64, center: Vec<f64>, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Cell { id, center, radius, label: Label::Pending, stage: 0 }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Unclipped volume `(2r)^n`.
    pub fn raw_volume(&self) -> f64 {
        (2.0 * self.radius).powi(self.dim() as i32)
    }

    /// The cell box intersected with `domain`. `None` when the intersection has no volume.
    pub fn clipped(&self, domain: &Domain) -> Option<Aabb> {
        let n = self.dim();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let a = (self.center[i] - self.radius).max(domain.lower[i]);
            let b = (self.center[i] + self.radius).min(domain.upper[i]);
            if b <= a {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(Aabb { lo, hi })
    }

    /// Point and radius used for the robust checks: the center of the clipped box and
    /// its largest half-width. The clipped box lies inside `B_radius(point)`.
    pub fn representative(&self, domain: &Domain) -> (Vec<f64>, f64) {
        match self.clipped(domain) {
            Some(b) => {
                let r = (0..b.dim()).map(|i| 0.5 * (b.hi[i] - b.lo[i])).fold(0.0, f64::max);
                (b.center(), r)
            }
            None => (self.center.clone(), self.radius),
        }
    }
}

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    /// ∞-norm distance from `x` to the box, with periodic axes wrapped through `domain`.
    pub fn distance(&self, x: &[f64], domain: &Domain) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim() {
            d = d.max(axis_gap(x[i], self.lo[i], self.hi[i], domain, i));
        }
        d
    }
}

/// Gap between coordinate `x` and the interval `[lo, hi]` on `axis`, minimised over
/// periodic images. Intervals are assumed to lie inside the domain.
#[inline]
pub(crate) fn axis_gap(x: f64, lo: f64, hi: f64, domain: &Domain, axis: usize) -> f64 {
    #[inline]
    fn gap(x: f64, lo: f64, hi: f64) -> f64 {
        if x < lo {
            lo - x
        } else if x > hi {
            x - hi
        } else {
            0.0
        }
    }
    match domain.period(axis) {
        None => gap(x, lo, hi),
        Some(p) => {
            let x = domain.wrap_coord(axis, x);
            let g = gap(x, lo, hi);
            if g == 0.0 {
                0.0
            } else {
                g.min(gap(x + p, lo, hi)).min(gap(x - p, lo, hi))
            }
        }
    }
}

/// Splits `cell` into its `3^n` thirds. Children get ids `first_id, first_id + 1, ...`
/// in row-major order of the offset vector `δ ∈ {-1, 0, 1}^n` (last axis fastest).
pub fn split_cell(cell: &Cell, first_id: u64) -> Vec<Cell> {
    let n = cell.dim();
    let r = cell.radius / 3.0;
    let step = 2.0 * cell.radius / 3.0;
    let count = 3usize.pow(n as u32);
    let mut children = Vec::with_capacity(count);
    let mut digits = vec![0usize; n];
    for j in 0..count {
        let mut rem = j;
        for i in (0..n).rev() {
            digits[i] = rem % 3;
            rem /= 3;
        }
        let center = (0..n)
            .map(|i| cell.center[i] + step * (digits[i] as f64 - 1.0))
            .collect();
        children.push(Cell::new(first_id + j as u64, center, r));
    }
    children
}
