use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Axis-aligned state-space box. Periodic dimensions wrap onto `[lower, upper)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub periodic: Vec<bool>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, periodic: Vec<bool>) -> Result<Self, GeometryError> {
        let domain = Domain { lower, upper, periodic };
        domain.validated()
    }

    /// A domain with no periodic dimensions.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(lower, upper, Vec::new())
    }

    /// Checks the invariants and fills an empty periodic mask with `false`.
    pub fn validated(mut self) -> Result<Self, GeometryError> {
        let n = self.lower.len();
        if n == 0 {
            return Err(GeometryError::EmptyDomain);
        }
        if self.upper.len() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: self.upper.len() });
        }
        if self.periodic.is_empty() {
            self.periodic = vec![false; n];
        }
        if self.periodic.len() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: self.periodic.len() });
        }
        for i in 0..n {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeometryError::InvalidBounds { axis: i, lower: lo, upper: hi });
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic.get(axis).copied().unwrap_or(false)
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Period of `axis` if it wraps.
    pub fn period(&self, axis: usize) -> Option<f64> {
        self.is_periodic(axis).then(|| self.extent(axis))
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| 0.5 * (self.lower[i] + self.upper[i])).collect()
    }

    /// Wraps one coordinate of a periodic axis into `[lower, upper)`.
    #[inline]
    pub fn wrap_coord(&self, axis: usize, x: f64) -> f64 {
        if !self.is_periodic(axis) {
            return x;
        }
        let lo = self.lower[axis];
        let p = self.extent(axis);
        if x >= lo && x < lo + p {
            return x;
        }
        let w = lo + (x - lo).rem_euclid(p);
        // rem_euclid can round up to exactly p
        if w >= lo + p {
            lo
        } else {
            w
        }
    }

    pub fn wrap(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = self.wrap_coord(i, *xi);
        }
    }

    /// `a - b` along `axis`, taken as the shortest signed difference on periodic axes.
    #[inline]
    pub fn delta(&self, axis: usize, a: f64, b: f64) -> f64 {
        let d = a - b;
        match self.period(axis) {
            None => d,
            Some(p) => {
                let mut w = d.rem_euclid(p);
                if w > 0.5 * p {
                    w -= p;
                }
                w
            }
        }
    }

    /// Membership in the closed box, ignoring periodic axes.
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim())
            .all(|i| self.is_periodic(i) || (x[i] >= self.lower[i] && x[i] <= self.upper[i]))
    }

    /// ∞-norm distance from an interior point to the nearest non-periodic face.
    /// `+∞` when every axis is periodic.
    pub fn face_distance(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.dim() {
            if self.is_periodic(i) {
                continue;
            }
            best = best.min(x[i] - self.lower[i]).min(self.upper[i] - x[i]);
        }
        best.max(0.0)
    }
}
