use serde::{Deserialize, Serialize};

use super::{Domain, GeometryError};

/// Analytic description of the unsafe region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum UnsafeSet {
    /// Euclidean disk of `radius` in the axes other than `axis`, extruded along `axis`.
    Cylinder {
        axis: usize,
        radius: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Euclidean ball.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Union {
        members: Vec<UnsafeSet>,
    },
    Empty,
}

impl UnsafeSet {
    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        let check_len = |len: usize| {
            if len == dim {
                Ok(())
            } else {
                Err(GeometryError::DimensionMismatch { expected: dim, found: len })
            }
        };
        match self {
            UnsafeSet::Cylinder { axis, radius, center } => {
                if *axis >= dim || dim < 2 {
                    return Err(GeometryError::InvalidShape(format!("cylinder axis {axis} in dimension {dim}")));
                }
                if !center.is_empty() {
                    check_len(center.len())?;
                }
                if !(*radius >= 0.0) {
                    return Err(GeometryError::InvalidShape("negative cylinder radius".into()));
                }
                Ok(())
            }
            UnsafeSet::Box { lower, upper } => {
                check_len(lower.len())?;
                check_len(upper.len())?;
                if lower.iter().zip(upper).any(|(a, b)| !(a <= b)) {
                    return Err(GeometryError::InvalidShape("box lower exceeds upper".into()));
                }
                Ok(())
            }
            UnsafeSet::Ball { center, radius } => {
                check_len(center.len())?;
                if !(*radius >= 0.0) {
                    return Err(GeometryError::InvalidShape("negative ball radius".into()));
                }
                Ok(())
            }
            UnsafeSet::Union { members } => members.iter().try_for_each(|m| m.validate(dim)),
            UnsafeSet::Empty => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            UnsafeSet::Empty => true,
            UnsafeSet::Union { members } => members.iter().all(|m| m.is_empty()),
            _ => false,
        }
    }

    /// Signed ∞-norm distance, negative inside. Exact for every primitive; for unions the
    /// outside distance is exact and the inside depth is the largest member depth (a lower
    /// bound on the true depth).
    pub fn signed_distance(&self, x: &[f64], domain: &Domain) -> f64 {
        match self {
            UnsafeSet::Cylinder { axis, radius, center } => {
                let d: Vec<f64> = (0..x.len())
                    .filter(|&i| i != *axis)
                    .map(|i| domain.delta(i, x[i], center.get(i).copied().unwrap_or(0.0)).abs())
                    .collect();
                ball_sd_inf(&d, *radius)
            }
            UnsafeSet::Ball { center, radius } => {
                let d: Vec<f64> = (0..x.len()).map(|i| domain.delta(i, x[i], center[i]).abs()).collect();
                ball_sd_inf(&d, *radius)
            }
            UnsafeSet::Box { lower, upper } => {
                let mut gap: f64 = 0.0;
                let mut depth = f64::INFINITY;
                for i in 0..x.len() {
                    let c = 0.5 * (lower[i] + upper[i]);
                    let h = 0.5 * (upper[i] - lower[i]);
                    let off = domain.delta(i, x[i], c).abs();
                    gap = gap.max(off - h);
                    depth = depth.min(h - off);
                }
                if gap > 0.0 {
                    gap
                } else if depth <= 0.0 {
                    0.0
                } else {
                    -depth
                }
            }
            UnsafeSet::Union { members } => {
                let mut outside = f64::INFINITY;
                let mut depth: f64 = 0.0;
                let mut inside = false;
                for m in members {
                    let s = m.signed_distance(x, domain);
                    if s <= 0.0 {
                        inside = true;
                        depth = depth.max(-s);
                    } else {
                        outside = outside.min(s);
                    }
                }
                if inside {
                    if depth == 0.0 {
                        0.0
                    } else {
                        -depth
                    }
                } else {
                    outside
                }
            }
            UnsafeSet::Empty => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: &[f64], domain: &Domain) -> bool {
        self.signed_distance(x, domain) <= 0.0
    }
}

/// Signed ∞-norm distance from a point to a Euclidean ball of radius `radius`, given the
/// absolute coordinate offsets `d` from the ball center.
fn ball_sd_inf(d: &[f64], radius: f64) -> f64 {
    let n = d.len() as f64;
    let s1: f64 = d.iter().sum();
    let s2: f64 = d.iter().map(|a| a * a).sum();
    let r2 = radius * radius;
    if s2 <= r2 {
        // largest cube around x inside the ball: its far corner touches the sphere
        let disc = s1 * s1 - n * (s2 - r2);
        let s = (-s1 + disc.max(0.0).sqrt()) / n;
        return if s <= 0.0 { 0.0 } else { -s };
    }
    // smallest cube around x touching the ball: Σ (d_i - s)_+^2 = r^2
    let mut a: Vec<f64> = d.to_vec();
    a.sort_by(|p, q| q.total_cmp(p));
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    for k in 0..a.len() {
        sum1 += a[k];
        sum2 += a[k] * a[k];
        let next = a.get(k + 1).copied().unwrap_or(0.0);
        let kf = (k + 1) as f64;
        // f(next) = Σ_{i<=k} (a_i - next)^2
        let f_next = sum2 - 2.0 * next * sum1 + kf * next * next;
        if f_next >= r2 {
            let disc = sum1 * sum1 - kf * (sum2 - r2);
            let s = (sum1 - disc.max(0.0).sqrt()) / kf;
            return s.clamp(next, a[k]);
        }
    }
    // unreachable for s2 > r2, kept for numerical safety
    0.0
}
