use serde::{Deserialize, Serialize};

use super::{OracleError, OutsidePolicy};

/// Grid geometry and the settings that produced a field. Serialized as the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub counts: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
    pub tau: f64,
    pub dt: f64,
    pub n_controls: usize,
}

impl GridHeader {
    pub fn validate(&self) -> Result<(), OracleError> {
        let n = self.counts.len();
        if n == 0 || self.lower.len() != n || self.upper.len() != n || self.periodic.len() != n {
            return Err(OracleError::Config("grid dimensions disagree".into()));
        }
        for i in 0..n {
            let min = if self.periodic[i] { 1 } else { 2 };
            if self.counts[i] < min {
                return Err(OracleError::Config(format!("axis {i} needs at least {min} nodes")));
            }
            if !(self.lower[i] < self.upper[i]) {
                return Err(OracleError::Config(format!("axis {i} has empty extent")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let extent = self.upper[axis] - self.lower[axis];
        if self.periodic[axis] {
            extent / self.counts[axis] as f64
        } else {
            extent / (self.counts[axis] - 1) as f64
        }
    }

    /// Per-axis indices of flat node `i` (last axis fastest).
    pub fn unravel(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = i % self.counts[a];
            i /= self.counts[a];
        }
        idx
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        let idx = self.unravel(i);
        (0..self.dim())
            .map(|a| {
                if !self.periodic[a] && idx[a] == self.counts[a] - 1 {
                    self.upper[a]
                } else {
                    self.lower[a] + idx[a] as f64 * self.spacing(a)
                }
            })
            .collect()
    }

    /// Trapezoid quadrature weight of node `i`; the weights sum to the domain volume.
    pub fn weight(&self, i: usize) -> f64 {
        let idx = self.unravel(i);
        (0..self.dim())
            .map(|a| {
                let h = self.spacing(a);
                if !self.periodic[a] && (idx[a] == 0 || idx[a] == self.counts[a] - 1) {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }
}

/// Values of the reachability value function on a regular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValueField {
    pub header: GridHeader,
    pub values: Vec<f64>,
}

impl GridValueField {
    /// Multilinear interpolation at `y`. Periodic coordinates of `y` are wrapped in place;
    /// closed coordinates outside the grid follow `policy`.
    pub fn sample(&self, y: &mut [f64], policy: OutsidePolicy) -> f64 {
        let h = &self.header;
        let n = h.dim();
        let mut base = [0usize; 8];
        let mut next = [0usize; 8];
        let mut frac = [0f64; 8];
        debug_assert!(n <= 8);
        for a in 0..n {
            let (lo, hi, count) = (h.lower[a], h.upper[a], h.counts[a]);
            let step = h.spacing(a);
            if h.periodic[a] {
                let p = hi - lo;
                let mut w = lo + (y[a] - lo).rem_euclid(p);
                if w >= hi {
                    w = lo;
                }
                y[a] = w;
                let s = (w - lo) / step;
                let f = s.floor();
                base[a] = (f as usize) % count;
                next[a] = (base[a] + 1) % count;
                frac[a] = (s - f).clamp(0.0, 1.0);
            } else {
                if y[a] < lo || y[a] > hi {
                    match policy {
                        OutsidePolicy::Escape => return f64::INFINITY,
                        OutsidePolicy::Clamp => y[a] = y[a].clamp(lo, hi),
                    }
                }
                let s = (y[a] - lo) / step;
                let f = s.floor().min((count - 2) as f64);
                base[a] = f as usize;
                next[a] = base[a] + 1;
                frac[a] = (s - f).clamp(0.0, 1.0);
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..n {
                let hi = corner >> (n - 1 - a) & 1 == 1;
                w *= if hi { frac[a] } else { 1.0 - frac[a] };
                flat = flat * h.counts[a] + if hi { next[a] } else { base[a] };
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Quadrature volume of `{V ≤ 0}`.
    pub fn tube_volume(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= 0.0)
            .map(|(i, _)| self.header.weight(i))
            .fold(0.0, |a, w| a + w)
    }

    pub fn tube_nodes(&self) -> usize {
        self.values.iter().filter(|v| **v <= 0.0).count()
    }

    /// Little-endian `f64` words: `[n, counts…, lower…, upper…]` then the values, row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut words = Vec::with_capacity(1 + 3 * h.dim() + self.values.len());
        words.push(h.dim() as f64);
        words.extend(h.counts.iter().map(|c| *c as f64));
        words.extend(&h.lower);
        words.extend(&h.upper);
        words.extend(&self.values);
        words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Inverse of [`GridValueField::to_bytes`]; the binary header must agree with `header`.
    pub fn from_bytes(header: GridHeader, bytes: &[u8]) -> Result<Self, OracleError> {
        header.validate()?;
        if !bytes.len().is_multiple_of(8) {
            return Err(OracleError::Format("length is not a multiple of 8".into()));
        }
        let words: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let n = header.dim();
        let head = 1 + 3 * n;
        if words.len() != head + header.len() {
            return Err(OracleError::Format(format!("expected {} words, found {}", head + header.len(), words.len())));
        }
        let agrees = words[0] == n as f64
            && (0..n).all(|a| {
                words[1 + a] == header.counts[a] as f64
                    && words[1 + n + a] == header.lower[a]
                    && words[1 + 2 * n + a] == header.upper[a]
            });
        if !agrees {
            return Err(OracleError::Format("binary header disagrees with the sidecar".into()));
        }
        Ok(GridValueField { header, values: words[head..].to_vec() })
    }
}
