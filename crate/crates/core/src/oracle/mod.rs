//! Brute-force backward reachable tube on a dense grid, and comparison metrics.

mod grid;

pub use grid::{GridHeader, GridValueField};

use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::geometry::{Aabb, BoxTree, Cell, Domain, Partition, UnsafeSet};
use crate::runtime::Pool;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error("the oracle tube is empty")]
    EmptyTube,
    #[error("the oracle tube has zero volume")]
    ZeroVolume,
    #[error("malformed oracle data: {0}")]
    Format(String),
}

/// Value of the grid field at states whose step leaves the domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutsidePolicy {
    /// `+∞`: leaving the domain escapes the unsafe set.
    #[default]
    Escape,
    /// Project the state back onto the domain.
    Clamp,
}

fn default_controls() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Nodes per axis. Closed axes include both ends; periodic axes use spacing `P/N`.
    pub resolution: Vec<usize>,
    pub tau: f64,
    pub dt: f64,
    /// Equally spaced values per control axis, extremes included.
    #[serde(default = "default_controls")]
    pub n_controls: usize,
    #[serde(default)]
    pub outside: OutsidePolicy,
    #[serde(skip)]
    pub workers: usize,
}

impl OracleConfig {
    pub fn new(resolution: Vec<usize>, tau: f64, dt: f64) -> Self {
        OracleConfig { resolution, tau, dt, n_controls: default_controls(), outside: OutsidePolicy::Escape, workers: 0 }
    }

    fn steps(&self) -> Result<usize, OracleError> {
        if self.tau == 0.0 {
            return Ok(0);
        }
        if !(self.tau > 0.0 && self.dt > 0.0) {
            return Err(OracleError::Config(format!("tau {} and dt {} must be positive", self.tau, self.dt)));
        }
        let ratio = self.tau / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(OracleError::Config(format!("dt {} does not divide tau {}", self.dt, self.tau)));
        }
        Ok(ratio.round() as usize)
    }
}

fn control_grid(field: &dyn VectorField, n: usize) -> Vec<Vec<f64>> {
    let cb = field.controls();
    let m = cb.dim();
    let axis_values: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            if n == 1 {
                vec![0.5 * (cb.lower[a] + cb.upper[a])]
            } else {
                (0..n).map(|j| cb.lower[a] + (cb.upper[a] - cb.lower[a]) * j as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let total = n.pow(m as u32);
    (0..total)
        .map(|mut j| {
            let mut u = vec![0.0; m];
            for a in (0..m).rev() {
                u[a] = axis_values[a][j % n];
                j /= n;
            }
            u
        })
        .collect()
}

/// `V_{k+1}(x) = min(l(x), max_u V_k(x + dt·F(x, u)))` from `V_0 = l = sd(·, X_u)` for
/// `τ/dt` steps, with multilinear interpolation. Nodes with `V ≤ 0` estimate the tube.
pub fn brute_force_brt(
    field: &dyn VectorField,
    unsafe_set: &UnsafeSet,
    domain: &Domain,
    cfg: &OracleConfig,
) -> Result<GridValueField, OracleError> {
    let n = domain.dim();
    if field.dim() != n || cfg.resolution.len() != n {
        return Err(OracleError::Config("resolution, system and domain dimensions differ".into()));
    }
    if cfg.n_controls == 0 {
        return Err(OracleError::Config("n_controls must be at least 1".into()));
    }
    let steps = cfg.steps()?;
    let header = GridHeader {
        counts: cfg.resolution.clone(),
        lower: domain.lower.clone(),
        upper: domain.upper.clone(),
        periodic: domain.periodic.clone(),
        tau: cfg.tau,
        dt: if steps == 0 { 0.0 } else { cfg.dt },
        n_controls: cfg.n_controls,
    };
    header.validate()?;
    let total = header.len();
    let nodes: Vec<usize> = (0..total).collect();
    let pool = Pool::new(cfg.workers);
    let target: Vec<f64> = pool.map(&nodes, |&i| unsafe_set.signed_distance(&header.node(i), domain));
    let mut field_v = GridValueField { header: header.clone(), values: target.clone() };
    let controls = control_grid(field, cfg.n_controls);
    let chunk = 4096;
    let chunks: Vec<usize> = (0..total.div_ceil(chunk)).collect();
    for _ in 0..steps {
        let prev = &field_v;
        let parts: Vec<Vec<f64>> = pool.map(&chunks, |&c| {
            let mut out = Vec::with_capacity(chunk);
            let mut f = vec![0.0; n];
            let mut y = vec![0.0; n];
            for i in c * chunk..((c + 1) * chunk).min(total) {
                let x = header.node(i);
                let mut best = f64::NEG_INFINITY;
                for u in &controls {
                    field.eval(&x, u, &mut f);
                    for a in 0..n {
                        y[a] = x[a] + cfg.dt * f[a];
                    }
                    let v = prev.sample(&mut y, cfg.outside);
                    best = best.max(v);
                }
                out.push(target[i].min(best));
            }
            out
        });
        field_v = GridValueField { header: header.clone(), values: parts.concat() };
    }
    Ok(field_v)
}

fn unsafe_tree(cells: &[Cell], domain: &Domain) -> BoxTree {
    let boxes: Vec<Aabb> = cells.iter().filter_map(|c| c.clipped(domain)).collect();
    let keys = (0..boxes.len() as u64).collect();
    BoxTree::new(domain, boxes, keys)
}

/// Share of tube nodes (`V ≤ 0`) lying in a closed unsafe cell.
pub fn containment_fraction(partition: &Partition, oracle: &GridValueField) -> Result<f64, OracleError> {
    let tree = unsafe_tree(&partition.unsafe_cells, &partition.domain);
    let (mut inside, mut total) = (0usize, 0usize);
    for (i, v) in oracle.values.iter().enumerate() {
        if *v <= 0.0 {
            total += 1;
            if tree.distance(&oracle.header.node(i)) == 0.0 {
                inside += 1;
            }
        }
    }
    if total == 0 {
        return Err(OracleError::EmptyTube);
    }
    Ok(inside as f64 / total as f64)
}

/// `(volume(G_u) − V_tube) / V_tube`.
pub fn volume_gap(partition: &Partition, oracle: &GridValueField) -> Result<f64, OracleError> {
    let tube = oracle.tube_volume();
    if tube <= 0.0 {
        return Err(OracleError::ZeroVolume);
    }
    Ok((partition.unsafe_volume() - tube) / tube)
}
