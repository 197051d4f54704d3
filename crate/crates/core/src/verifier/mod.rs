//! The three-stage verification pipeline.
//!
//! Stage 1 over-approximates the unsafe set itself, stage 2 its backward reachable tube
//! over the horizon `τ`, and stage 3 prunes the remaining safe cells until
//! `h = −sd(·, ∪G_s)` satisfies the robust recurrence condition on every one of them.
//! Safety claims rest only on safe-labelled cells; unsafe labels are conservative.

mod check;

pub use check::{safety_check, CheckOutcome, Decision, Stage, Witness};
pub use crate::runtime::{cell_seed, splitmix64};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionError, RcbfParams};
use crate::dynamics::{ControlSignal, DynamicsError, VectorField};
use crate::geometry::{BoundaryPolicy, Domain, GeometryError, Label, Partition, UnsafeSet};
use crate::runtime::{Pool, Stopwatch};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifierError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

fn default_n_s() -> usize {
    500
}
fn default_n_seg() -> usize {
    5
}
fn default_stage3_iters() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierConfig {
    pub r_min: f64,
    #[serde(default = "default_n_s")]
    pub n_s: usize,
    #[serde(default = "default_n_seg")]
    pub n_seg: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stage3_iters")]
    pub max_stage3_iters: usize,
    pub unsafe_set: UnsafeSet,
    pub params: RcbfParams,
    /// Radius of the initial tiling; defaults to the largest half-extent of the domain.
    #[serde(default)]
    pub initial_radius: Option<f64>,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
    /// Worker threads, `0` for all cores. Results do not depend on it, so it is not serialized.
    #[serde(skip)]
    pub workers: usize,
}

impl VerifierConfig {
    /// `n_s = 500`, `N_seg = 5`, seed 0, 50 recurrence iterations.
    pub fn new(unsafe_set: UnsafeSet, params: RcbfParams, r_min: f64) -> Self {
        VerifierConfig {
            r_min,
            n_s: default_n_s(),
            n_seg: default_n_seg(),
            seed: 0,
            max_stage3_iters: default_stage3_iters(),
            unsafe_set,
            params,
            initial_radius: None,
            boundary: BoundaryPolicy::default(),
            workers: 0,
        }
    }

    pub fn validate(&self, domain: &Domain, field: &dyn VectorField) -> Result<(), VerifierError> {
        let bad = |m: String| Err(VerifierError::Config(m));
        if field.dim() != domain.dim() {
            return Err(GeometryError::DimensionMismatch { expected: domain.dim(), found: field.dim() }.into());
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return bad(format!("r_min must be positive, got {}", self.r_min));
        }
        if self.n_s == 0 || self.n_seg == 0 || self.max_stage3_iters == 0 {
            return bad("n_s, n_seg and max_stage3_iters must be at least 1".into());
        }
        if let Some(r) = self.initial_radius {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("initial_radius must be positive, got {r}"));
            }
        }
        if !(self.params.lipschitz.is_finite() && self.params.velocity.is_finite()) {
            return bad("field bounds must be finite".into());
        }
        self.unsafe_set.validate(domain.dim())?;
        self.params.validate()?;
        let steps = (self.params.tau / self.params.dt).round() as usize;
        if !steps.is_multiple_of(self.n_seg) {
            return bad(format!("{steps} time steps cannot be split into {} equal control segments", self.n_seg));
        }
        Ok(())
    }

    pub fn initial_radius(&self, domain: &Domain) -> f64 {
        self.initial_radius
            .unwrap_or_else(|| (0..domain.dim()).map(|i| 0.5 * domain.extent(i)).fold(0.0, f64::max))
    }
}

/// Counts and volumes of one stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: u8,
    pub passes: usize,
    pub examined: usize,
    pub split: usize,
    pub safe: usize,
    #[serde(rename = "unsafe")]
    pub unsafe_cells: usize,
    /// Cells labelled unsafe at the resolution floor (included in `unsafe`).
    pub floor: usize,
    /// Safe cells relabelled unsafe when the recurrence iteration cap was hit.
    pub relabeled: usize,
    pub simulations: u64,
    pub safe_volume: f64,
    pub unsafe_volume: f64,
    pub wall_seconds: f64,
    pub iterations: usize,
    pub workers: usize,
}

impl StageReport {
    fn absorb(&mut self, o: &StageReport) {
        self.passes += o.passes;
        self.examined += o.examined;
        self.split += o.split;
        self.safe += o.safe;
        self.unsafe_cells += o.unsafe_cells;
        self.floor += o.floor;
        self.simulations += o.simulations;
    }
}

/// A stored witness control for one safe cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub cell_id: u64,
    pub stage: u8,
    /// The cell whose check produced the witness: `cell_id` or an ancestor it was split from.
    pub source_cell: u64,
    pub signal_seed: u64,
    pub signal_index: usize,
    pub signal_segments: Vec<Vec<f64>>,
    pub breakpoints: Vec<f64>,
    /// Representative point and robustness radius of `source_cell`.
    pub point: Vec<f64>,
    pub radius: f64,
}

impl Certificate {
    fn from_witness(cell_id: u64, stage: u8, source_cell: u64, w: &Witness) -> Self {
        Certificate {
            cell_id,
            stage,
            source_cell,
            signal_seed: w.seed,
            signal_index: w.index,
            signal_segments: w.signal.values.clone(),
            breakpoints: w.signal.breakpoints.clone(),
            point: w.point.clone(),
            radius: w.radius,
        }
    }

    pub fn signal(&self) -> ControlSignal {
        ControlSignal { breakpoints: self.breakpoints.clone(), values: self.signal_segments.clone() }
    }
}

/// Final labelled partition with per-stage reports and the certificates of safe cells.
#[derive(Clone, Debug)]
pub struct Verification {
    pub partition: Partition,
    pub reports: Vec<StageReport>,
    pub certificates: Vec<Certificate>,
}

/// What one [`verify_cells`] call did besides relabelling.
#[derive(Clone, Debug, Default)]
pub struct CellsLog {
    pub report: StageReport,
    pub witnesses: Vec<(u64, Witness)>,
    /// `(parent, child)` for every split.
    pub lineage: Vec<(u64, u64)>,
}

/// Drains `partition.pending` through [`safety_check`] pass by pass. Checks within a pass
/// run concurrently against the fixed `stage`; results are committed in id order.
pub fn verify_cells(partition: &mut Partition, stage: &Stage<'_>, workers: usize) -> CellsLog {
    verify_cells_in(&Pool::new(workers), partition, stage)
}

fn verify_cells_in(pool: &Pool, partition: &mut Partition, stage: &Stage<'_>) -> CellsLog {
    let mut log = CellsLog::default();
    log.report.stage = stage.index;
    while !partition.pending.is_empty() {
        let mut cells = std::mem::take(&mut partition.pending);
        cells.sort_by_key(|c| c.id);
        let outcomes = pool.map(&cells, |c| safety_check(c, stage));
        log.report.passes += 1;
        log.report.examined += cells.len();
        for (mut cell, outcome) in cells.into_iter().zip(outcomes) {
            log.report.simulations += outcome.simulations;
            match outcome.decision {
                Decision::Safe(w) => {
                    if let Some(w) = w {
                        log.witnesses.push((cell.id, w));
                    }
                    cell.label = Label::Safe;
                    cell.stage = stage.index;
                    log.report.safe += 1;
                    partition.safe.push(cell);
                }
                Decision::Unsafe | Decision::Floor => {
                    if outcome.decision == Decision::Floor {
                        log.report.floor += 1;
                    }
                    cell.label = Label::Unsafe;
                    cell.stage = stage.index;
                    log.report.unsafe_cells += 1;
                    partition.unsafe_cells.push(cell);
                }
                Decision::Split => {
                    log.report.split += 1;
                    for child in partition.split(&cell) {
                        log.lineage.push((cell.id, child.id));
                        partition.pending.push(child);
                    }
                }
            }
        }
    }
    partition.safe.sort_by_key(|c| c.id);
    partition.unsafe_cells.sort_by_key(|c| c.id);
    log
}

/// Outcome of the recurrence stage.
#[derive(Clone, Debug, Default)]
pub struct FixedPoint {
    pub iterations: usize,
    /// The cap was reached while cells were still changing.
    pub capped: bool,
    pub report: StageReport,
    /// Witnesses from the final iteration, keyed by cell id.
    pub witnesses: HashMap<u64, Witness>,
    pub parent: HashMap<u64, u64>,
}

/// Repeats the recurrence pass with `h` rebuilt from the current safe cells until a pass
/// neither splits nor relabels anything. Hitting the cap relabels every safe cell unsafe.
pub fn stage3_fixed_point(
    partition: &mut Partition,
    field: &dyn VectorField,
    cfg: &VerifierConfig,
) -> Result<FixedPoint, VerifierError> {
    stage3_in(&Pool::new(cfg.workers), partition, field, cfg)
}

fn stage3_in(
    pool: &Pool,
    partition: &mut Partition,
    field: &dyn VectorField,
    cfg: &VerifierConfig,
) -> Result<FixedPoint, VerifierError> {
    let domain = partition.domain.clone();
    let mut fp = FixedPoint::default();
    fp.report.stage = 3;
    while !partition.safe.is_empty() {
        fp.iterations += 1;
        let snapshot = std::mem::take(&mut partition.safe);
        let stage = Stage::recurrence(&domain, field, cfg, &snapshot, &partition.unsafe_cells)?;
        partition.pending = snapshot;
        let log = verify_cells_in(pool, partition, &stage);
        fp.report.absorb(&log.report);
        fp.witnesses = log.witnesses.into_iter().collect();
        fp.parent.extend(log.lineage.into_iter().map(|(p, c)| (c, p)));
        if log.report.split == 0 && log.report.unsafe_cells == 0 {
            break;
        }
        if fp.iterations >= cfg.max_stage3_iters {
            fp.capped = true;
            for mut cell in std::mem::take(&mut partition.safe) {
                cell.label = Label::Unsafe;
                cell.stage = 3;
                fp.report.relabeled += 1;
                partition.unsafe_cells.push(cell);
            }
            partition.unsafe_cells.sort_by_key(|c| c.id);
            fp.witnesses.clear();
            break;
        }
    }
    fp.report.iterations = fp.iterations;
    Ok(fp)
}

/// Runs all three stages on `domain`, starting from a tiling with the configured initial radius.
pub fn verify_region(domain: &Domain, field: &dyn VectorField, cfg: &VerifierConfig) -> Result<Verification, VerifierError> {
    let domain = domain.clone().validated()?;
    cfg.validate(&domain, field)?;
    let pool = Pool::new(cfg.workers);
    let mut partition = Partition::tile(domain.clone(), cfg.initial_radius(&domain));
    let mut reports = Vec::with_capacity(3);
    let finish = |mut r: StageReport, p: &Partition, clock: Stopwatch| {
        r.safe_volume = p.safe_volume();
        r.unsafe_volume = p.unsafe_volume();
        r.wall_seconds = clock.seconds();
        r.workers = pool.workers;
        r
    };

    let clock = Stopwatch::start();
    let stage1 = Stage::analytic(&domain, field, cfg, &cfg.unsafe_set);
    let log = verify_cells_in(&pool, &mut partition, &stage1);
    reports.push(finish(log.report, &partition, clock));

    if partition.unsafe_cells.is_empty() {
        for stage in [2, 3] {
            reports.push(finish(StageReport { stage, ..Default::default() }, &partition, Stopwatch::start()));
        }
        return Ok(Verification { partition, reports, certificates: Vec::new() });
    }

    let clock = Stopwatch::start();
    let reference = partition.unsafe_cells.clone();
    partition.pending = std::mem::take(&mut partition.safe);
    let stage2 = Stage::reach(&domain, field, cfg, &reference, &partition.pending)?;
    let log = verify_cells_in(&pool, &mut partition, &stage2);
    let reach_witness: HashMap<u64, Witness> = log.witnesses.into_iter().collect();
    reports.push(finish(log.report, &partition, clock));

    let clock = Stopwatch::start();
    let fp = stage3_in(&pool, &mut partition, field, cfg)?;
    reports.push(finish(fp.report.clone(), &partition, clock));

    let mut certificates = Vec::new();
    for cell in &partition.safe {
        let mut source = cell.id;
        while !reach_witness.contains_key(&source) {
            match fp.parent.get(&source) {
                Some(p) => source = *p,
                None => break,
            }
        }
        if let Some(w) = reach_witness.get(&source) {
            certificates.push(Certificate::from_witness(cell.id, 2, source, w));
        }
        if let Some(w) = fp.witnesses.get(&cell.id) {
            certificates.push(Certificate::from_witness(cell.id, 3, cell.id, w));
        }
    }
    Ok(Verification { partition, reports, certificates })
}
