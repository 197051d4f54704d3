use crate::conditions::{InsideMonitor, NonrecurrentMonitor, OutsideMonitor, RecurrentMonitor, Schedule, Verdict};
use crate::dynamics::{simulate, ControlSampler, ControlSignal, SimOutcome, TimeGrid, VectorField};
use crate::geometry::{Cell, Domain, UnionDistance, UnsafeSet};

use crate::runtime::cell_seed;
use super::{VerifierConfig, VerifierError};

/// Relative inflation of `M` in the a-priori reachability bounds, covering RK4 stage
/// points that fall slightly outside the domain.
const SPEED_MARGIN: f64 = 1.01;
const BOUND_SLACK: f64 = 1e-9;

/// The reference geometry and conditions of one verification stage.
pub struct Stage<'a> {
    pub index: u8,
    domain: &'a Domain,
    field: &'a dyn VectorField,
    cfg: &'a VerifierConfig,
    kind: StageKind<'a>,
}

enum StageKind<'a> {
    /// `τ = 0` against the analytic unsafe set.
    Analytic(&'a UnsafeSet),
    /// Trajectory conditions against a fixed unsafe reference union.
    Reach { schedule: Schedule, reference: UnionDistance, depth_cap: f64 },
    /// Recurrence conditions for `h = −sd(·, S)`.
    Recurrence { schedule: Schedule, safe: UnionDistance, depth_cap: f64 },
}

impl<'a> Stage<'a> {
    pub fn analytic(domain: &'a Domain, field: &'a dyn VectorField, cfg: &'a VerifierConfig, set: &'a UnsafeSet) -> Self {
        Stage { index: 1, domain, field, cfg, kind: StageKind::Analytic(set) }
    }

    /// `unsafe_cells` is the reference set; `others` must hold the rest of the tiling.
    pub fn reach(
        domain: &'a Domain,
        field: &'a dyn VectorField,
        cfg: &'a VerifierConfig,
        unsafe_cells: &[Cell],
        others: &[Cell],
    ) -> Result<Self, VerifierError> {
        let schedule = Schedule::new(&cfg.params)?;
        let reference = UnionDistance::new(domain, unsafe_cells, others, cfg.boundary);
        let depth_cap = depth_cap(&reference, unsafe_cells, domain);
        Ok(Stage { index: 2, domain, field, cfg, kind: StageKind::Reach { schedule, reference, depth_cap } })
    }

    /// `safe_cells` is the snapshot `S`; `others` must hold the rest of the tiling.
    pub fn recurrence(
        domain: &'a Domain,
        field: &'a dyn VectorField,
        cfg: &'a VerifierConfig,
        safe_cells: &[Cell],
        others: &[Cell],
    ) -> Result<Self, VerifierError> {
        let schedule = Schedule::new(&cfg.params)?;
        let safe = UnionDistance::new(domain, safe_cells, others, cfg.boundary);
        let depth_cap = depth_cap(&safe, safe_cells, domain);
        Ok(Stage { index: 3, domain, field, cfg, kind: StageKind::Recurrence { schedule, safe, depth_cap } })
    }

    pub fn domain(&self) -> &Domain {
        self.domain
    }

    /// The stage's scalar along trajectories: `sd` to the unsafe reference, or `h`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            StageKind::Analytic(set) => set.signed_distance(x, self.domain),
            StageKind::Reach { reference, .. } => reference.signed_distance(x),
            StageKind::Recurrence { safe, .. } => -safe.signed_distance(x),
        }
    }

    fn grid(&self) -> TimeGrid {
        TimeGrid::with_steps(self.cfg.params.tau, (self.cfg.params.tau / self.cfg.params.dt).round() as usize)
    }

    fn sampler(&self, cell_id: u64) -> (ControlSampler, u64) {
        let seed = cell_seed(self.cfg.seed, cell_id, self.index);
        let p = &self.cfg.params;
        (ControlSampler::new(self.field.controls(), self.cfg.n_s, self.cfg.n_seg, p.tau, seed), seed)
    }
}

/// Largest depth any point of the union can have: the depth of a member center plus its radius.
fn depth_cap(union: &UnionDistance, members: &[Cell], domain: &Domain) -> f64 {
    members
        .iter()
        .map(|c| {
            let (x, r) = c.representative(domain);
            -union.signed_distance(&x) + r
        })
        .fold(0.0, f64::max)
}

/// Control that passed a cell's safe-side condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub seed: u64,
    pub index: usize,
    pub signal: ControlSignal,
    pub point: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    /// Safe, with the witness control when the stage samples trajectories.
    Safe(Option<Witness>),
    Unsafe,
    Split,
    /// Undecided at the resolution floor, labelled unsafe.
    Floor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub decision: Decision,
    pub simulations: u64,
}

struct Tally {
    all_unsafe: bool,
    witness: Option<Witness>,
    simulations: u64,
}

fn undecided(cell: &Cell, cfg: &VerifierConfig) -> Decision {
    if cell.radius / 3.0 >= cfg.r_min {
        Decision::Split
    } else {
        Decision::Floor
    }
}

/// Decides one pending cell: unsafe if every sampled control meets the unsafe condition,
/// else safe if some control meets the safe condition, else split (or the floor label).
pub fn safety_check(cell: &Cell, stage: &Stage<'_>) -> CheckOutcome {
    let (x, r) = cell.representative(stage.domain);
    let tally = match &stage.kind {
        StageKind::Analytic(set) => {
            let sd = set.signed_distance(&x, stage.domain);
            let decision = if sd < -r {
                Decision::Unsafe
            } else if sd > r {
                Decision::Safe(None)
            } else {
                undecided(cell, stage.cfg)
            };
            return CheckOutcome { decision, simulations: 0 };
        }
        StageKind::Reach { schedule, reference, depth_cap } => reach_check(cell, stage, schedule, reference, *depth_cap, &x, r),
        StageKind::Recurrence { schedule, safe, depth_cap } => recurrence_check(cell, stage, schedule, safe, *depth_cap, &x, r),
    };
    let decision = if tally.all_unsafe {
        Decision::Unsafe
    } else if tally.witness.is_some() {
        Decision::Safe(tally.witness)
    } else {
        undecided(cell, stage.cfg)
    };
    CheckOutcome { decision, simulations: tally.simulations }
}

/// Runs both monitors of one sample until each has a verdict. `safe_cut`/`unsafe_cut`
/// are the last nodes at which each side can still pass; beyond them it fails.
#[allow(clippy::too_many_arguments)]
fn run_sample(
    stage: &Stage<'_>,
    grid: &TimeGrid,
    x: &[f64],
    signal: &ControlSignal,
    mut unsafe_side: Option<&mut dyn FnMut(usize, f64) -> Verdict>,
    mut safe_side: Option<&mut dyn FnMut(usize, f64) -> Verdict>,
) -> (Verdict, Verdict) {
    let mut u = if unsafe_side.is_some() { Verdict::Pending } else { Verdict::Fail };
    let mut s = if safe_side.is_some() { Verdict::Pending } else { Verdict::Fail };
    let outcome = simulate(stage.field, x, signal, grid, Some(stage.domain), |k, xk| {
        let v = stage.value(xk);
        if u == Verdict::Pending {
            if let Some(f) = unsafe_side.as_mut() {
                u = f(k, v);
            }
        }
        if s == Verdict::Pending {
            if let Some(f) = safe_side.as_mut() {
                s = f(k, v);
            }
        }
        u == Verdict::Pending || s == Verdict::Pending
    });
    match outcome {
        Ok(SimOutcome::Escaped(_)) | Err(_) => {
            if u == Verdict::Pending {
                u = Verdict::Fail;
            }
            if s == Verdict::Pending {
                s = Verdict::Fail;
            }
        }
        Ok(_) => {}
    }
    (u, s)
}

fn reach_check(
    cell: &Cell,
    stage: &Stage<'_>,
    schedule: &Schedule,
    reference: &UnionDistance,
    depth_cap: f64,
    x: &[f64],
    r: f64,
) -> Tally {
    let p = &stage.cfg.params;
    let outside = OutsideMonitor::new(schedule, r);
    let inside = InsideMonitor::new(schedule, r);
    let sd0 = reference.signed_distance(x);
    let last = schedule.last();
    let drift = |k: usize| SPEED_MARGIN * p.velocity * schedule.times[k] + BOUND_SLACK;
    // safe side: sd_k <= sd0 + M t_k must clear every threshold
    let safe_possible = (0..=last).all(|k| sd0 + drift(k) > outside.threshold(k));
    // unsafe side: some k >= 1 with sd0 - M t_k below the threshold and within the reference depth
    let unsafe_cut = (1..=last).rev().find(|&k| {
        let thr = inside.threshold(k);
        thr > -depth_cap && sd0 - drift(k) < thr
    });
    let mut tally = Tally { all_unsafe: unsafe_cut.is_some() && !reference.is_empty(), witness: None, simulations: 0 };
    if !tally.all_unsafe && !safe_possible {
        return tally;
    }
    let grid = stage.grid();
    let (sampler, seed) = stage.sampler(cell.id);
    for (i, signal) in sampler.enumerate() {
        let need_unsafe = tally.all_unsafe;
        let need_safe = safe_possible && tally.witness.is_none();
        if !need_unsafe && !need_safe {
            break;
        }
        let cut = unsafe_cut.unwrap_or(0);
        let mut unsafe_fn = |k: usize, v: f64| match inside.push(k, v) {
            Verdict::Pending if k >= cut => Verdict::Fail,
            verdict => verdict,
        };
        let mut safe_fn = |k: usize, v: f64| outside.push(k, v);
        let (u, s) = run_sample(
            stage,
            &grid,
            x,
            &signal,
            need_unsafe.then_some(&mut unsafe_fn as &mut dyn FnMut(usize, f64) -> Verdict),
            need_safe.then_some(&mut safe_fn as &mut dyn FnMut(usize, f64) -> Verdict),
        );
        tally.simulations += 1;
        if need_unsafe && u != Verdict::Pass {
            tally.all_unsafe = false;
        }
        if need_safe && s == Verdict::Pass {
            tally.witness = Some(Witness { seed, index: i, signal, point: x.to_vec(), radius: r });
            tally.all_unsafe = false;
        }
    }
    tally
}

fn recurrence_check(
    cell: &Cell,
    stage: &Stage<'_>,
    schedule: &Schedule,
    safe: &UnionDistance,
    depth_cap: f64,
    x: &[f64],
    r: f64,
) -> Tally {
    let p = &stage.cfg.params;
    let h_x = -safe.signed_distance(x);
    let recurrent = RecurrentMonitor::new(schedule, h_x, r);
    let nonrecurrent = NonrecurrentMonitor::new(schedule, h_x, r);
    let last = schedule.last();
    // node 0 of every trajectory is h(x) itself
    let unsafe_possible = nonrecurrent.push(0, h_x) != Verdict::Fail;
    let drift = |k: usize| SPEED_MARGIN * p.velocity * schedule.times[k] + BOUND_SLACK;
    let safe_cut = (1..=last).rev().find(|&k| {
        let h_max = (h_x + drift(k)).min(depth_cap);
        let lower = h_max - schedule.deviation(r, k) - p.eps_int;
        schedule.weighted(lower, k) >= recurrent.target()
    });
    let mut tally = Tally { all_unsafe: unsafe_possible, witness: None, simulations: 0 };
    if !unsafe_possible && safe_cut.is_none() {
        return tally;
    }
    let grid = stage.grid();
    let (sampler, seed) = stage.sampler(cell.id);
    for (i, signal) in sampler.enumerate() {
        let need_unsafe = tally.all_unsafe;
        let need_safe = safe_cut.is_some() && tally.witness.is_none();
        if !need_unsafe && !need_safe {
            break;
        }
        let cut = safe_cut.unwrap_or(0);
        let mut unsafe_fn = |k: usize, v: f64| nonrecurrent.push(k, v);
        let mut safe_fn = |k: usize, v: f64| match recurrent.push(k, v) {
            Verdict::Pending if k >= cut => Verdict::Fail,
            verdict => verdict,
        };
        let (u, s) = run_sample(
            stage,
            &grid,
            x,
            &signal,
            need_unsafe.then_some(&mut unsafe_fn as &mut dyn FnMut(usize, f64) -> Verdict),
            need_safe.then_some(&mut safe_fn as &mut dyn FnMut(usize, f64) -> Verdict),
        );
        tally.simulations += 1;
        if need_unsafe && u != Verdict::Pass {
            tally.all_unsafe = false;
        }
        if need_safe && s == Verdict::Pass {
            tally.witness = Some(Witness { seed, index: i, signal, point: x.to_vec(), radius: r });
            tally.all_unsafe = false;
        }
    }
    tally
}
