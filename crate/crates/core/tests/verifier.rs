use rcbf::conditions::{check_outside_brt, check_robust_recurrent, RcbfParams};
use rcbf::dynamics::{integrate, single_integrator, VectorField};
use rcbf::geometry::{BoundaryPolicy, Cell, Domain, Label, Partition, UnionDistance, UnsafeSet};
use rcbf::verifier::{
    safety_check, stage3_fixed_point, verify_cells, verify_region, Decision, Stage, Verification, VerifierConfig,
};

fn line() -> Domain {
    Domain::boxed(vec![-1.0], vec![1.0]).unwrap()
}

fn interval() -> UnsafeSet {
    UnsafeSet::Box { lower: vec![-0.2], upper: vec![0.2] }
}

fn cfg(set: UnsafeSet, alpha: f64, r_min: f64) -> VerifierConfig {
    let params = RcbfParams::with_defaults(1.0, alpha, alpha, 0.0, 1.0);
    VerifierConfig { n_s: 20, workers: 2, ..VerifierConfig::new(set, params, r_min) }
}

fn extent(cells: &[Cell]) -> (f64, f64) {
    let lo = cells.iter().map(|c| c.center[0] - c.radius).fold(f64::INFINITY, f64::min);
    let hi = cells.iter().map(|c| c.center[0] + c.radius).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn integrity(v: &Verification) {
    let p = &v.partition;
    assert!(p.pending.is_empty());
    assert!(p.safe.iter().all(|c| c.label == Label::Safe));
    assert!(p.unsafe_cells.iter().all(|c| c.label == Label::Unsafe));
    assert!((p.safe_volume() + p.unsafe_volume() - p.domain.volume()).abs() < 1e-9 * p.domain.volume());
    let last = v.reports.last().unwrap();
    assert!((last.safe_volume - p.safe_volume()).abs() < 1e-12);
}

#[test]
fn integrator_interval_within_two_resolution_steps() {
    let v = verify_region(&line(), &single_integrator(1), &cfg(interval(), 1.0, 0.01)).unwrap();
    integrity(&v);
    let (lo, hi) = extent(&v.partition.unsafe_cells);
    assert!(lo <= -0.2 && hi >= 0.2);
    assert!(lo >= -0.22 && hi <= 0.22, "unsafe extent [{lo}, {hi}]");
}

#[test]
fn integrator_interval_within_criterion_band() {
    let v = verify_region(&line(), &single_integrator(1), &cfg(interval(), 1.0, 0.01)).unwrap();
    let (lo, hi) = extent(&v.partition.unsafe_cells);
    assert!(lo <= -0.2 && hi >= 0.2);
    assert!(lo >= -0.24 && hi <= 0.24, "unsafe extent [{lo}, {hi}]");
    // the unsafe region is one interval
    let covered: f64 = v.partition.unsafe_volume();
    assert!((covered - (hi - lo)).abs() < 1e-12);
}

#[test]
fn empty_set_leaves_later_stages_vacuous() {
    let v = verify_region(&line(), &single_integrator(1), &cfg(UnsafeSet::Empty, 1.0, 0.01)).unwrap();
    integrity(&v);
    assert!(v.partition.unsafe_cells.is_empty());
    assert_eq!(v.reports[1].examined + v.reports[2].examined, 0);
}

#[test]
fn stage_one_over_approximates_the_set() {
    let d = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let set = UnsafeSet::Ball { center: vec![0.1, -0.2], radius: 0.35 };
    let v = verify_region(&d, &single_integrator(2), &cfg(set.clone(), 1.0, 0.03)).unwrap();
    integrity(&v);
    for i in 0..60 {
        for j in 0..60 {
            let x = [-1.0 + (i as f64 + 0.5) / 30.0, -1.0 + (j as f64 + 0.5) / 30.0];
            if set.contains(&x, &d) {
                let inside = v.partition.unsafe_cells.iter().any(|c| (0..2).all(|a| (x[a] - c.center[a]).abs() <= c.radius));
                assert!(inside, "{x:?} is in the set but not in an unsafe cell");
            }
        }
    }
}

#[test]
fn far_cell_is_safe_in_one_pass() {
    let d = Domain::boxed(vec![-10.0], vec![10.0]).unwrap();
    let c = cfg(UnsafeSet::Box { lower: vec![-10.0], upper: vec![-9.0] }, 1.0, 0.1);
    let mut p = Partition::from_cells(d.clone(), vec![Cell::new(0, vec![5.0], 2.0)]);
    let f = single_integrator(1);
    let stage = Stage::analytic(&d, &f, &c, &c.unsafe_set);
    let log = verify_cells(&mut p, &stage, 1);
    assert_eq!((log.report.passes, p.safe.len(), p.unsafe_cells.len()), (1, 1, 0));
}

#[test]
fn straddling_cell_splits_to_the_floor() {
    let d = line();
    let c = cfg(interval(), 1.0, 0.05);
    let f = single_integrator(1);
    let mut p = Partition::from_cells(d.clone(), vec![Cell::new(0, vec![0.2], 0.3)]);
    let stage = Stage::analytic(&d, &f, &c, &c.unsafe_set);
    let log = verify_cells(&mut p, &stage, 1);
    assert!(log.report.split >= 1 && log.report.floor >= 1);
    let at_floor = p.unsafe_cells.iter().filter(|c| c.radius / 3.0 < 0.05).count();
    assert!(at_floor >= 1);
    assert!(p.unsafe_cells.iter().any(|c| (c.center[0] - 0.2).abs() <= c.radius));
}

#[test]
fn safety_check_examples() {
    let d = Domain::boxed(vec![-5.0], vec![5.0]).unwrap();
    let c = cfg(interval(), 1.0, 0.1);
    let f = single_integrator(1);
    let analytic = Stage::analytic(&d, &f, &c, &c.unsafe_set);
    assert_eq!(safety_check(&Cell::new(0, vec![0.0], 0.1), &analytic).decision, Decision::Unsafe);
    assert_eq!(safety_check(&Cell::new(1, vec![0.2], 0.1), &analytic).decision, Decision::Floor);

    // far from the unsafe cells the zero control is a witness
    let unsafe_cells = vec![Cell::new(2, vec![0.0], 0.3)];
    let others = vec![Cell::new(3, vec![-2.65], 2.35), Cell::new(4, vec![2.65], 2.35)];
    let reach = Stage::reach(&d, &f, &c, &unsafe_cells, &others).unwrap();
    match safety_check(&Cell::new(5, vec![3.0], 0.1), &reach).decision {
        Decision::Safe(Some(w)) => assert_eq!(w.signal.values.len(), c.n_seg),
        other => panic!("{other:?}"),
    }
}

/// One-cell-at-a-time reference for the pass loop.
fn sequential(mut pending: Vec<Cell>, domain: &Domain, stage: &Stage<'_>) -> Vec<Cell> {
    let mut p = Partition::from_cells(domain.clone(), pending.clone());
    p.pending.clear();
    let mut done = Vec::new();
    while !pending.is_empty() {
        pending.sort_by_key(|c| c.id);
        let mut next = Vec::new();
        for mut cell in pending {
            match safety_check(&cell, stage).decision {
                Decision::Safe(_) => {
                    cell.label = Label::Safe;
                    done.push(cell);
                }
                Decision::Unsafe | Decision::Floor => {
                    cell.label = Label::Unsafe;
                    done.push(cell);
                }
                Decision::Split => next.extend(p.split(&cell)),
            }
        }
        pending = next;
    }
    done.sort_by_key(|c| c.id);
    done
}

fn key<'a>(cells: impl Iterator<Item = &'a Cell>) -> Vec<(u64, Vec<f64>, f64, Label)> {
    cells.map(|c| (c.id, c.center.clone(), c.radius, c.label)).collect()
}

#[test]
fn parallel_pass_loop_matches_sequential_reference() {
    let d = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let set = UnsafeSet::Union {
        members: vec![
            UnsafeSet::Ball { center: vec![0.4, 0.3], radius: 0.25 },
            UnsafeSet::Box { lower: vec![-0.8, -0.7], upper: vec![-0.3, -0.5] },
        ],
    };
    let c = cfg(set, 1.0, 0.02);
    let f = single_integrator(2);
    let tiling = Partition::tile(d.clone(), 0.5);

    let stage1 = Stage::analytic(&d, &f, &c, &c.unsafe_set);
    let reference = sequential(tiling.pending.clone(), &d, &stage1);
    let mut p = tiling.clone();
    verify_cells(&mut p, &stage1, 4);
    assert_eq!(key(p.cells().into_iter()), key(reference.iter()));

    let unsafe_cells = p.unsafe_cells.clone();
    let mut p2 = Partition::from_cells(d.clone(), p.cells().into_iter().cloned().collect());
    p2.pending = std::mem::take(&mut p2.safe);
    let stage2 = Stage::reach(&d, &f, &c, &unsafe_cells, &p2.pending).unwrap();
    let reference = sequential(p2.pending.clone(), &d, &stage2);
    verify_cells(&mut p2, &stage2, 4);
    let fresh = p2.cells().into_iter().filter(|c| !(c.stage == 1 && c.label == Label::Unsafe));
    assert_eq!(key(fresh), key(reference.iter()));
}

#[test]
fn worker_counts_give_identical_partitions() {
    let d = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let set = UnsafeSet::Ball { center: vec![0.0, 0.1], radius: 0.3 };
    let run = |w| {
        let c = VerifierConfig { workers: w, ..cfg(set.clone(), 1.0, 0.03) };
        verify_region(&d, &single_integrator(2), &c).unwrap()
    };
    let a = run(1);
    for w in [3, 8] {
        let b = run(w);
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.certificates, b.certificates);
    }
}

#[test]
fn certificates_replay_their_conditions() {
    let d = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let set = UnsafeSet::Ball { center: vec![0.2, 0.0], radius: 0.3 };
    let c = cfg(set, 1.0, 0.03);
    let f = single_integrator(2);
    let v = verify_region(&d, &f, &c).unwrap();
    assert!(!v.partition.safe.is_empty());
    let cells = v.partition.cells();
    let stage1_unsafe: Vec<Cell> = cells.iter().filter(|c| c.label == Label::Unsafe && c.stage == 1).map(|c| (*c).clone()).collect();
    let rest: Vec<Cell> = cells.iter().filter(|c| !(c.label == Label::Unsafe && c.stage == 1)).map(|c| (*c).clone()).collect();
    let reference = UnionDistance::new(&d, &stage1_unsafe, &rest, BoundaryPolicy::Unsafe);
    let safe = UnionDistance::new(&d, &v.partition.safe, &v.partition.unsafe_cells, BoundaryPolicy::Unsafe);
    let grid = c.params.grid().unwrap();
    for cert in &v.certificates {
        if cert.stage == 2 {
            let traj = integrate(&f, &cert.point, &cert.signal(), &grid, Some(&d)).unwrap();
            assert!(!traj.escaped);
            let sd: Vec<f64> = traj.states.iter().map(|x| reference.signed_distance(x)).collect();
            assert!(check_outside_brt(&sd, cert.radius, &c.params).unwrap(), "cell {}", cert.cell_id);
        } else {
            // a recurrence witness may leave the domain after the node where it passes
            let traj = integrate(&f, &cert.point, &cert.signal(), &grid, None).unwrap();
            let h: Vec<f64> = traj.states.iter().map(|x| -safe.signed_distance(x)).collect();
            let hx = -safe.signed_distance(&cert.point);
            assert!(check_robust_recurrent(&h, hx, cert.radius, &c.params).unwrap(), "cell {}", cert.cell_id);
        }
    }
}

/// Cells of radius 0.02 tiling [−1, 1]; `safe(center)` picks the tentative safe set.
fn strip(safe: impl Fn(f64) -> bool) -> Partition {
    let cells = (0..50)
        .map(|k| {
            let mut c = Cell::new(k, vec![-0.98 + 0.04 * k as f64], 0.02);
            c.label = if safe(c.center[0]) { Label::Safe } else { Label::Unsafe };
            c
        })
        .collect();
    Partition::from_cells(line(), cells)
}

/// With `τ = 0.2` no trajectory crosses between components that are farther apart than 0.2.
fn short_cfg() -> VerifierConfig {
    let params = RcbfParams::with_defaults(0.2, 1.0, 1.0, 0.0, 1.0);
    VerifierConfig { n_s: 20, workers: 2, ..VerifierConfig::new(interval(), params, 0.02) }
}

#[test]
fn stage3_keeps_a_stable_component_in_one_iteration() {
    let f = single_integrator(1);
    let c = short_cfg();
    let mut p = strip(|x| x > 0.0);
    let before = p.safe.clone();
    let fp = stage3_fixed_point(&mut p, &f, &c).unwrap();
    assert_eq!(fp.iterations, 1);
    assert_eq!(fp.report.unsafe_cells, 0);
    assert_eq!(p.safe.iter().map(|c| c.id).collect::<Vec<_>>(), before.iter().map(|c| c.id).collect::<Vec<_>>());
}

#[test]
fn stage3_drops_a_thin_component() {
    // a lone cell of half-width r has depth ≤ r everywhere, so e^{γt}(h − r) ≤ 0 < h(x) + r
    let f = single_integrator(1);
    let c = short_cfg();
    let mut p = strip(|x| x > 0.0 || (x + 0.5).abs() < 0.01);
    let wide: Vec<u64> = p.safe.iter().filter(|c| c.center[0] > 0.0).map(|c| c.id).collect();
    let fp = stage3_fixed_point(&mut p, &f, &c).unwrap();
    assert!(!fp.capped);
    assert_eq!(fp.iterations, 2);
    assert_eq!(p.safe.iter().map(|c| c.id).collect::<Vec<_>>(), wide);
}

#[test]
fn stage3_safe_volume_never_grows() {
    let d = line();
    let f = single_integrator(1);
    let c = cfg(interval(), 0.3, 0.02);
    let mut p = strip(|x| x.abs() > 0.3 || (x - 0.1).abs() < 0.05);
    let mut last = p.safe_volume();
    for _ in 0..20 {
        let snapshot = std::mem::take(&mut p.safe);
        let stage = Stage::recurrence(&d, &f, &c, &snapshot, &p.unsafe_cells).unwrap();
        p.pending = snapshot;
        let log = verify_cells(&mut p, &stage, 2);
        let vol = p.safe_volume();
        assert!(vol <= last + 1e-12);
        last = vol;
        if log.report.unsafe_cells == 0 && log.report.split == 0 {
            break;
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let f = single_integrator(1);
    assert!(verify_region(&line(), &f, &cfg(interval(), 1.0, 0.0)).is_err());
    let mut bad = cfg(interval(), 1.0, 0.01);
    bad.n_seg = 7;
    assert!(verify_region(&line(), &f, &bad).is_err());
    let wrong_dim = UnsafeSet::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0] };
    assert!(verify_region(&line(), &f, &cfg(wrong_dim, 1.0, 0.01)).is_err());
    assert_eq!(f.dim(), 1);
}
