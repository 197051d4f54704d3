use std::f64::consts::PI;

use rcbf::dynamics::{dubins3d, single_integrator};
use rcbf::geometry::{Cell, Domain, Label, Partition, UnsafeSet};
use rcbf::oracle::{brute_force_brt, containment_fraction, volume_gap, GridValueField, OracleConfig, OracleError};

fn line() -> Domain {
    Domain::boxed(vec![-1.0], vec![1.0]).unwrap()
}

fn interval() -> UnsafeSet {
    UnsafeSet::Box { lower: vec![-0.2], upper: vec![0.2] }
}

fn dubins_domain() -> Domain {
    Domain::new(vec![-10.0, -10.0, 0.0], vec![10.0, 10.0, 2.0 * PI], vec![false, false, true]).unwrap()
}

fn cylinder() -> UnsafeSet {
    UnsafeSet::Cylinder { axis: 2, radius: 1.0, center: vec![0.0, 0.0, 0.0] }
}

fn labelled(domain: &Domain, cells: Vec<(f64, f64, Label)>) -> Partition {
    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(i, (c, r, label))| Cell { label, ..Cell::new(i as u64, vec![c], r) })
        .collect();
    Partition::from_cells(domain.clone(), cells)
}

#[test]
fn zero_horizon_marks_the_set_on_the_grid() {
    let d = dubins_domain();
    let g = brute_force_brt(&dubins3d(5.0), &cylinder(), &d, &OracleConfig::new(vec![21, 21, 8], 0.0, 0.01)).unwrap();
    for (i, v) in g.values.iter().enumerate() {
        let x = g.header.node(i);
        let r = x[0].hypot(x[1]);
        if (r - 1.0).abs() > 1e-9 {
            assert_eq!(*v <= 0.0, r < 1.0, "{x:?}");
        }
    }
}

#[test]
fn integrator_tube_within_one_spacing() {
    for n in [101, 401] {
        let g = brute_force_brt(&single_integrator(1), &interval(), &line(), &OracleConfig::new(vec![n], 1.0, 0.01)).unwrap();
        let h = g.header.spacing(0);
        let tube: Vec<f64> = (0..n).filter(|i| g.values[*i] <= 0.0).map(|i| g.header.node(i)[0]).collect();
        let lo = tube.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = tube.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + 0.2).abs() <= h + 1e-12 && (hi - 0.2).abs() <= h + 1e-12, "{n}: [{lo}, {hi}]");
        assert!((g.tube_volume() - 0.4).abs() <= 2.0 * h, "{n}: {}", g.tube_volume());
    }
}

#[test]
fn refinement_converges_on_the_interval() {
    let set = UnsafeSet::Box { lower: vec![-0.23], upper: vec![0.23] };
    let vol = |n| {
        brute_force_brt(&single_integrator(1), &set, &line(), &OracleConfig::new(vec![n], 0.5, 0.01))
            .unwrap()
            .tube_volume()
    };
    let (coarse, fine) = (vol(21), vol(801));
    assert!((fine - 0.46).abs() < (coarse - 0.46).abs(), "{coarse} {fine}");
    assert!((fine - 0.46).abs() < 5e-3, "{fine}");
}

#[test]
fn longer_horizons_only_grow_the_tube() {
    let d = dubins_domain();
    let f = dubins3d(5.0);
    let run = |tau| brute_force_brt(&f, &cylinder(), &d, &OracleConfig::new(vec![25, 25, 16], tau, 0.05)).unwrap();
    let (short, long) = (run(0.25), run(0.5));
    for (a, b) in long.values.iter().zip(&short.values) {
        assert!(a <= b);
    }
    assert!(long.tube_nodes() >= short.tube_nodes());
}

#[test]
fn bytes_round_trip_and_reject_foreign_headers() {
    let g = brute_force_brt(&single_integrator(1), &interval(), &line(), &OracleConfig::new(vec![51], 0.3, 0.01)).unwrap();
    let back = GridValueField::from_bytes(g.header.clone(), &g.to_bytes()).unwrap();
    assert_eq!(back, g);
    let mut other = g.header.clone();
    other.counts[0] = 52;
    assert!(matches!(GridValueField::from_bytes(other, &g.to_bytes()), Err(OracleError::Format(_))));
    assert!(GridValueField::from_bytes(g.header.clone(), &g.to_bytes()[..16]).is_err());
}

#[test]
fn containment_extremes() {
    let d = line();
    let g = brute_force_brt(&single_integrator(1), &interval(), &d, &OracleConfig::new(vec![201], 1.0, 0.01)).unwrap();
    let all = labelled(&d, vec![(0.0, 1.0, Label::Unsafe)]);
    let none = labelled(&d, vec![(0.0, 1.0, Label::Safe)]);
    assert_eq!(containment_fraction(&all, &g).unwrap(), 1.0);
    assert_eq!(containment_fraction(&none, &g).unwrap(), 0.0);
    let half = labelled(&d, vec![(-0.5, 0.5, Label::Safe), (0.5, 0.5, Label::Unsafe)]);
    let c = containment_fraction(&half, &g).unwrap();
    assert!(c > 0.45 && c < 0.6, "{c}");
}

#[test]
fn volume_gap_against_the_grid_set() {
    let d = line();
    let g = brute_force_brt(&single_integrator(1), &interval(), &d, &OracleConfig::new(vec![201], 0.0, 0.01)).unwrap();
    // 41 nodes of weight 0.01
    let v = g.tube_volume();
    assert!((v - 0.41).abs() < 1e-12, "{v}");
    let exact = labelled(&d, vec![(-0.6025, 0.3975, Label::Safe), (0.0, 0.205, Label::Unsafe), (0.6025, 0.3975, Label::Safe)]);
    assert!(volume_gap(&exact, &g).unwrap().abs() < 1e-9);
    let double = labelled(&d, vec![(-0.705, 0.295, Label::Safe), (0.0, 0.41, Label::Unsafe), (0.705, 0.295, Label::Safe)]);
    assert!((volume_gap(&double, &g).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn empty_tube_is_an_error() {
    let d = line();
    let far = UnsafeSet::Box { lower: vec![5.0], upper: vec![6.0] };
    let g = brute_force_brt(&single_integrator(1), &far, &d, &OracleConfig::new(vec![51], 0.0, 0.01)).unwrap();
    let p = labelled(&d, vec![(0.0, 1.0, Label::Unsafe)]);
    assert_eq!(containment_fraction(&p, &g), Err(OracleError::EmptyTube));
    assert_eq!(volume_gap(&p, &g), Err(OracleError::ZeroVolume));
}

#[test]
fn bad_configs_are_rejected() {
    let f = single_integrator(1);
    assert!(matches!(
        brute_force_brt(&f, &interval(), &line(), &OracleConfig::new(vec![51], 1.0, 0.03)),
        Err(OracleError::Config(_))
    ));
    assert!(matches!(
        brute_force_brt(&f, &interval(), &line(), &OracleConfig::new(vec![51, 51], 1.0, 0.01)),
        Err(OracleError::Config(_))
    ));
    assert!(matches!(
        brute_force_brt(&f, &interval(), &line(), &OracleConfig::new(vec![1], 1.0, 0.01)),
        Err(OracleError::Config(_))
    ));
}

#[test]
fn dubins_tube_contains_the_cylinder_and_more() {
    let d = dubins_domain();
    let g = brute_force_brt(&dubins3d(5.0), &cylinder(), &d, &OracleConfig::new(vec![45, 45, 45], 1.0, 0.05)).unwrap();
    let mut beyond = 0;
    for (i, v) in g.values.iter().enumerate() {
        let x = g.header.node(i);
        let r = x[0].hypot(x[1]);
        if r < 1.0 {
            assert!(*v <= 0.0, "{x:?}");
        } else if *v <= 0.0 {
            beyond += 1;
        }
    }
    assert!(beyond > 0);
    let heading_in = g.sample(&mut [1.6, 0.0, PI], rcbf::oracle::OutsidePolicy::Escape);
    let heading_out = g.sample(&mut [-1.6, 0.0, PI], rcbf::oracle::OutsidePolicy::Escape);
    assert!(heading_in < heading_out, "{heading_in} {heading_out}");
}
