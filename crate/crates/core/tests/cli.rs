use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rcbf::cli::{export_slice, run_compare, run_verify, CellsFile, Metrics, Overrides, SliceSpec};
use rcbf::geometry::{Label, Partition};
use serde_json::Value;

const LINE: &str = r#"{
  "system": {"name": "integrator", "params": {"dim": 1}},
  "domain": {"lower": [-1.0], "upper": [1.0], "periodic": [false]},
  "unsafe_set": {"shape": "box", "lower": [-0.2], "upper": [0.2]},
  "rcbf": {"tau": 0.5, "alpha": 1.0, "beta": 1.0, "dt": 0.005},
  "verifier": {"r_min": 0.012, "n_s": 20},
  "oracle": {"resolution": 201},
  "seed": 7
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rcbf"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> std::process::Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let keys: Vec<&String> = m.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && m.values().all(keys_sorted)
        }
        Value::Array(a) => a.iter().all(keys_sorted),
        _ => true,
    }
}

fn text_keys_in_order(text: &str) -> bool {
    // serde_json's map would reorder on parse, so check the raw order of the top-level keys
    let v: Value = serde_json::from_str(text).unwrap();
    let mut pos: Vec<usize> = v.as_object().unwrap().keys().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
    let sorted = pos.clone();
    pos.sort();
    pos == sorted
}

#[test]
fn verify_writes_three_files_with_bounded_unsafe_volume() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "line.json", LINE);
    let out = tmp.path().join("run");
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    for f in ["cells.json", "certificates.json", "reports.json"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(keys_sorted(&v) && text_keys_in_order(&text), "{f}");
        assert!(text.ends_with('\n'));
    }
    let cells: CellsFile = serde_json::from_str(&fs::read_to_string(out.join("cells.json")).unwrap()).unwrap();
    let p = Partition::from_cells(cells.config.domain.clone(), cells.cells.clone());
    let u = p.unsafe_volume();
    assert!((0.4..=0.4 + 4.0 * 0.012).contains(&u), "{u}");
    assert!(cells.cells.windows(2).all(|w| w[0].id < w[1].id));
    assert!(cells.config.assumed_defaults.iter().any(|d| d == "verifier.n_seg"));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "line.json", LINE);
    let mut cells = Vec::new();
    for w in ["1", "3"] {
        let out = tmp.path().join(format!("w{w}"));
        ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", w]);
        cells.push(fs::read(out.join("cells.json")).unwrap());
        cells.push(fs::read(out.join("certificates.json")).unwrap());
    }
    assert_eq!(cells[0], cells[2]);
    assert_eq!(cells[1], cells[3]);
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "line.json", LINE);
    let overrides = Overrides { seed: Some(99), out: Some(tmp.path().join("o")), ..Default::default() };
    let (config, _, out) = run_verify(&cfg, &overrides).unwrap();
    assert_eq!(config.verifier.seed, 99);
    let back: CellsFile = serde_json::from_str(&fs::read_to_string(out.join("cells.json")).unwrap()).unwrap();
    assert_eq!(back.config, config);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = write_config(
        tmp.path(),
        "bad.json",
        r#"{"system": {"params": {}}, "unsafe_set": {"shape": "box", "lower": [0], "upper": [1]}, "verifier": {"r_min": 0.1}}"#,
    );
    let o = run(&["verify", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    let unknown = write_config(tmp.path(), "unknown.json", &LINE.replace("\"name\": \"integrator\"", "\"name\": \"rocket\""));
    let o = run(&["verify", "--config", unknown.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--config", tmp.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!tmp.path().join("cells.json").exists());
}

#[test]
fn compare_against_the_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "line.json", LINE);
    let out = tmp.path().join("run");
    let o = out.to_str().unwrap();
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", o]);
    ok(&["oracle", "--config", cfg.to_str().unwrap(), "--out", o]);
    ok(&["compare", "--cells", out.join("cells.json").to_str().unwrap(), "--oracle", out.join("oracle.bin").to_str().unwrap(), "--out", o]);
    let text = fs::read_to_string(out.join("metrics.json")).unwrap();
    assert!(keys_sorted(&serde_json::from_str(&text).unwrap()));
    let m: Metrics = serde_json::from_str(&text).unwrap();
    assert_eq!(m.containment_fraction, Some(1.0));
    let gap = m.volume_gap.unwrap();
    assert!(gap > -0.05 && gap < 0.5, "{gap}");
    assert!(m.timings.verify_seconds.is_some() && m.timings.oracle_seconds.is_some());
    assert!((m.unsafe_volume + m.safe_volume - m.domain_volume).abs() < 1e-9);
}

#[test]
fn self_compare_has_zero_gap() {
    let tmp = tempfile::tempdir().unwrap();
    // a zero horizon makes the oracle tube the set itself and the verifier reproduces it cell for cell
    let body = LINE.replace("\"resolution\": 201", "\"resolution\": 201, \"tau\": 0.0")
        .replace("\"lower\": [-0.2], \"upper\": [0.2]", "\"lower\": [-0.205], \"upper\": [0.205]");
    let cfg = write_config(tmp.path(), "zero.json", &body);
    let out = tmp.path().join("run");
    ok(&["oracle", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(out.join("oracle.json")).unwrap()).unwrap();
    let tube = sidecar["tube_volume"].as_f64().unwrap();
    let domain = rcbf::geometry::Domain::boxed(vec![-1.0], vec![1.0]).unwrap();
    let cells = vec![
        rcbf::geometry::Cell { label: Label::Safe, ..rcbf::geometry::Cell::new(0, vec![-0.6025], 0.3975) },
        rcbf::geometry::Cell { label: Label::Unsafe, ..rcbf::geometry::Cell::new(1, vec![0.0], 0.5 * tube) },
        rcbf::geometry::Cell { label: Label::Safe, ..rcbf::geometry::Cell::new(2, vec![0.6025], 0.3975) },
    ];
    let config = serde_json::from_value(sidecar["config"].clone()).unwrap();
    let file = CellsFile { cells, config };
    let cells_path = out.join("cells.json");
    fs::write(&cells_path, serde_json::to_string(&file).unwrap()).unwrap();
    let m = run_compare(&cells_path, &out.join("oracle.json"), &out).unwrap();
    assert!(m.volume_gap.unwrap().abs() < 1e-9);
    assert_eq!(m.containment_fraction, Some(1.0));
    let _ = domain;
}

#[test]
fn compare_rejects_mismatched_domains() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "line.json", LINE);
    let wide = write_config(tmp.path(), "wide.json", &LINE.replace("[-1.0], \"upper\": [1.0]", "[-2.0], \"upper\": [2.0]"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    ok(&["oracle", "--config", wide.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    let o = run(&["compare", "--cells", a.join("cells.json").to_str().unwrap(), "--oracle", b.join("oracle.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn read_csv(path: &Path) -> Vec<(f64, f64, String)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,label"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

const PLANE: &str = r#"{
  "system": {"name": "integrator", "params": {"dim": 2}},
  "domain": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0], "periodic": [false, false]},
  "unsafe_set": {"shape": "ball", "center": [0.0, 0.0], "radius": 0.3},
  "rcbf": {"tau": 0.3, "alpha": 1.0, "beta": 1.0, "dt": 0.01},
  "verifier": {"r_min": 0.04, "n_s": 10, "n_seg": 3},
  "seed": 3
}"#;

#[test]
fn planar_slice_agrees_with_the_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "plane.json", PLANE);
    let out = tmp.path().join("run");
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let csv = out.join("plane.csv");
    ok(&["slice", "--cells", out.join("cells.json").to_str().unwrap(), "--resolution", "50", "--out", csv.to_str().unwrap()]);
    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 2500);
    let cells: CellsFile = serde_json::from_str(&fs::read_to_string(out.join("cells.json")).unwrap()).unwrap();
    let locate = |x: f64, y: f64| -> Vec<Label> {
        cells
            .cells
            .iter()
            .filter(|c| (x - c.center[0]).abs() <= c.radius + 1e-12 && (y - c.center[1]).abs() <= c.radius + 1e-12)
            .map(|c| c.label)
            .collect()
    };
    let mut checked = 0;
    for (x, y, label) in rows.iter().step_by(2).take(1000) {
        let found = locate(*x, *y);
        assert!(found.iter().any(|l| l.as_str() == label), "({x}, {y}) {label} {found:?}");
        if x.hypot(*y) < 0.3 {
            assert_eq!(label, "unsafe");
        }
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn safe_everywhere_slice_is_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let body = PLANE.replace("\"center\": [0.0, 0.0], \"radius\": 0.3", "\"center\": [5.0, 5.0], \"radius\": 0.3");
    let cfg = write_config(tmp.path(), "far.json", &body);
    let out = tmp.path().join("run");
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    ok(&["slice", "--cells", out.join("cells.json").to_str().unwrap(), "--resolution", "20", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out.join("slice.csv"));
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r.2 == "safe"));
}

#[test]
fn dubins_slice_has_an_unsafe_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "system": {"name": "dubins3d"},
  "unsafe_set": {"shape": "cylinder", "axis": 2, "radius": 1.0, "center": [0.0, 0.0, 0.0]},
  "rcbf": {"tau": 0.2, "dt": 0.01},
  "verifier": {"r_min": 1.111, "n_s": 30},
  "seed": 1
}"#;
    let cfg = write_config(tmp.path(), "dubins.json", body);
    let out = tmp.path().join("run");
    ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--stage3-iters", "3"]);
    let csv = out.join("theta.csv");
    ok(&[
        "slice",
        "--cells",
        out.join("cells.json").to_str().unwrap(),
        "--axis",
        "2",
        "--value",
        "1.0",
        "--resolution",
        "80",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 6400);
    for (x, y, label) in &rows {
        if x.hypot(*y) <= 1.0 {
            assert_eq!(label, "unsafe", "({x}, {y})");
        }
    }
    let spec = SliceSpec { axis: None, value: None, resolution: 10 };
    assert!(export_slice(&out.join("cells.json"), &spec, &tmp.path().join("x.csv")).is_err());
}
