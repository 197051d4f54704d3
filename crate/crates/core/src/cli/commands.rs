use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Overrides, Resolved, ResolvedConfig, RunConfig};
use super::io::{read_json, read_text, write_atomic, write_json};
use super::CliError;
use crate::geometry::{Cell, Label, Partition};
use crate::oracle::{brute_force_brt, containment_fraction, volume_gap, GridHeader, GridValueField, OracleError};
use crate::runtime::Stopwatch;
use crate::verifier::{verify_region, Certificate, StageReport, Verification};

/// `cells.json`: every cell of the final partition, sorted by id.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellsFile {
    pub cells: Vec<Cell>,
    pub config: ResolvedConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificatesFile {
    pub certificates: Vec<Certificate>,
    pub config: ResolvedConfig,
}

/// `reports.json`: per-stage counts and timings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportsFile {
    pub reports: Vec<StageReport>,
    pub wall_seconds: f64,
    pub workers: usize,
    pub config: ResolvedConfig,
}

/// `oracle.json`, the sidecar of the raw `oracle.bin` values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleSidecar {
    pub header: GridHeader,
    pub values_file: String,
    pub tube_nodes: usize,
    pub tube_volume: f64,
    pub wall_seconds: f64,
    pub workers: usize,
    pub config: ResolvedConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub verify_seconds: Option<f64>,
    pub stage_seconds: Vec<f64>,
    pub oracle_seconds: Option<f64>,
}

/// `metrics.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metrics {
    /// `null` when the oracle tube has no nodes.
    pub containment_fraction: Option<f64>,
    /// `null` when the oracle tube has zero volume.
    pub volume_gap: Option<f64>,
    pub unsafe_volume: f64,
    pub safe_volume: f64,
    pub pending_volume: f64,
    pub domain_volume: f64,
    pub tube_volume: f64,
    pub tube_nodes: usize,
    pub timings: Timings,
    pub config: ResolvedConfig,
}

fn load(config_path: &Path, overrides: &Overrides) -> Result<Resolved, CliError> {
    RunConfig::from_json(&read_text(config_path)?)?.resolve(overrides)
}

/// Runs the three-stage verifier and writes `cells.json`, `certificates.json` and `reports.json`.
pub fn run_verify(config_path: &Path, overrides: &Overrides) -> Result<(ResolvedConfig, Verification, PathBuf), CliError> {
    let Resolved { config, field, workers, out } = load(config_path, overrides)?;
    let clock = Stopwatch::start();
    let mut vcfg = config.verifier.clone();
    vcfg.workers = workers;
    let v = verify_region(&config.domain, field.as_ref(), &vcfg)?;
    let wall_seconds = clock.seconds();

    let cells = v.partition.cells().into_iter().cloned().collect();
    write_json(&out.join("cells.json"), &CellsFile { cells, config: config.clone() })?;
    write_json(
        &out.join("certificates.json"),
        &CertificatesFile { certificates: v.certificates.clone(), config: config.clone() },
    )?;
    let used = v.reports.first().map_or(workers, |r| r.workers);
    write_json(
        &out.join("reports.json"),
        &ReportsFile { reports: v.reports.clone(), wall_seconds, workers: used, config: config.clone() },
    )?;
    Ok((config, v, out))
}

/// Computes the grid reachability oracle and writes `oracle.bin` plus `oracle.json`.
pub fn run_oracle(config_path: &Path, overrides: &Overrides) -> Result<(ResolvedConfig, GridValueField, PathBuf), CliError> {
    let Resolved { config, field, workers, out } = load(config_path, overrides)?;
    let clock = Stopwatch::start();
    let mut ocfg = config.oracle.clone();
    ocfg.workers = workers;
    let grid = brute_force_brt(field.as_ref(), &config.verifier.unsafe_set, &config.domain, &ocfg)?;
    let wall_seconds = clock.seconds();
    write_atomic(&out.join("oracle.bin"), &grid.to_bytes())?;
    let sidecar = OracleSidecar {
        header: grid.header.clone(),
        values_file: "oracle.bin".into(),
        tube_nodes: grid.tube_nodes(),
        tube_volume: grid.tube_volume(),
        wall_seconds,
        workers: crate::runtime::Pool::new(workers).workers,
        config: config.clone(),
    };
    write_json(&out.join("oracle.json"), &sidecar)?;
    Ok((config, grid, out))
}

fn oracle_paths(path: &Path) -> (PathBuf, PathBuf) {
    if path.extension().is_some_and(|e| e == "bin") {
        (path.with_extension("json"), path.to_path_buf())
    } else {
        (path.to_path_buf(), path.with_extension("bin"))
    }
}

fn read_cells(path: &Path) -> Result<(CellsFile, Partition), CliError> {
    let file: CellsFile = read_json(path)?;
    let partition = Partition::from_cells(file.config.domain.clone(), file.cells.clone());
    Ok((file, partition))
}

/// Compares a verifier run with an oracle run and writes `metrics.json` into `out`.
pub fn run_compare(cells_path: &Path, oracle_path: &Path, out: &Path) -> Result<Metrics, CliError> {
    let (cells, partition) = read_cells(cells_path)?;
    let (json_path, bin_path) = oracle_paths(oracle_path);
    let sidecar: OracleSidecar = read_json(&json_path)?;
    let bytes = std::fs::read(&bin_path).map_err(|e| CliError::io(&bin_path, e))?;
    let grid = GridValueField::from_bytes(sidecar.header.clone(), &bytes)?;
    let d = &partition.domain;
    if grid.header.lower != d.lower || grid.header.upper != d.upper || grid.header.periodic != d.periodic {
        return Err(CliError::Config("oracle grid and verified partition cover different domains".into()));
    }
    let optional = |r: Result<f64, OracleError>| match r {
        Ok(v) => Ok(Some(v)),
        Err(OracleError::EmptyTube | OracleError::ZeroVolume) => Ok(None),
        Err(e) => Err(CliError::from(e)),
    };
    let reports_path = cells_path.with_file_name("reports.json");
    let reports: Option<ReportsFile> = if reports_path.exists() { Some(read_json(&reports_path)?) } else { None };
    let timings = Timings {
        verify_seconds: reports.as_ref().map(|r| r.wall_seconds),
        stage_seconds: reports.map(|r| r.reports.iter().map(|s| s.wall_seconds).collect()).unwrap_or_default(),
        oracle_seconds: Some(sidecar.wall_seconds),
    };
    let metrics = Metrics {
        containment_fraction: optional(containment_fraction(&partition, &grid))?,
        volume_gap: optional(volume_gap(&partition, &grid))?,
        unsafe_volume: partition.unsafe_volume(),
        safe_volume: partition.safe_volume(),
        pending_volume: crate::geometry::volume(&partition.pending, d),
        domain_volume: d.volume(),
        tube_volume: grid.tube_volume(),
        tube_nodes: grid.tube_nodes(),
        timings,
        config: cells.config,
    };
    write_json(&out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

/// A planar raster through the partition. In 3-D one axis is fixed at `value`; 2-D domains
/// are rastered whole.
#[derive(Clone, Debug)]
pub struct SliceSpec {
    pub axis: Option<usize>,
    pub value: Option<f64>,
    pub resolution: usize,
}

/// Writes a CSV `x,y,label` raster sampled at pixel centers, `y` outer and `x` inner.
/// Points outside every cell get the label `none`.
pub fn export_slice(cells_path: &Path, spec: &SliceSpec, out_csv: &Path) -> Result<usize, CliError> {
    let (_, partition) = read_cells(cells_path)?;
    let d = &partition.domain;
    let n = d.dim();
    if spec.resolution == 0 {
        return Err(CliError::Config("slice resolution must be at least 1".into()));
    }
    let mut base = d.center();
    let plane: Vec<usize> = match (n, spec.axis, spec.value) {
        (2, None, _) => vec![0, 1],
        (3, Some(a), Some(v)) if a < 3 => {
            base[a] = d.wrap_coord(a, v);
            (0..3).filter(|&i| i != a).collect()
        }
        (3, _, _) => return Err(CliError::Config("a 3-D slice needs --axis in 0..3 and --value".into())),
        (2, Some(_), _) => return Err(CliError::Config("a 2-D domain is exported whole, drop --axis".into())),
        _ => return Err(CliError::Config(format!("cannot slice a {n}-D partition"))),
    };
    let locator = partition.locator();
    let (ax, ay) = (plane[0], plane[1]);
    let px = |axis: usize, i: usize| d.lower[axis] + (i as f64 + 0.5) * d.extent(axis) / spec.resolution as f64;
    let mut csv = String::from("x,y,label\n");
    let mut x = base;
    for j in 0..spec.resolution {
        x[ay] = px(ay, j);
        for i in 0..spec.resolution {
            x[ax] = px(ax, i);
            let label = locator.locate(&x).map_or("none", |(_, l): (u64, Label)| l.as_str());
            let _ = writeln!(csv, "{},{},{}", x[ax], x[ay], label);
        }
    }
    write_atomic(out_csv, csv.as_bytes())?;
    Ok(spec.resolution * spec.resolution)
}
