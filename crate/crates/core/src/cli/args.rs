use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::{export_slice, run_compare, run_oracle, run_verify, CliError, Overrides, SliceSpec};

#[derive(Debug, Parser)]
#[command(name = "rcbf", version, about = "Sampling-based safe-set verification with robust control barrier conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Cap on recurrence iterations.
    #[arg(long = "stage3-iters")]
    stage3_iters: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, workers: self.workers, stage3_iters: self.stage3_iters, out: self.out.clone() }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label the domain and write cells.json, certificates.json and reports.json.
    Verify(RunArgs),
    /// Compute the grid reachability oracle (oracle.bin and oracle.json).
    Oracle(RunArgs),
    /// Compare a verifier run with an oracle run and write metrics.json.
    Compare {
        #[arg(long)]
        cells: PathBuf,
        /// oracle.json or oracle.bin; the other file is found next to it.
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Export a labelled planar raster as CSV.
    Slice {
        #[arg(long)]
        cells: PathBuf,
        /// Axis held fixed (3-D domains).
        #[arg(long)]
        axis: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        value: Option<f64>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// CSV path, or a directory to receive slice.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Verify(a) => {
            let (_, v, out) = run_verify(&a.config, &a.overrides())?;
            let p = &v.partition;
            Ok(format!(
                "{} cells ({} safe, {} unsafe), safe volume {}, unsafe volume {} -> {}",
                p.len(),
                p.safe.len(),
                p.unsafe_cells.len(),
                p.safe_volume(),
                p.unsafe_volume(),
                out.display()
            ))
        }
        Command::Oracle(a) => {
            let (_, g, out) = run_oracle(&a.config, &a.overrides())?;
            Ok(format!("{} nodes, {} in the tube, tube volume {} -> {}", g.values.len(), g.tube_nodes(), g.tube_volume(), out.display()))
        }
        Command::Compare { cells, oracle, out } => {
            let m = run_compare(&cells, &oracle, &out)?;
            let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| x.to_string());
            Ok(format!(
                "containment {}, volume gap {} -> {}",
                show(m.containment_fraction),
                show(m.volume_gap),
                out.join("metrics.json").display()
            ))
        }
        Command::Slice { cells, axis, value, resolution, out } => {
            let path = if out.extension().is_some_and(|e| e == "csv") { out } else { out.join("slice.csv") };
            let rows = export_slice(&cells, &SliceSpec { axis, value, resolution }, &path)?;
            Ok(format!("{rows} rows -> {}", path.display()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
