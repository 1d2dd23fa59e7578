//! `tridot`: command-line front end for the three-dot percolation laboratory.
//!
//! Exit status: 0 when the command ran and its checks held, 1 when a checked
//! property failed (or output could not be written), 2 on usage errors.

mod error;
mod exec;
mod manifest;
mod render;
mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use manifest::{Command, Format, Manifest, Suite};

#[derive(Parser)]
#[command(name = "tridot", version, about = "Sample, trace and audit σ-percolation on the three-dot system")]
struct Cli {
    /// Worker threads for sample-level parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Also write the manifest describing this run to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    emit_manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Source {
    /// haar, mu1, mu or dirac.
    #[arg(long)]
    measure: Option<String>,
    /// triangle:N[@K,L], band:MLO..MHI/CLO..CHI or rect:K0..K1/L0..L1.
    #[arg(long, allow_hyphen_values = true)]
    geometry: Option<String>,
    /// Read a patch file instead of sampling.
    #[arg(long, value_name = "PATH")]
    input: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, env = "TRIDOT_SEED", default_value_t = tridot::stats::DEFAULT_SEED)]
    seed: u64,
    /// Output file, written atomically; standard output by default.
    #[arg(short, long, value_name = "PATH")]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a patch in the tridot-patch text format.
    Sample {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Follow σ from a Y-cell; CSV of visited cells.
    Trace {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        from: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Components, deep and extremal cells of a triangle patch; CSV.
    Components {
        #[command(flatten)]
        source: Source,
    },
    /// Which Y-cells on the anti-diagonal through a cell merge with it; CSV.
    Scan {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        from: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-16..16")]
        hrange: String,
    },
    /// Monte-Carlo suites; CSV.
    Stats {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        measure: String,
        /// Triangle sides or merge heights.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<i64>,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        depths: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Tree/ribbon verdict with its evidence; JSON.
    Classify {
        #[arg(long)]
        measure: String,
        /// JSON budget; missing fields take their defaults.
        #[arg(long, value_name = "PATH")]
        budget: Option<PathBuf>,
        /// JSON thresholds; missing fields take their defaults.
        #[arg(long, value_name = "PATH")]
        thresholds: Option<PathBuf>,
        /// tree, ribbon or inconclusive; a different verdict exits with status 1.
        #[arg(long)]
        expect: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Picture of a patch.
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Comma-separated: cells, y, components, deep, extremal, trajectories, states.
        #[arg(long, value_delimiter = ',')]
        layers: Vec<String>,
        /// Trajectory K,L:STEPS to draw; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        trace: Vec<String>,
        #[arg(long)]
        scale: Option<u32>,
    },
    /// Exact Haar probabilities and correlations.
    Oracle {
        /// Cylinder event K,L=B;K,L=B;...
        #[arg(long, allow_hyphen_values = true)]
        event: String,
        /// Second event; prints the correlation table over --shift.
        #[arg(long, allow_hyphen_values = true)]
        against: Option<String>,
        #[arg(long = "shift", allow_hyphen_values = true)]
        shifts: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// The ribbon state diagram, as CSV or SVG.
    Transitions {
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        common: Common,
    },
    /// Execute a manifest file.
    Run {
        manifest: PathBuf,
        /// Overrides the manifest's output path.
        #[arg(short, long, value_name = "PATH")]
        output: Option<String>,
    },
}

fn with_source(command: Command, s: Source) -> Manifest {
    let mut m = Manifest::new(command, s.common.seed);
    m.measure = s.measure;
    m.geometry = s.geometry;
    m.params.input = s.input;
    m.output = s.common.output;
    m
}

fn with_common(command: Command, c: Common) -> Manifest {
    let mut m = Manifest::new(command, c.seed);
    m.output = c.output;
    m
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn manifest_of(cmd: Cmd) -> Result<Manifest, CliError> {
    Ok(match cmd {
        Cmd::Sample { source, format } => {
            let mut m = with_source(Command::Sample, source);
            m.params.format = format;
            m
        }
        Cmd::Trace { source, from, steps } => {
            let mut m = with_source(Command::Trace, source);
            m.params.from = Some(from);
            m.params.steps = Some(steps);
            m
        }
        Cmd::Components { source } => with_source(Command::Components, source),
        Cmd::Scan { source, from, hrange } => {
            let mut m = with_source(Command::Scan, source);
            m.params.from = Some(from);
            m.params.hrange = Some(hrange);
            m
        }
        Cmd::Stats { suite, measure, n, trials, h, width, depths, common } => {
            let mut m = with_common(Command::Stats, common);
            m.measure = Some(measure);
            m.params.suite = Some(suite);
            m.params.n = n;
            m.params.trials = trials;
            m.params.h = h;
            m.params.width = width;
            m.params.depths = depths;
            m
        }
        Cmd::Classify { measure, budget, thresholds, expect, common } => {
            let mut m = with_common(Command::Classify, common);
            m.measure = Some(measure);
            m.params.budget = budget.as_deref().map(read_json).transpose()?;
            m.params.thresholds = thresholds.as_deref().map(read_json).transpose()?;
            m.params.expect = expect;
            m
        }
        Cmd::Render { source, format, layers, trace, scale } => {
            let mut m = with_source(Command::Render, source);
            m.params.format = format;
            m.params.layers = layers;
            m.params.trace = trace;
            m.params.scale = scale;
            m
        }
        Cmd::Oracle { event, against, shifts, common } => {
            let mut m = with_common(Command::Oracle, common);
            m.params.event = Some(event);
            m.params.against = against;
            m.params.shifts = shifts;
            m
        }
        Cmd::Transitions { format, common } => {
            let mut m = with_common(Command::Transitions, common);
            m.params.format = format;
            m
        }
        Cmd::Run { manifest, output } => {
            let mut m = Manifest::load(&manifest)?;
            if output.is_some() {
                m.output = output;
            }
            m
        }
    })
}

/// Writes through a sibling temporary file so readers never see partial output.
fn write_atomic(path: &str, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_string(), source };
    let target = Path::new(path);
    let mut tmp = target.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, target).map_err(io)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    let m = manifest_of(cli.command)?;
    if let Some(path) = &cli.emit_manifest {
        write_atomic(&path.to_string_lossy(), m.to_json().as_bytes())?;
    }
    let out = exec::execute(&m)?;
    match &m.output {
        Some(path) => write_atomic(path, &out.bytes)?,
        None => std::io::stdout()
            .write_all(&out.bytes)
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(out.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tridot: a checked property failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("tridot: {e}");
            e.exit_code()
        }
    }
}
