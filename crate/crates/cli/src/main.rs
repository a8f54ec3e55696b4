use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use donor_transport::experiments::{run_experiment, AxisSpec, ExperimentId};
use donor_transport::io::{
    parse_manifest, spectrum_table, write_outputs, write_table, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "donor-transport",
    version,
    about = "Master-equation transport through P donors in Si"
)]
struct Cli {
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory; overrides [output] dir in the manifest.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Sampling interval of time traces in ns; overrides timing.sample_step_ns.
    #[arg(long, global = true, value_name = "X")]
    sample_step_ns: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a manifest and write CSV + JSON.
    Run { manifest: PathBuf },
    /// Write eigenenergies of the two-electron block versus detuning.
    Spectrum {
        manifest: PathBuf,
        /// Detuning range is [-span, span] MHz (default: 4 t_c).
        #[arg(long, value_name = "MHZ")]
        span_mhz: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Parse and validate a manifest without running it.
    Validate { manifest: PathBuf },
    /// Print the available experiment ids.
    ListExperiments,
}

/// Like `println!`, but a closed stdout (e.g. `| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn load(path: &Path, cli: &Cli) -> Result<RunManifest> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let mut m = parse_manifest(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(ns) = cli.sample_step_ns {
        if !(ns.is_finite() && ns > 0.0) {
            bail!("--sample-step-ns must be a positive number, got {ns}");
        }
        m.spec.timing.sample_step = ns * 1e-3;
        m.defaults_applied.retain(|k| k != "timing.sample_step_ns");
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        m.threads = Some(n);
    }
    if let Some(dir) = &cli.out {
        m.output.dir = Some(dir.clone());
    }
    m.spec.validate().context("validating overrides")?;
    Ok(m)
}

fn out_dir(m: &RunManifest) -> PathBuf {
    m.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

fn run(cli: &Cli, path: &Path) -> Result<()> {
    let m = load(path, cli)?;
    let start = Instant::now();
    let output = with_threads(m.threads, || run_experiment(&m.spec))?
        .with_context(|| format!("running experiment '{}'", m.spec.id))?;
    let files = write_outputs(&output, &m, &out_dir(&m)).context("writing outputs")?;
    eprintln!(
        "{} finished in {:.2} s",
        m.spec.id,
        start.elapsed().as_secs_f64()
    );
    say!("{}", files.csv.display());
    say!("{}", files.sidecar.display());
    Ok(())
}

fn spectrum(cli: &Cli, path: &Path, span: Option<f64>, points: usize) -> Result<()> {
    let mut m = load(path, cli)?;
    let span = span.unwrap_or(4.0 * m.spec.config.tc.max(1.0));
    if !(span.is_finite() && span > 0.0) || points < 2 {
        bail!("spectrum needs span > 0 and at least 2 points");
    }
    let deltas = AxisSpec::linear(-span, span, points).values();
    let table = spectrum_table(&m.spec.config, &deltas).context("computing spectrum")?;
    m.output.prefix = format!("{}_spectrum", m.output.prefix);
    let files = write_table(&table, &m, &out_dir(&m)).context("writing outputs")?;
    say!("{}", files.csv.display());
    say!("{}", files.sidecar.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { manifest } => run(cli, manifest),
        Command::Spectrum {
            manifest,
            span_mhz,
            points,
        } => spectrum(cli, manifest, *span_mhz, *points),
        Command::Validate { manifest } => {
            let m = load(manifest, cli)?;
            say!(
                "ok: {} ({} defaults applied)",
                m.spec.id,
                m.defaults_applied.len()
            );
            for k in &m.defaults_applied {
                say!("  default {k}");
            }
            Ok(())
        }
        Command::ListExperiments => {
            for id in ExperimentId::ALL {
                say!("{:<12} {}", id.as_str(), id.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
