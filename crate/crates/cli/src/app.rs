//! Command dispatch and exit-code mapping.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use stewart_core::sim::run_closed_loop;
use stewart_core::SimRecord;

use crate::config::{ConfigError, ScenarioName, SimConfig};
use crate::{csv_log, plot};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "stewart", version, about = "Stewart platform closed-loop simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write the per-step log.
    Run(RunArgs),
    /// Print the effective configuration with every key filled in.
    DumpConfig {
        /// JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output path. Without it the log goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for positions.svg, forces.svg and errors.svg.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Sensor noise seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Run every seed of a range (A..B or A..=B) in parallel.
    #[arg(long, value_parser = parse_seed_range)]
    pub seeds: Option<RangeInclusive<u64>>,
    /// Simulated time, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Feed the true plant state to the controller.
    #[arg(long)]
    pub perfect_state: bool,
    /// Put 0.4 in the ż slot of the sinusoid reference velocity instead of 0
    #[arg(long)]
    pub literal_reference: bool,
}

pub fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected A..B or A..=B, got {s:?}"));
    };
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    let end = if inclusive { Some(b) } else { b.checked_sub(1) };
    match end {
        Some(end) if end >= a => Ok(a..=end),
        _ => Err(format!("seed range {s:?} is empty")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("simulation failed: {0}")]
    Numeric(#[from] stewart_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub records: usize,
    pub final_e_l: f64,
    pub max_e_t: f64,
    pub saturated_steps: usize,
    pub seconds: f64,
}

impl RunSummary {
    fn new(seed: u64, records: &[SimRecord], seconds: f64) -> Self {
        RunSummary {
            seed,
            records: records.len(),
            final_e_l: records.last().map_or(f64::NAN, |r| r.e_l),
            max_e_t: records.iter().map(|r| r.e_t).fold(0.0, f64::max),
            saturated_steps: records.iter().filter(|r| r.saturated).count(),
            seconds,
        }
    }
}

/// Loads the config file (if any) and applies the command-line overrides.
pub fn effective_config(args: &RunArgs) -> Result<SimConfig, ConfigError> {
    let mut config = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(s) = args.scenario {
        if s != config.run.scenario && args.duration.is_none() {
            config.run.duration = None;
        }
        config.run.scenario = s;
    }
    if let Some(seed) = args.seed {
        config.noise.seed = seed;
    }
    if let Some(d) = args.duration {
        config.run.duration = Some(d);
    }
    config.run.perfect_state |= args.perfect_state;
    config.run.literal_reference |= args.literal_reference;
    config.validate()?;
    Ok(config)
}

fn simulate(config: &SimConfig) -> Result<(Vec<SimRecord>, f64), CliError> {
    let scenario = config.scenario();
    let settings = config.settings()?;
    let start = Instant::now();
    let records = run_closed_loop(&scenario, &settings)?;
    Ok((records, start.elapsed().as_secs_f64()))
}

fn write_outputs(records: &[SimRecord], out: Option<&Path>, plots: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            csv_log::write_csv(records, BufWriter::new(file)).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                source: e.into(),
            })?;
        }
        None => {
            let stdout = io::stdout().lock();
            csv_log::write_csv(records, BufWriter::new(stdout)).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e.into(),
            })?;
        }
    }
    if let Some(dir) = plots {
        plot::render_plots(records, dir).map_err(io_error(dir))?;
    }
    Ok(())
}

fn seed_path(out: &Path, seed: u64) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}_seed{seed}"),
    };
    out.with_file_name(name)
}

/// Records of one run and its wall-clock seconds.
type SimOutcome = (Vec<SimRecord>, f64);

/// Executes `stewart run`. A seed sweep writes one CSV (and plot
/// directory) per seed when `--out` (`--plots`) is given.
pub fn run(args: &RunArgs) -> Result<Vec<RunSummary>, CliError> {
    let config = effective_config(args)?;
    let Some(seeds) = args.seeds.clone() else {
        let (records, seconds) = simulate(&config)?;
        write_outputs(&records, args.out.as_deref(), args.plots.as_deref())?;
        return Ok(vec![RunSummary::new(config.noise.seed, &records, seconds)]);
    };

    let runs: Vec<(u64, Result<SimOutcome, CliError>)> = seeds
        .into_par_iter()
        .map(|seed| {
            let mut c = config.clone();
            c.noise.seed = seed;
            (seed, simulate(&c))
        })
        .collect();
    let mut summaries = Vec::with_capacity(runs.len());
    for (seed, result) in runs {
        let (records, seconds) = result?;
        if let Some(out) = &args.out {
            let csv_path = seed_path(out, seed);
            let plot_dir = args.plots.as_ref().map(|d| d.join(format!("seed{seed}")));
            write_outputs(&records, Some(&csv_path), plot_dir.as_deref())?;
        } else if let Some(dir) = &args.plots {
            let dir = dir.join(format!("seed{seed}"));
            plot::render_plots(&records, &dir).map_err(io_error(&dir))?;
        }
        summaries.push(RunSummary::new(seed, &records, seconds));
    }
    Ok(summaries)
}

pub fn print_summaries<W: Write>(mut w: W, summaries: &[RunSummary]) -> io::Result<()> {
    writeln!(w, "seed,records,final_e_l,max_e_t,saturated_steps,seconds")?;
    for s in summaries {
        writeln!(
            w,
            "{},{},{:e},{:e},{},{:.3}",
            s.seed, s.records, s.final_e_l, s.max_e_t, s.saturated_steps, s.seconds
        )?;
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Run(args) => run(args).and_then(|summaries| {
            let report = if args.seeds.is_some() && args.out.is_none() {
                print_summaries(io::stdout().lock(), &summaries)
            } else {
                print_summaries(io::stderr().lock(), &summaries)
            };
            report.map_err(io_error(Path::new("<summary>")))
        }),
        Command::DumpConfig { config } => {
            let loaded = match config {
                Some(path) => SimConfig::load(path),
                None => Ok(SimConfig::default()),
            };
            loaded.map_err(CliError::from).and_then(|c| {
                io::stdout()
                    .write_all(c.dump().as_bytes())
                    .map_err(io_error(Path::new("<stdout>")))
            })
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
