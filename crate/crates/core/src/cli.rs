//! Command-line front end: `run`, `sweep`, `atmosphere` and `wind-synth`.
//!
//! Exit codes: 0 success, 1 episode-level failure, 2 usage or config error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::atmosphere::{self, AtmosphereModel};
use crate::config::{EnvConfig, WindSource};
use crate::env::{self, Env};
use crate::error::{Error, Result};
use crate::policy::{Policy, PolicySpec};
use crate::trajectory::{self, Format, TrajectoryRecord};
use crate::wind::{self, SynthSpec, WindField};

#[derive(Debug, Parser)]
#[command(
    name = "balloon-sim",
    version,
    about = "High-altitude balloon flight simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run one episode and write its trajectory.
    Run(RunArgs),
    /// Run one episode per seed, in parallel.
    Sweep(SweepArgs),
    /// Print the standard atmosphere as CSV.
    Atmosphere(AtmosphereArgs),
    /// Write a synthetic wind field file.
    WindSynth(WindSynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EpisodeArgs {
    /// Environment config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// constant:<cmd> | altitude-hold:<m>[:<m>] | random[:<seed>] | replay:<path>
    #[arg(long)]
    pub policy: String,
    /// Wind file, overriding the config.
    #[arg(long, conflicts_with = "wind_synth")]
    pub wind: Option<PathBuf>,
    /// Synthetic wind `kind:params:seed`, overriding the config.
    #[arg(long)]
    pub wind_synth: Option<String>,
    /// csv or jsonl
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Episode seed; defaults to the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Seeds as a list and/or inclusive ranges, e.g. `0-9` or `1,5,10-12`.
    #[arg(long)]
    pub seeds: String,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Output directory for per-seed trajectories and summary.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AtmosphereArgs {
    #[arg(long, default_value_t = 0.0)]
    pub min: f64,
    #[arg(long, default_value_t = 30_000.0)]
    pub max: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub step: f64,
    /// Interpret altitudes as geopotential rather than geometric.
    #[arg(long)]
    pub geopotential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WindSynthArgs {
    /// `kind:params:seed`, e.g. `layered-shear:bands=0/10000/5/0;10000/20000/-5/0:0`
    #[arg(long)]
    pub wind_synth: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub steps: u32,
    pub total_reward: f64,
    /// Termination cause, or `truncated`.
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub records: Vec<TrajectoryRecord>,
    pub summary: EpisodeSummary,
}

/// Everything needed to start episodes: resolved config, shared wind, policy.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: EnvConfig,
    pub wind: Arc<WindField>,
    pub policy: PolicySpec,
    pub format: Format,
}

pub fn prepare(args: &EpisodeArgs) -> Result<Prepared> {
    let mut config = match &args.config {
        Some(path) => EnvConfig::load(path)?,
        None => EnvConfig::default(),
    };
    if let Some(path) = &args.wind {
        config.wind = WindSource::File(path.clone());
    }
    if let Some(spec) = &args.wind_synth {
        config.wind = WindSource::Synth(spec.parse()?);
    }
    let wind = Arc::new(env::load_wind(&config.wind)?);
    Ok(Prepared {
        config,
        wind,
        policy: args.policy.parse()?,
        format: args.format.parse()?,
    })
}

pub fn run_episode(prepared: &Prepared, seed: u64) -> Result<Episode> {
    let mut env = Env::with_wind(prepared.config.clone(), Arc::clone(&prepared.wind))?;
    let mut policy = Policy::build(&prepared.policy, seed)?;
    env.reset(Some(seed))?;
    let mut records = Vec::new();
    let mut total_reward = 0.0;
    loop {
        let action = policy.act(env.state())?;
        let result = env.step(action)?;
        let step = env.state().step;
        total_reward += result.reward;
        records.push(TrajectoryRecord::new(step, action, &result));
        if result.terminated || result.truncated {
            let outcome = match result.cause {
                Some(cause) => cause.as_str().to_string(),
                None => "truncated".to_string(),
            };
            return Ok(Episode {
                records,
                summary: EpisodeSummary {
                    seed,
                    steps: step,
                    total_reward,
                    outcome,
                },
            });
        }
    }
}

fn write_file(path: &Path, records: &[TrajectoryRecord], format: Format) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    trajectory::write_trajectory(records, format, file)
}

pub fn run(args: &RunArgs) -> Result<EpisodeSummary> {
    let prepared = prepare(&args.episode)?;
    let seed = args.seed.unwrap_or(prepared.config.seed);
    let episode = run_episode(&prepared, seed)?;
    write_file(&args.out, &episode.records, prepared.format)?;
    Ok(episode.summary)
}

pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || {
        Error::Config(format!(
            "bad seed list {spec:?}; expected e.g. 0-9 or 1,2,5"
        ))
    };
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// One entry per seed, in the order given.
    pub results: Vec<(u64, std::result::Result<EpisodeSummary, String>)>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|(_, r)| r.is_err()).count()
    }
}

pub fn trajectory_file_name(seed: u64, format: Format) -> String {
    format!("seed_{seed}.{}", format.extension())
}

pub fn sweep(args: &SweepArgs) -> Result<SweepReport> {
    let prepared = prepare(&args.episode)?;
    let seeds = parse_seeds(&args.seeds)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let threads = args.parallelism.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let outcome = run_episode(&prepared, seed).and_then(|episode| {
                    let path = args.out.join(trajectory_file_name(seed, prepared.format));
                    write_file(&path, &episode.records, prepared.format)?;
                    Ok(episode.summary)
                });
                (seed, outcome.map_err(|e| e.to_string()))
            })
            .collect()
    });
    let summary_path = args.out.join("summary.csv");
    let file = std::fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| Error::Protocol(format!("writing summary: {e}"));
    w.write_record(["seed", "steps", "total_reward", "termination", "error"])
        .map_err(csv_err)?;
    for (seed, result) in &results {
        let row = match result {
            Ok(s) => [
                seed.to_string(),
                s.steps.to_string(),
                s.total_reward.to_string(),
                s.outcome.clone(),
                String::new(),
            ],
            Err(e) => [
                seed.to_string(),
                String::new(),
                String::new(),
                "error".into(),
                e.clone(),
            ],
        };
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&summary_path, e))?;
    Ok(SweepReport { results })
}

/// Writes `altitude_m,temperature_k,pressure_pa,density_kg_m3` rows for
/// `min, min + step, …` up to `max`. Returns the row count.
pub fn atmosphere_table<W: Write>(args: &AtmosphereArgs, out: W) -> Result<usize> {
    let AtmosphereArgs {
        min,
        max,
        step,
        geopotential,
    } = *args;
    if !(step > 0.0) || !(max >= min) {
        return Err(Error::Config(format!(
            "need step > 0 and max >= min, got {min}..{max} step {step}"
        )));
    }
    let model = AtmosphereModel::new();
    let sample = |h: f64| {
        if geopotential {
            model.sample_geopotential(h)
        } else {
            model.sample(h)
        }
    };
    // Both ends must be valid before any output.
    sample(min)?;
    sample(max)?;
    let rows = ((max - min) / step + 1e-9).floor() as usize + 1;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Protocol(format!("writing table: {e}"));
    w.write_record([
        "altitude_m",
        "temperature_k",
        "pressure_pa",
        "density_kg_m3",
    ])
    .map_err(csv_err)?;
    for k in 0..rows {
        let h = (min + k as f64 * step).min(max);
        let s = sample(h)?;
        w.write_record([
            h.to_string(),
            s.temperature.to_string(),
            s.pressure.to_string(),
            s.density.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<stdout>", e))?;
    Ok(rows)
}

pub fn wind_synth(args: &WindSynthArgs) -> Result<()> {
    let spec: SynthSpec = args.wind_synth.parse()?;
    let field = spec.build()?;
    let file = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    wind::write_windfield(&field, file)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        2
    } else {
        1
    }
}

/// Parses arguments and runs a subcommand, returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        CliCommand::Run(args) => run(args).map(|s| {
            let _ = writeln!(
                stdout,
                "seed={} steps={} total_reward={} termination={}",
                s.seed, s.steps, s.total_reward, s.outcome
            );
            0
        }),
        CliCommand::Sweep(args) => sweep(args).map(|report| {
            for (seed, r) in &report.results {
                match r {
                    Ok(s) => {
                        let _ = writeln!(
                            stdout,
                            "seed={seed} steps={} total_reward={} termination={}",
                            s.steps, s.total_reward, s.outcome
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(stderr, "seed={seed} failed: {e}");
                    }
                }
            }
            if report.failures() > 0 {
                1
            } else {
                0
            }
        }),
        CliCommand::Atmosphere(args) => atmosphere_table(args, &mut *stdout).map(|_| 0),
        CliCommand::WindSynth(args) => wind_synth(args).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Largest geopotential altitude the table accepts.
pub fn max_geopotential() -> f64 {
    atmosphere::EARTH_RADIUS * atmosphere::MAX_GEOMETRIC_ALTITUDE
        / (atmosphere::EARTH_RADIUS + atmosphere::MAX_GEOMETRIC_ALTITUDE)
}
