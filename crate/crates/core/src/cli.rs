//! Command-line surface: `osl run`, `osl mc` and `osl sweep`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RunConfig};
use crate::error::{OslError, Result};
use crate::output::{write_summary, write_sweep_table, write_trajectory, Summary, SweepRow};
use crate::sim::{monte_carlo, run_episode, MCStats, Variant};

#[derive(Debug, Parser)]
#[command(name = "osl", version, about = "Multi-UAV odor source localization simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One episode: trajectory CSV plus summary.
    Run(CommonArgs),
    /// A Monte Carlo batch: summary only.
    Mc(BatchArgs),
    /// One batch per swept value and variant, plus a combined table.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// `key = value` configuration file; absent keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Algorithm variant (overrides the config).
    #[arg(long, value_parser = parse_variant)]
    pub algo: Option<Variant>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Episodes per batch (overrides the config).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub batch: BatchArgs,
    /// `KEY=v1,v2,...`; `volume=60x60x30,...` sets all three extents.
    #[arg(long)]
    pub sweep: String,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse()
}

fn load(common: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(algo) = common.algo {
        config.swarm.variant = algo;
    }
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn batch(config: &RunConfig, workers: usize) -> Result<MCStats> {
    config.validate()?;
    monte_carlo(&config.swarm, &config.world(), config.runs, config.seed, workers)
}

/// `run`: writes `trajectory.csv` and `summary.json` under the out dir.
pub fn cmd_run(args: &CommonArgs) -> Result<()> {
    let config = load(args)?;
    config.validate()?;
    fs::create_dir_all(&args.out_dir)?;
    let result = run_episode(&config.swarm, &config.world(), config.seed)?;
    write_trajectory(&result.trajectory, create(&args.out_dir.join("trajectory.csv"))?)?;
    let stats = MCStats::from_results(config.seed, vec![result]);
    let single = RunConfig { runs: 1, ..config };
    write_summary(&Summary::new(&single, &stats), create(&args.out_dir.join("summary.json"))?)?;
    Ok(())
}

/// `mc`: writes `summary.json` under the out dir.
pub fn cmd_mc(args: &BatchArgs) -> Result<()> {
    let mut config = load(&args.common)?;
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    fs::create_dir_all(&args.common.out_dir)?;
    let stats = batch(&config, args.workers)?;
    write_summary(&Summary::new(&config, &stats), create(&args.common.out_dir.join("summary.json"))?)?;
    Ok(())
}

/// Splits `KEY=v1,v2,...` and checks the key and every value up front.
pub fn parse_sweep(spec: &str, base: &RunConfig) -> Result<(String, Vec<String>)> {
    let invalid = |reason: String| OslError::InvalidParam { name: "sweep", reason };
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| invalid(format!("expected KEY=v1,v2,..., got `{spec}`")))?;
    let key = key.trim();
    if !RunConfig::is_key(key) || key == "seed" || key == "runs" {
        return Err(invalid(format!("cannot sweep `{key}`")));
    }
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if values.iter().any(String::is_empty) {
        return Err(invalid(format!("empty value in `{spec}`")));
    }
    for v in &values {
        let mut c = base.clone();
        c.set(key, v).map_err(invalid)?;
        c.validate()?;
    }
    Ok((key.to_string(), values))
}

/// `sweep`: one batch per (value, variant), each with its own summary, and
/// `sweep.csv` over all of them. Without `--algo` every variant runs.
pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let common = &args.batch.common;
    let mut base = load(common)?;
    if let Some(runs) = args.batch.runs {
        base.runs = runs;
    }
    let (key, values) = parse_sweep(&args.sweep, &base)?;
    let variants: Vec<Variant> = match common.algo {
        Some(v) => vec![v],
        None => Variant::ALL.to_vec(),
    };
    fs::create_dir_all(&common.out_dir)?;
    let mut rows = Vec::new();
    for value in &values {
        for &variant in &variants {
            let mut config = base.clone();
            config.set(&key, value).map_err(|reason| OslError::InvalidParam { name: "sweep", reason })?;
            config.swarm.variant = variant;
            let stats = batch(&config, args.batch.workers)?;
            let name = format!("summary_{key}_{value}_{variant}.json");
            write_summary(&Summary::new(&config, &stats), create(&common.out_dir.join(name))?)?;
            rows.push(SweepRow {
                key: key.clone(),
                value: value.clone(),
                variant,
                mst: stats.mean_search_time,
                sr: stats.success_rate,
                run_count: stats.runs,
            });
        }
    }
    write_sweep_table(&rows, create(&common.out_dir.join("sweep.csv"))?)?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}
