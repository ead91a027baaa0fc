//! Deterministic persistence: trajectory CSV, batch summary JSON and the
//! sweep table. Floats carry 6 significant digits.

use std::io::Write;

use serde::Serialize;

use crate::config::RunConfig;
use crate::energy::EnergyParams;
use crate::error::Result;
use crate::sim::{MCStats, RunResult, TrajectoryRow, Variant};

pub const TRAJECTORY_HEADER: &str =
    "iter,uav_id,x,y,z,detection,n_particles,ess,est_x,est_y,est_z,spread,dir_index,step,turned,t_cum,e_cum";

pub const SWEEP_HEADER: &str = "key,value,variant,mst,sr,run_count";

/// `x` with 6 significant digits, trailing zeros dropped. Magnitudes outside
/// `[1e-5, 1e15)` use exponent notation.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // digits and exponent come from the rounded mantissa so 999999.7 -> 1e6
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa.to_string()));
    }
    let sign = if x < 0.0 { "-" } else { "" };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 5 {
        format!("{digits}{}", "0".repeat((exp - 5) as usize))
    } else if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{}", trim_zeros(body))
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to 6 significant digits.
pub fn round6(x: f64) -> f64 {
    fmt_sig6(x).parse().unwrap_or(x)
}

fn row_line(r: &TrajectoryRow) -> String {
    let f = fmt_sig6;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.iter,
        r.uav_id,
        f(r.x),
        f(r.y),
        f(r.z),
        r.detection,
        r.n_particles,
        f(r.ess),
        f(r.est_x),
        f(r.est_y),
        f(r.est_z),
        f(r.spread),
        r.dir_index,
        r.step,
        u8::from(r.turned),
        f(r.t_cum),
        f(r.e_cum),
    )
}

/// Writes the trajectory rows under the fixed header.
pub fn write_trajectory<W: Write>(rows: &[TrajectoryRow], mut out: W) -> Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", row_line(r))?;
    }
    out.flush()?;
    Ok(())
}

/// Energy split of one agent (kJ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentEnergy {
    pub id: usize,
    #[serde(rename = "E_f")]
    pub e_f: f64,
    #[serde(rename = "E_h")]
    pub e_h: f64,
    #[serde(rename = "E_b")]
    pub e_b: f64,
    #[serde(rename = "E_C")]
    pub e_c: f64,
    #[serde(rename = "E_T")]
    pub e_t: f64,
    #[serde(rename = "E_M")]
    pub e_m: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub hovers: u64,
    pub turns: u64,
    pub distance: f64,
    pub search_time: f64,
    pub halted: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub success: bool,
    pub search_time: Option<f64>,
    pub declaring_agent: Option<usize>,
    pub estimate_error: Option<f64>,
    pub iterations: usize,
    pub agents: Vec<AgentEnergy>,
}

/// One batch: statistics, per-run records and the effective configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algo: String,
    pub master_seed: u64,
    pub config_hash: String,
    pub runs: usize,
    pub successes: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub mean_search_time: Option<f64>,
    pub search_times: Vec<Option<f64>>,
    pub per_run: Vec<RunRecord>,
    pub config: String,
}

fn agent_energy(result: &RunResult, energy: &EnergyParams) -> Vec<AgentEnergy> {
    result
        .agents
        .iter()
        .map(|a| {
            let b = a.ledger.breakdown(energy);
            let (e_f, e_h, e_b) = (round6(b.flying), round6(b.hovering), round6(b.turning));
            AgentEnergy {
                id: a.id,
                e_f,
                e_h,
                e_b,
                e_c: round6(b.compute),
                e_t: round6(b.comm),
                // the movement total is the sum of the rounded parts
                e_m: round6(e_f + e_h + e_b),
                e: round6(b.total()),
                hovers: a.ledger.hover_points,
                turns: a.ledger.turn_points,
                distance: round6(a.ledger.fly_distance),
                search_time: round6(a.search_time()),
                halted: a.halted.map(|h| h.as_str()),
            }
        })
        .collect()
}

impl Summary {
    pub fn new(config: &RunConfig, stats: &MCStats) -> Self {
        let per_run: Vec<RunRecord> = stats
            .results
            .iter()
            .map(|r| RunRecord {
                seed: r.seed,
                success: r.success,
                search_time: r.search_time.map(round6),
                declaring_agent: r.declaring_agent,
                estimate_error: r.estimate_error.map(round6),
                iterations: r.iterations,
                agents: agent_energy(r, &config.energy),
            })
            .collect();
        Self {
            algo: config.swarm.variant.to_string(),
            master_seed: stats.master_seed,
            config_hash: config.hash(),
            runs: stats.runs,
            successes: stats.successes,
            failures: stats.runs - stats.successes,
            success_rate: round6(stats.success_rate),
            mean_search_time: stats.mean_search_time.map(round6),
            search_times: per_run.iter().map(|r| r.search_time).collect(),
            per_run,
            config: config.to_canonical(),
        }
    }
}

pub fn write_summary<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub key: String,
    pub value: String,
    pub variant: Variant,
    pub mst: Option<f64>,
    pub sr: f64,
    pub run_count: usize,
}

/// Sweep table as CSV; a missing MST (no successes) is an empty field.
pub fn write_sweep_table<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let mst = r.mst.map(fmt_sig6).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.key, r.value, r.variant, mst, fmt_sig6(r.sr), r.run_count)?;
    }
    out.flush()?;
    Ok(())
}
