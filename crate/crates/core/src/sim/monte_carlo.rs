use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode_with, AgentSpec, RunResult};
use super::{SwarmConfig, World};
use crate::error::{OslError, Result};

/// Seed of run `index` in a batch.
pub fn run_seed(master_seed: u64, index: usize) -> u64 {
    master_seed.wrapping_add(index as u64)
}

/// Batch statistics. Per-run results carry no trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCStats {
    pub master_seed: u64,
    pub runs: usize,
    pub successes: usize,
    /// Mean search time over successful runs; absent without any.
    pub mean_search_time: Option<f64>,
    pub success_rate: f64,
    pub results: Vec<RunResult>,
}

impl MCStats {
    pub fn from_results(master_seed: u64, results: Vec<RunResult>) -> Self {
        let times: Vec<f64> = results.iter().filter_map(|r| r.search_time).collect();
        let runs = results.len();
        let successes = times.len();
        let mean_search_time = (!times.is_empty()).then(|| times.iter().sum::<f64>() / successes as f64);
        let success_rate = if runs == 0 { 0.0 } else { successes as f64 / runs as f64 };
        Self {
            master_seed,
            runs,
            successes,
            mean_search_time,
            success_rate,
            results,
        }
    }

    pub fn failures(&self) -> usize {
        self.runs - self.successes
    }
}

/// Runs `run_count` episodes with seeds `master_seed + index` on
/// `worker_count` threads. The result does not depend on the thread count.
pub fn monte_carlo(
    config: &SwarmConfig,
    world: &World,
    run_count: usize,
    master_seed: u64,
    worker_count: usize,
) -> Result<MCStats> {
    if run_count == 0 {
        return Err(OslError::InvalidParam {
            name: "runs",
            reason: "need at least one run".into(),
        });
    }
    let specs = AgentSpec::team(config, world);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count.max(1))
        .build()
        .map_err(|e| OslError::InvalidParam {
            name: "workers",
            reason: e.to_string(),
        })?;
    let results = pool.install(|| {
        (0..run_count)
            .into_par_iter()
            .map(|i| run_episode_with(config, world, run_seed(master_seed, i), &specs, false))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(MCStats::from_results(master_seed, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plume::SourceConfig;
    use crate::Vec3;

    #[test]
    fn stats_arithmetic() {
        let mk = |t: Option<f64>| RunResult {
            seed: 0,
            success: t.is_some(),
            search_time: t,
            declaring_agent: t.map(|_| 0),
            estimate_error: t.map(|_| 1.0),
            iterations: 3,
            agents: vec![],
            trajectory: vec![],
        };
        let s = MCStats::from_results(5, vec![mk(Some(100.0)), mk(None), mk(Some(200.0)), mk(None)]);
        assert_eq!(s.mean_search_time, Some(150.0));
        assert_eq!(s.success_rate, 0.5);
        assert_eq!(s.failures(), 2);
        let none = MCStats::from_results(5, vec![mk(None)]);
        assert_eq!(none.mean_search_time, None);
        assert_eq!(none.success_rate, 0.0);
    }

    #[test]
    fn zero_runs_rejected() {
        let world = World {
            plume: Default::default(),
            volume: Default::default(),
            source: SourceConfig { position: Vec3::new(50.0, 30.0, 15.0) },
            energy: Default::default(),
        };
        assert!(monte_carlo(&SwarmConfig::default(), &world, 0, 1, 1).is_err());
    }
}
