//! Episode orchestration for a team of agents and the Monte Carlo harness.

mod agent;
mod episode;
mod monte_carlo;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{OslError, Result};
use crate::estimator::FilterParams;
use crate::planner::PlannerParams;
use crate::plume::{PlumeParams, SearchVolume, SourceConfig};
use crate::Vec3;

pub use agent::{AgentState, HaltReason};
pub use episode::{
    check_declaration, neighbors, run_episode, run_episode_with, AgentOutcome, AgentSpec, Declaration, Episode,
    RunResult, TrajectoryRow,
};
pub use monte_carlo::{monte_carlo, run_seed, MCStats};

/// Algorithm variant: which filter and which step rule the agents use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Collaborative filter with adaptive steps.
    MucOsl,
    /// Bootstrap filter at fixed count with single-cell steps.
    ColInf,
    /// Collaborative filter with single-cell steps.
    ColPf,
    /// Bootstrap filter with adaptive steps.
    AdapPp,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::MucOsl, Variant::ColInf, Variant::ColPf, Variant::AdapPp];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::MucOsl => "muc-osl",
            Variant::ColInf => "col-inf",
            Variant::ColPf => "col-pf",
            Variant::AdapPp => "adap-pp",
        }
    }

    /// Position update and adaptive particle count.
    pub fn collaborative_filter(self) -> bool {
        matches!(self, Variant::MucOsl | Variant::ColPf)
    }

    /// Step length from the diffusion ratio instead of a single cell.
    pub fn adaptive_step(self) -> bool {
        matches!(self, Variant::MucOsl | Variant::AdapPp)
    }

    /// Values per neighbour exchange: `(as counted in the cost table, as
    /// actually sent)`. Gaussian variants send the mean and covariance; the
    /// bootstrap variants send every particle (position and weight). The
    /// actual figure adds the sensing position, detection and cue flag, and
    /// stores the covariance as its six unique entries.
    pub fn payload_values(self, n_particles: usize) -> (usize, usize) {
        const EXTRA: usize = 3 + 1 + 1;
        if self.collaborative_filter() {
            (3 + 9, 3 + 6 + EXTRA)
        } else {
            (4 * n_particles, 4 * n_particles + EXTRA)
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (valid: muc-osl, col-inf, col-pf, adap-pp)"))
    }
}

/// Team-level settings of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub uav_count: usize,
    /// Neighbour range (m); 0 disables exchange.
    pub comm_radius: f64,
    pub variant: Variant,
    pub k_max: usize,
    /// Declare once `sqrt(trace sigma)` drops below this (m).
    pub delta_dec: f64,
    /// A declaration succeeds within this distance of the source (m).
    pub eps_succ: f64,
    /// Flying speed (m/s).
    pub speed: f64,
    /// Seconds spent per hover point.
    pub hover_secs: f64,
    /// Seconds spent per turn.
    pub turn_secs: f64,
    /// Per-agent search time cap (s).
    pub max_search_time: f64,
    pub filter: FilterParams,
    pub planner: PlannerParams,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            uav_count: 3,
            comm_radius: 30.0,
            variant: Variant::MucOsl,
            k_max: 800,
            delta_dec: 5.0,
            eps_succ: 5.0,
            speed: 1.0,
            hover_secs: 1.0,
            turn_secs: 1.0,
            max_search_time: 1200.0,
            filter: FilterParams::default(),
            planner: PlannerParams::default(),
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |name: &'static str, reason: &str| {
            Err(OslError::InvalidParam {
                name,
                reason: reason.to_string(),
            })
        };
        if self.uav_count == 0 {
            return invalid("uav_count", "need at least one agent");
        }
        if self.k_max == 0 {
            return invalid("k_max", "need at least one iteration");
        }
        if !(self.comm_radius >= 0.0) || !self.comm_radius.is_finite() {
            return invalid("comm_radius", "must be finite and >= 0");
        }
        for (name, v) in [
            ("delta_dec", self.delta_dec),
            ("eps_succ", self.eps_succ),
            ("speed", self.speed),
            ("max_search_time", self.max_search_time),
        ] {
            crate::error::require_positive(name, v)?;
        }
        for (name, v) in [("hover_secs", self.hover_secs), ("turn_secs", self.turn_secs)] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(name, "must be finite and >= 0");
            }
        }
        let f = &self.filter;
        if f.n_min == 0 || f.n_min > f.n_max {
            return invalid("n_min", "need 1 <= n_min <= n_max");
        }
        if f.n_init < f.n_min || f.n_init > f.n_max {
            return invalid("n", "initial particle count must lie in [n_min, n_max]");
        }
        crate::error::require_positive("gamma1", f.gamma1)?;
        crate::error::require_positive("gamma2", f.gamma2)?;
        crate::error::require_positive("env_pu_scale", f.env_pu_scale)?;
        if f.delta_c == 0 {
            return invalid("delta_c", "cue window must be >= 1");
        }
        let p = &self.planner;
        for (name, v) in [("kappa1", p.kappa1), ("kappa2", p.kappa2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(name, "must be finite and >= 0");
            }
        }
        if p.step_ceiling == 0 {
            return invalid("step_ceiling", "must be >= 1");
        }
        if let Some(t) = p.conc_threshold {
            crate::error::require_positive("conc_threshold", t)?;
        }
        Ok(())
    }
}

/// The environment shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub plume: PlumeParams,
    pub volume: SearchVolume,
    pub source: SourceConfig,
    pub energy: EnergyParams,
}

impl World {
    pub fn validate(&self) -> Result<()> {
        self.plume.validate()?;
        self.volume.validate(&self.plume)?;
        self.source.validate(&self.volume)?;
        self.energy.validate()
    }
}

/// Start positions: `[10,10,5]`, `[30,10,5]`, `[60,10,5]`, then every 20 m
/// along x, wrapping to a new row 10 m further in y.
pub fn initial_positions(count: usize, volume: &SearchVolume) -> Vec<Vec3> {
    const FIRST: [f64; 3] = [10.0, 30.0, 60.0];
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let x = FIRST.get(i).copied().unwrap_or(FIRST[2] + 20.0 * i.saturating_sub(2) as f64);
        // positions on the far wall stay there; only overshoot wraps
        let row = ((x / volume.lx).ceil() - 1.0).max(0.0);
        let x = x - row * volume.lx;
        let p = Vec3::new(x, 10.0 + 10.0 * row, 5.0);
        out.push(volume.clamp(p));
    }
    out
}
