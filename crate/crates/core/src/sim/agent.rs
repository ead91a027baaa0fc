use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SwarmConfig, World};
use crate::energy::EnergyLedger;
use crate::estimator::{GaussianSummary, ParticleCloud};
use crate::planner::{DirectionAction, MeasurementLog};
use crate::Vec3;

/// Why an agent stopped before the episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HaltReason {
    /// Declared with an estimate outside the success tolerance.
    WrongDeclaration,
    EnergyBudget,
    TimeCap,
}

impl HaltReason {
    pub fn as_str(self) -> &'static str {
        match self {
            HaltReason::WrongDeclaration => "wrong-declaration",
            HaltReason::EnergyBudget => "energy-budget",
            HaltReason::TimeCap => "time-cap",
        }
    }
}

/// Per-agent state carried across iterations.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub position: Vec3,
    pub cloud: ParticleCloud,
    /// Latest fitted summary (what neighbours receive next iteration).
    pub summary: GaussianSummary,
    pub log: MeasurementLog,
    pub ledger: EnergyLedger,
    pub hover_time: f64,
    pub turn_time: f64,
    pub last_direction: Option<DirectionAction>,
    pub halted: Option<HaltReason>,
    /// Sensor noise stream.
    pub(super) sense_rng: ChaCha8Rng,
    /// Filter and planner stream.
    pub(super) filter_rng: ChaCha8Rng,
}

impl AgentState {
    /// Fresh agent at `start` with a uniform prior. Its random streams depend
    /// only on `(seed, id)`, never on the rest of the team.
    pub fn new(id: usize, start: Vec3, seed: u64, config: &SwarmConfig, world: &World) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * id as u64 + k);
            rng
        };
        let sense_rng = stream(0);
        let mut filter_rng = stream(1);
        let f = &config.filter;
        let cloud = ParticleCloud::uniform(f.n_init, f.n_min, f.n_max, &world.volume, &mut filter_rng);
        Self {
            id,
            position: start,
            cloud,
            summary: GaussianSummary::uniform_box(world.volume.extents()),
            log: MeasurementLog::new(),
            ledger: EnergyLedger::new(),
            hover_time: 0.0,
            turn_time: 0.0,
            last_direction: None,
            halted: None,
            sense_rng,
            filter_rng,
        }
    }

    pub fn is_active(&self) -> bool {
        self.halted.is_none()
    }

    pub fn cue_captured(&self) -> bool {
        self.cloud.cue_count() > 0
    }

    pub fn fly_time(&self) -> f64 {
        self.ledger.fly_time
    }

    /// Flying plus hovering plus turning time (s).
    pub fn search_time(&self) -> f64 {
        self.ledger.fly_time + self.hover_time + self.turn_time
    }
}
