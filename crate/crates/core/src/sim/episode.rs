use serde::{Deserialize, Serialize};

use super::agent::{AgentState, HaltReason};
use super::{initial_positions, SwarmConfig, World};
use crate::energy::EnergyLedger;
use crate::error::Result;
use crate::estimator::{
    collaborative_step, confidence_factor, ConfidenceFactor, GaussianSummary, NeighborMessage,
};
use crate::planner::{
    choose_direction, choose_step, entropy_weight, history_weight, max_step, StepAction,
};
use crate::plume::{default_conc_threshold, diffusion_ratio, sample_detection, Detection, SourceConfig};
use crate::Vec3;

/// Bits per exchanged or processed value.
const BITS_PER_VALUE: u64 = 64;

/// Identity and start position of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: usize,
    pub start: Vec3,
}

impl AgentSpec {
    /// The default team for `config` in `world`.
    pub fn team(config: &SwarmConfig, world: &World) -> Vec<AgentSpec> {
        initial_positions(config.uav_count, &world.volume)
            .into_iter()
            .enumerate()
            .map(|(id, start)| AgentSpec { id, start })
            .collect()
    }
}

/// One trajectory CSV line: an agent's state at one iteration.
///
/// Position is where the agent sensed; `t_cum` and `e_cum` include the move
/// made at the end of the iteration. `n_particles` and `ess` describe the
/// cloud at the weight update, before any resizing. A declaring agent does
/// not move and reports `dir_index = -1`, `step = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub uav_id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub detection: u32,
    pub n_particles: usize,
    pub ess: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub est_z: f64,
    pub spread: f64,
    pub dir_index: i32,
    pub step: usize,
    pub turned: bool,
    pub t_cum: f64,
    pub e_cum: f64,
}

/// Final per-agent totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentOutcome {
    pub id: usize,
    pub position: Vec3,
    pub ledger: EnergyLedger,
    pub hover_time: f64,
    pub turn_time: f64,
    pub halted: Option<HaltReason>,
    pub cues: usize,
}

impl AgentOutcome {
    pub fn search_time(&self) -> f64 {
        self.ledger.fly_time + self.hover_time + self.turn_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub success: bool,
    /// Search time of the declaring agent; present iff `success`.
    pub search_time: Option<f64>,
    pub declaring_agent: Option<usize>,
    /// Distance from the declared estimate to the source.
    pub estimate_error: Option<f64>,
    pub iterations: usize,
    pub agents: Vec<AgentOutcome>,
    pub trajectory: Vec<TrajectoryRow>,
}

impl RunResult {
    /// Team-wide sum of the agents' ledgers.
    pub fn team_ledger(&self) -> EnergyLedger {
        let mut total = EnergyLedger::new();
        for a in &self.agents {
            total.absorb(&a.ledger);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Declaration {
    /// Spread still at or above the threshold.
    Pending,
    Success,
    /// Converged somewhere else.
    Failure,
}

/// Declares when `sqrt(trace sigma) < delta_dec`; the declaration succeeds
/// iff the mean lies within `eps_succ` of the source.
pub fn check_declaration(summary: &GaussianSummary, source: &Vec3, delta_dec: f64, eps_succ: f64) -> Declaration {
    if !(summary.spread() < delta_dec) {
        Declaration::Pending
    } else if (summary.mu - source).norm() <= eps_succ {
        Declaration::Success
    } else {
        Declaration::Failure
    }
}

/// For each position, the indices of the other positions within
/// `comm_radius`. A zero radius isolates everyone.
pub fn neighbors(positions: &[Vec3], comm_radius: f64) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); positions.len()];
    if !(comm_radius > 0.0) {
        return out;
    }
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            if (positions[i] - positions[j]).norm() <= comm_radius {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    out
}

/// A running episode.
pub struct Episode<'a> {
    config: &'a SwarmConfig,
    world: &'a World,
    seed: u64,
    agents: Vec<AgentState>,
    k: usize,
    record: bool,
    trajectory: Vec<TrajectoryRow>,
    /// `(agent index, estimate error)` of the successful declaration.
    winner: Option<(usize, f64)>,
    conc_threshold: f64,
}

impl<'a> Episode<'a> {
    pub fn new(config: &'a SwarmConfig, world: &'a World, seed: u64, specs: &[AgentSpec], record: bool) -> Self {
        let agents = specs
            .iter()
            .map(|s| AgentState::new(s.id, s.start, seed, config, world))
            .collect();
        Self {
            config,
            world,
            seed,
            agents,
            k: 0,
            record,
            trajectory: Vec::new(),
            winner: None,
            conc_threshold: config
                .planner
                .conc_threshold
                .unwrap_or_else(|| default_conc_threshold(&world.plume)),
        }
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    /// Whether another iteration would run.
    pub fn is_running(&self) -> bool {
        self.winner.is_none() && self.k < self.config.k_max && self.agents.iter().any(AgentState::is_active)
    }

    /// Advances one iteration. Returns `false` once the episode is over.
    pub fn step_iteration(&mut self) -> Result<bool> {
        if !self.is_running() {
            return Ok(false);
        }
        self.k += 1;
        let k = self.k;
        let world = self.world;
        let config = self.config;
        let source = &world.source;

        // sensing and start-of-iteration snapshots
        let active: Vec<usize> = (0..self.agents.len()).filter(|&i| self.agents[i].is_active()).collect();
        let mut detections = Vec::with_capacity(active.len());
        for &i in &active {
            let agent = &mut self.agents[i];
            let det = sample_detection(&mut agent.sense_rng, &agent.position, &world.plume, source, k);
            agent.ledger.record_hover();
            agent.hover_time += config.hover_secs;
            agent.log.push(agent.position);
            detections.push(det);
        }
        let snapshots: Vec<NeighborMessage> = active
            .iter()
            .zip(&detections)
            .map(|(&i, det)| {
                let a = &self.agents[i];
                NeighborMessage {
                    sender: a.id,
                    summary: a.summary,
                    sender_pos: a.position,
                    detection: det.count,
                    cue_captured: a.cue_captured() || det.count > 0,
                }
            })
            .collect();
        let positions: Vec<Vec3> = snapshots.iter().map(|m| m.sender_pos).collect();
        let adjacency = neighbors(&positions, config.comm_radius);

        for (slot, &i) in active.iter().enumerate() {
            let messages: Vec<(NeighborMessage, ConfidenceFactor)> = adjacency[slot]
                .iter()
                .map(|&j| {
                    let beta = confidence_factor(&snapshots[slot].summary, &snapshots[j].summary)?;
                    Ok((snapshots[j], beta))
                })
                .collect::<Result<_>>()?;
            self.act(i, &detections[slot], &messages)?;
            if self.winner.is_some() {
                break;
            }
        }
        Ok(self.is_running())
    }

    /// Filter, declaration check, planning and movement for one agent.
    fn act(&mut self, i: usize, det: &Detection, messages: &[(NeighborMessage, ConfidenceFactor)]) -> Result<()> {
        let k = self.k;
        let world = self.world;
        let config = self.config;
        let variant = config.variant;
        let volume = &world.volume;
        let source = &world.source.position;
        let agent = &mut self.agents[i];

        let (_, actual_values) = variant.payload_values(agent.cloud.len());
        agent
            .ledger
            .record_comm(actual_values as u64 * BITS_PER_VALUE * messages.len() as u64);

        // a sensor overlapping the source has arrived
        if (agent.position - source).norm() < world.plume.a {
            let error = (agent.summary.mu - source).norm();
            self.winner = Some((i, error));
            let row = declaring_row(k, agent, det, None, &world.energy);
            self.push_row(row);
            return Ok(());
        }

        let report = collaborative_step(
            &mut agent.cloud,
            &config.filter,
            variant.collaborative_filter(),
            k,
            config.k_max,
            det,
            messages,
            &world.plume,
            volume,
            &mut agent.filter_rng,
        );
        agent.summary = report.summary;
        let filter_values = 4 * report.n_updated as u64 * (1 + messages.len() as u64);

        match check_declaration(&agent.summary, source, config.delta_dec, config.eps_succ) {
            Declaration::Pending => {}
            outcome => {
                agent.ledger.record_compute(filter_values * BITS_PER_VALUE);
                if outcome == Declaration::Success {
                    self.winner = Some((i, (agent.summary.mu - source).norm()));
                } else {
                    agent.halted = Some(HaltReason::WrongDeclaration);
                }
                let row = declaring_row(k, agent, det, Some((report.ess, report.n_updated)), &world.energy);
                self.push_row(row);
                return Ok(());
            }
        }

        let h1 = entropy_weight(config.planner.kappa1, &agent.summary);
        let choice = choose_direction(&agent.position, &agent.cloud, &world.plume, volume, h1)?;
        let l_max = if variant.adaptive_step() {
            let estimate = SourceConfig { position: volume.clamp(agent.summary.mu) };
            let zeta = diffusion_ratio(&world.plume, &estimate, volume, self.conc_threshold)?;
            max_step(zeta, config.planner.step_ceiling)
        } else {
            1
        };
        let d_now = (agent.position - agent.summary.mu).norm();
        let h2 = history_weight(config.planner.kappa2, d_now, volume.diagonal());
        let step: StepAction = choose_step(&agent.position, choice.action, &agent.cloud, &agent.log, volume, l_max, h2);
        let planner_values = choice.work + (l_max * agent.log.len()) as u64;
        agent
            .ledger
            .record_compute((filter_values + planner_values) * BITS_PER_VALUE);

        let sensed_at = agent.position;
        agent.ledger.record_flight((step.endpoint - agent.position).norm(), config.speed)?;
        agent.position = step.endpoint;
        let turned = agent.last_direction.is_some_and(|d| d != choice.action);
        if turned {
            agent.ledger.record_turn();
            agent.turn_time += config.turn_secs;
        }
        agent.last_direction = Some(choice.action);

        let (energy, over_budget) = agent.ledger.total_and_budget(&world.energy);
        if over_budget {
            agent.halted = Some(HaltReason::EnergyBudget);
        } else if agent.search_time() > config.max_search_time {
            agent.halted = Some(HaltReason::TimeCap);
        }

        let row = TrajectoryRow {
            iter: k,
            uav_id: agent.id,
            x: sensed_at.x,
            y: sensed_at.y,
            z: sensed_at.z,
            detection: det.count,
            n_particles: report.n_updated,
            ess: report.ess,
            est_x: agent.summary.mu.x,
            est_y: agent.summary.mu.y,
            est_z: agent.summary.mu.z,
            spread: agent.summary.spread(),
            dir_index: choice.action.index() as i32,
            step: step.l,
            turned,
            t_cum: agent.search_time(),
            e_cum: energy,
        };
        self.push_row(row);
        Ok(())
    }

    fn push_row(&mut self, row: TrajectoryRow) {
        if self.record {
            self.trajectory.push(row);
        }
    }

    /// Runs to completion and packages the result.
    pub fn run(mut self) -> Result<RunResult> {
        while self.step_iteration()? {}
        Ok(self.finish())
    }

    pub fn finish(self) -> RunResult {
        let agents = self
            .agents
            .iter()
            .map(|a| AgentOutcome {
                id: a.id,
                position: a.position,
                ledger: a.ledger,
                hover_time: a.hover_time,
                turn_time: a.turn_time,
                halted: a.halted,
                cues: a.cloud.cue_count(),
            })
            .collect::<Vec<_>>();
        let (success, search_time, declaring_agent, estimate_error) = match self.winner {
            Some((i, err)) => (true, Some(agents[i].search_time()), Some(agents[i].id), Some(err)),
            None => (false, None, None, None),
        };
        RunResult {
            seed: self.seed,
            success,
            search_time,
            declaring_agent,
            estimate_error,
            iterations: self.k,
            agents,
            trajectory: self.trajectory,
        }
    }
}

fn declaring_row(
    k: usize,
    agent: &AgentState,
    det: &Detection,
    filter: Option<(f64, usize)>,
    energy: &crate::energy::EnergyParams,
) -> TrajectoryRow {
    let (ess, n_particles) =
        filter.unwrap_or_else(|| (crate::estimator::effective_sample_size(&agent.cloud), agent.cloud.len()));
    TrajectoryRow {
        iter: k,
        uav_id: agent.id,
        x: agent.position.x,
        y: agent.position.y,
        z: agent.position.z,
        detection: det.count,
        n_particles,
        ess,
        est_x: agent.summary.mu.x,
        est_y: agent.summary.mu.y,
        est_z: agent.summary.mu.z,
        spread: agent.summary.spread(),
        dir_index: -1,
        step: 0,
        turned: false,
        t_cum: agent.search_time(),
        e_cum: agent.ledger.breakdown(energy).total(),
    }
}

/// Runs one episode of the default team, recording the trajectory.
pub fn run_episode(config: &SwarmConfig, world: &World, seed: u64) -> Result<RunResult> {
    let specs = AgentSpec::team(config, world);
    run_episode_with(config, world, seed, &specs, true)
}

/// Runs one episode with an explicit team.
pub fn run_episode_with(
    config: &SwarmConfig,
    world: &World,
    seed: u64,
    specs: &[AgentSpec],
    record: bool,
) -> Result<RunResult> {
    Episode::new(config, world, seed, specs, record).run()
}
