use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    col_pu, effective_sample_size, env_pu, EnvPuMode, estimate_source, fit_gaussian, gbest, maybe_resample,
    select_move_count, update_particle_count, update_weights, ConfidenceFactor, GaussianSummary, NeighborMessage,
    ParticleCloud,
};
use crate::plume::{Detection, PlumeParams, SearchVolume};
use crate::Vec3;

/// Where in the iteration the exchanged Gaussian summary is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStage {
    /// After position update and count adaptation (the last step).
    Propagated,
    /// Right after the weight update, on the weighted posterior.
    Posterior,
}

impl FitStage {
    pub fn as_str(self) -> &'static str {
        match self {
            FitStage::Propagated => "propagated",
            FitStage::Posterior => "posterior",
        }
    }
}

impl std::str::FromStr for FitStage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "propagated" => Ok(FitStage::Propagated),
            "posterior" => Ok(FitStage::Posterior),
            other => Err(format!("unknown fit stage `{other}` (expected propagated|posterior)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Initial (and, for the fixed-count filter, permanent) particle count.
    pub n_init: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Cue window for the capture frequency.
    pub delta_c: usize,
    pub fit_stage: FitStage,
    pub env_pu: EnvPuMode,
    /// Longest upwind move in bounded mode (m).
    pub env_pu_scale: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            n_init: 100,
            n_min: 20,
            n_max: 160,
            gamma1: 1.8,
            gamma2: 4.0,
            delta_c: 3,
            fit_stage: FitStage::Propagated,
            env_pu: EnvPuMode::Bounded,
            env_pu_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStepReport {
    /// Effective sample size right after the weight update.
    pub ess: f64,
    pub resampled: bool,
    pub moved: usize,
    /// Particles that took part in the weight update.
    pub n_updated: usize,
    pub summary: GaussianSummary,
}

/// One collaborative filter iteration for a single agent.
///
/// With `collaborative = false` this is a plain bootstrap filter: weight
/// update and resampling only, at a fixed particle count.
#[allow(clippy::too_many_arguments)]
pub fn collaborative_step<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    params: &FilterParams,
    collaborative: bool,
    k: usize,
    k_max: usize,
    own: &Detection,
    messages: &[(NeighborMessage, ConfidenceFactor)],
    plume: &PlumeParams,
    volume: &SearchVolume,
    rng: &mut R,
) -> FilterStepReport {
    if own.count > 0 {
        cloud.record_cue(k);
    }
    let cue_captured = cloud.cue_count() > 0;
    let n_updated = cloud.len();

    update_weights(cloud, own, &own.sensed_at, messages, plume);
    let ess = effective_sample_size(cloud);
    let posterior = (params.fit_stage == FitStage::Posterior).then(|| fit_gaussian(cloud));

    let resampled = maybe_resample(cloud, rng);

    let mut moved = 0;
    if collaborative {
        let n = cloud.len();
        moved = select_move_count(n, k, k_max, params.gamma1, params.gamma2).min(n);
        let mut selected = index::sample(rng, n, moved).into_vec();
        selected.sort_unstable();

        let up = plume.upwind();
        env_pu(cloud, &selected, up.y.atan2(up.x), params.env_pu, params.env_pu_scale, rng, volume);

        if !cue_captured {
            let target = gbest(
                messages
                    .iter()
                    .filter(|(m, _)| m.cue_captured)
                    .map(|(m, b)| (m.summary.mu, b.value())),
            );
            if let Some(target) = target {
                col_pu(cloud, &selected, &target, rng, volume);
            }
        }

        let estimate: Vec3 = estimate_source(cloud);
        update_particle_count(cloud, &own.sensed_at, &estimate, k, params.delta_c, rng);
    }

    FilterStepReport {
        ess,
        resampled,
        moved,
        n_updated,
        summary: posterior.unwrap_or_else(|| fit_gaussian(cloud)),
    }
}
