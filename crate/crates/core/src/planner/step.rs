use serde::{Deserialize, Serialize};

use super::direction::strictly_better;
use super::{DirectionAction, MeasurementLog};
use crate::estimator::{estimate_source, GaussianSummary, ParticleCloud};
use crate::plume::SearchVolume;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepAction {
    /// Step length in grid cells, `1..=l_max`.
    pub l: usize,
    pub endpoint: Vec3,
    pub reward: f64,
}

/// Largest step: `floor(0.1 / zeta)` for `zeta < 0.1`, else 1; never above
/// `ceiling`.
pub fn max_step(zeta: f64, ceiling: usize) -> usize {
    let ceiling = ceiling.max(1);
    if zeta >= 0.1 {
        return 1;
    }
    if zeta <= 0.0 {
        return ceiling;
    }
    // the epsilon keeps exact quotients such as 0.1 / 0.02 from flooring low
    let l = (0.1 / zeta + 1e-9).floor() as usize;
    l.clamp(1, ceiling)
}

/// Entropy weight `h1 = kappa1 * sqrt(trace sigma)`.
pub fn entropy_weight(kappa1: f64, summary: &GaussianSummary) -> f64 {
    kappa1 * summary.spread()
}

/// Revisit weight `h2 = kappa2 * min(1, D / diagonal)`.
pub fn history_weight(kappa2: f64, distance: f64, diagonal: f64) -> f64 {
    kappa2 * (distance / diagonal).min(1.0)
}

/// `Z(l)` for `l = 1..=l_max`: logged points strictly inside the sphere
/// spanned by the move of `l` cells, minus those already inside the sphere
/// of `l - 1` cells.
pub fn sphere_point_counts(
    agent_pos: &Vec3,
    direction: DirectionAction,
    log: &MeasurementLog,
    g: f64,
    l_max: usize,
) -> Vec<usize> {
    let unit = direction.vector() * g;
    let mut inside = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let half = unit * (l as f64 * 0.5);
        let center = agent_pos + half;
        let radius = half.norm();
        inside.push(log.points().iter().filter(|p| (*p - center).norm() < radius).count());
    }
    let mut z = Vec::with_capacity(l_max);
    for (i, &count) in inside.iter().enumerate() {
        // nested spheres: the difference cannot go negative
        z.push(if i == 0 { count } else { count.saturating_sub(inside[i - 1]) });
    }
    z
}

/// Step minimizing `D(l) + h2 Z(l)` over in-volume endpoints; ties go to the
/// shorter step. Falls back to a clamped single step if every endpoint
/// leaves the volume.
#[allow(clippy::too_many_arguments)]
pub fn choose_step(
    agent_pos: &Vec3,
    direction: DirectionAction,
    cloud: &ParticleCloud,
    log: &MeasurementLog,
    volume: &SearchVolume,
    l_max: usize,
    h2: f64,
) -> StepAction {
    let l_max = l_max.max(1);
    let estimate = estimate_source(cloud);
    let z = sphere_point_counts(agent_pos, direction, log, volume.g, l_max);
    let unit = direction.vector() * volume.g;
    let mut best: Option<StepAction> = None;
    for l in 1..=l_max {
        let endpoint = agent_pos + unit * l as f64;
        if !volume.contains(&endpoint) {
            continue;
        }
        let reward = (endpoint - estimate).norm() + h2 * z[l - 1] as f64;
        // minimizing: a candidate wins only if clearly lower
        if best.is_none_or(|b| strictly_better(-reward, -b.reward)) {
            best = Some(StepAction { l, endpoint, reward });
        }
    }
    best.unwrap_or_else(|| {
        let endpoint = volume.clamp(agent_pos + unit);
        StepAction {
            l: 1,
            endpoint,
            reward: (endpoint - estimate).norm() + h2 * z[0] as f64,
        }
    })
}
