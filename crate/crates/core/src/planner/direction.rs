use super::DirectionAction;
use crate::error::{OslError, Result};
use crate::estimator::{estimate_source, ParticleCloud};
use crate::plume::{clamped_encounter_rate, ln_detection_pmf, typical_length, PlumeParams, SearchVolume};
use crate::Vec3;

/// Predictive CDF mass at which the measurement enumeration stops.
const PREDICTIVE_MASS: f64 = 0.999;
const MAX_COUNT: u32 = 50;

fn entropy_of(weights: impl Iterator<Item = f64>) -> f64 {
    -weights.filter(|&w| w > 0.0).map(|w| w * w.ln()).sum::<f64>()
}

/// Shannon entropy of the particle weights (nats).
pub fn entropy(cloud: &ParticleCloud) -> f64 {
    entropy_of(cloud.weights())
}

pub fn distance_to_estimate(pos: &Vec3, cloud: &ParticleCloud) -> f64 {
    (pos - estimate_source(cloud)).norm()
}

/// `D + h1 H` at `pos`.
pub fn value_function(pos: &Vec3, cloud: &ParticleCloud, h1: f64) -> f64 {
    distance_to_estimate(pos, cloud) + h1 * entropy(cloud)
}

/// Posterior-predictive probabilities `p(d)` for `d = 0..=d_max` at
/// `candidate`, together with each particle's expected count there.
/// `d_max` is the first count whose CDF reaches 0.999, capped at 50.
pub fn predictive_support(candidate: &Vec3, cloud: &ParticleCloud, plume: &PlumeParams) -> (Vec<f64>, Vec<f64>) {
    let lambda = typical_length(plume);
    let means: Vec<f64> = cloud
        .particles
        .iter()
        .map(|p| clamped_encounter_rate(candidate, plume, &p.position, lambda) * plume.dt)
        .collect();
    let mut probs = Vec::new();
    let mut cdf = 0.0;
    for d in 0..=MAX_COUNT {
        let p: f64 = cloud
            .particles
            .iter()
            .zip(&means)
            .map(|(part, &m)| part.weight * ln_detection_pmf(d, m).exp())
            .sum();
        probs.push(p);
        cdf += p;
        if cdf >= PREDICTIVE_MASS {
            break;
        }
    }
    (probs, means)
}

/// Value function at `candidate` after a hypothetical own measurement `d`.
/// Returns `None` when the cloud assigns the measurement zero probability.
pub fn hypothetical_value(candidate: &Vec3, cloud: &ParticleCloud, means: &[f64], d: u32, h1: f64) -> Option<f64> {
    let unnorm: Vec<f64> = cloud
        .particles
        .iter()
        .zip(means)
        .map(|(p, &m)| p.weight * ln_detection_pmf(d, m).exp())
        .collect();
    let total: f64 = unnorm.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let estimate = cloud
        .particles
        .iter()
        .zip(&unnorm)
        .fold(Vec3::zeros(), |acc, (p, &w)| acc + p.position * (w / total));
    let h = entropy_of(unnorm.iter().map(|w| w / total));
    Some((candidate - estimate).norm() + h1 * h)
}

/// `E[W^{k+1}] = sum_d p(d) W^{k+1}(d)` for a move to `candidate`, with
/// `p` renormalized over the enumerated counts.
pub fn expected_next_value(candidate: &Vec3, cloud: &ParticleCloud, plume: &PlumeParams, h1: f64) -> f64 {
    let (probs, means) = predictive_support(candidate, cloud, plume);
    expectation(candidate, cloud, &probs, &means, h1)
}

fn expectation(candidate: &Vec3, cloud: &ParticleCloud, probs: &[f64], means: &[f64], h1: f64) -> f64 {
    let mut mass = 0.0;
    let mut acc = 0.0;
    for (d, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        if let Some(w) = hypothetical_value(candidate, cloud, means, d as u32, h1) {
            acc += p * w;
            mass += p;
        }
    }
    if mass > 0.0 {
        acc / mass
    } else {
        value_function(candidate, cloud, h1)
    }
}

/// Rewards closer than this (relative) count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate - incumbent > TIE_TOLERANCE * incumbent.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionChoice {
    pub action: DirectionAction,
    /// `W^k - E[W^{k+1}]` for the chosen action.
    pub reward: f64,
    pub current_value: f64,
    pub evaluated: usize,
    /// Values touched while scoring, `sum(2N + 1 + d_max)` over candidates.
    pub work: u64,
}

/// Picks the in-volume neighbour direction with the largest expected
/// value-function decrease. Ties go to the lexicographically smallest offset.
pub fn choose_direction(
    agent_pos: &Vec3,
    cloud: &ParticleCloud,
    plume: &PlumeParams,
    volume: &SearchVolume,
    h1: f64,
) -> Result<DirectionChoice> {
    let current_value = value_function(agent_pos, cloud, h1);
    let n = cloud.len() as u64;
    let mut best: Option<(DirectionAction, f64)> = None;
    let mut evaluated = 0;
    let mut work = 0u64;
    for &action in DirectionAction::all() {
        let candidate = agent_pos + action.vector() * volume.g;
        if !volume.contains(&candidate) {
            continue;
        }
        evaluated += 1;
        let (probs, means) = predictive_support(&candidate, cloud, plume);
        let expected = expectation(&candidate, cloud, &probs, &means, h1);
        work += 2 * n + probs.len() as u64;
        let reward = current_value - expected;
        if best.is_none_or(|(_, r)| strictly_better(reward, r)) {
            best = Some((action, reward));
        }
    }
    let (action, reward) = best.ok_or(OslError::NoAdmissibleDirection)?;
    Ok(DirectionChoice {
        action,
        reward,
        current_value,
        evaluated,
        work,
    })
}
