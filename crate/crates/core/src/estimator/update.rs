use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConfidenceFactor, GaussianSummary, ParticleCloud};
use crate::plume::{clamped_encounter_rate, ln_detection_pmf, typical_length, Detection, PlumeParams};
use crate::Vec3;

/// What one agent sends a neighbour each iteration: its Gaussian summary
/// plus the sensing position, detection count and cue flag that the
/// neighbour's likelihood needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborMessage {
    pub sender: usize,
    pub summary: GaussianSummary,
    pub sender_pos: Vec3,
    pub detection: u32,
    pub cue_captured: bool,
}

/// Bayesian reweighting with the agent's own detection and every
/// neighbour's detection raised to its confidence factor.
///
/// Works in log space; if every particle ends at zero likelihood the
/// weights fall back to uniform.
pub fn update_weights(
    cloud: &mut ParticleCloud,
    own: &Detection,
    own_pos: &Vec3,
    messages: &[(NeighborMessage, ConfidenceFactor)],
    plume: &PlumeParams,
) {
    if cloud.is_empty() {
        return;
    }
    let lambda = typical_length(plume);
    let log_lik = |sensor: &Vec3, count: u32, source: &Vec3| {
        ln_detection_pmf(count, clamped_encounter_rate(sensor, plume, source, lambda) * plume.dt)
    };

    let log_w: Vec<f64> = cloud
        .particles
        .iter()
        .map(|p| {
            let mut lw = p.weight.ln() + log_lik(own_pos, own.count, &p.position);
            for (msg, beta) in messages {
                let l = log_lik(&msg.sender_pos, msg.detection, &p.position);
                // 0 * ln 0 would be NaN; beta > 0 always so this only guards rounding
                lw += if l == f64::NEG_INFINITY { l } else { beta.value() * l };
            }
            lw
        })
        .collect();

    reweight_log(cloud, &log_w);
}

/// Replaces the weights by `exp(log_w)` normalized; uniform when every
/// entry is `-inf`.
pub(crate) fn reweight_log(cloud: &mut ParticleCloud, log_w: &[f64]) {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        cloud.set_uniform_weights();
        return;
    }
    for (p, lw) in cloud.particles.iter_mut().zip(log_w) {
        p.weight = (lw - max).exp();
    }
    cloud.normalize();
}

/// `1 / sum(w^2)` for normalized weights.
pub fn effective_sample_size(cloud: &ParticleCloud) -> f64 {
    let s: f64 = cloud.weights().map(|w| w * w).sum();
    if s > 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

/// Indices picked by systematic resampling with offset `u0 ∈ [0, 1)`
/// (in units of `1/n`).
pub fn systematic_indices(weights: &[f64], n: usize, u0: f64) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut j = 0;
    for i in 0..n {
        let target = (u0 + i as f64) * step;
        while target >= cumulative && j + 1 < weights.len() {
            j += 1;
            cumulative += weights[j];
        }
        // rounding at the top of the cumulative sum can land on trailing zeros
        let mut k = j;
        while weights[k] == 0.0 && k > 0 {
            k -= 1;
        }
        out.push(k);
    }
    out
}

/// Low-variance resampling with a single uniform draw; weights reset to `1/N`.
pub fn resample_low_variance<R: Rng + ?Sized>(cloud: &mut ParticleCloud, rng: &mut R) {
    let n = cloud.len();
    if n == 0 {
        return;
    }
    let weights: Vec<f64> = cloud.weights().collect();
    let u0: f64 = rng.random();
    let picked = systematic_indices(&weights, n, u0);
    let w = 1.0 / n as f64;
    cloud.particles = picked
        .into_iter()
        .map(|i| super::Particle {
            position: cloud.particles[i].position,
            weight: w,
        })
        .collect();
}

/// Resamples when the effective sample size drops below `N/2`.
pub fn maybe_resample<R: Rng + ?Sized>(cloud: &mut ParticleCloud, rng: &mut R) -> bool {
    if effective_sample_size(cloud) < cloud.len() as f64 / 2.0 {
        resample_low_variance(cloud, rng);
        true
    } else {
        false
    }
}
