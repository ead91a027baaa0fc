//! Particle position update (upwind drift and collaborative attraction) and
//! adaptive particle count.

use std::f64::consts::FRAC_PI_4;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ParticleCloud;
use crate::plume::SearchVolume;
use crate::Vec3;

/// Number of particles moved at iteration `k`:
/// `floor(N (1 - (k/k_max)^g1)^g2)`.
pub fn select_move_count(n: usize, k: usize, k_max: usize, gamma1: f64, gamma2: f64) -> usize {
    if k_max == 0 {
        return 0;
    }
    let frac = (k.min(k_max) as f64 / k_max as f64).powf(gamma1);
    let scale = (1.0 - frac).max(0.0).powf(gamma2);
    (n as f64 * scale).floor() as usize
}

/// One upwind-drift move with explicit randomness. The displacement is
/// proportional to the current coordinates; `z` is untouched.
pub fn env_pu_step(position: Vec3, rand: f64, theta: f64) -> Vec3 {
    Vec3::new(
        position.x + rand * position.x * theta.cos(),
        position.y + rand * position.y * theta.sin(),
        position.z,
    )
}

/// Upwind move whose length is `rand * scale` regardless of where the
/// particle sits; `z` is untouched.
pub fn env_pu_bounded_step(position: Vec3, rand: f64, theta: f64, scale: f64) -> Vec3 {
    Vec3::new(
        position.x + rand * scale * theta.cos(),
        position.y + rand * scale * theta.sin(),
        position.z,
    )
}

/// Displacement rule of the upwind drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvPuMode {
    /// Step proportional to the particle's own coordinates.
    Proportional,
    /// Step of at most a fixed length.
    Bounded,
}

impl EnvPuMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvPuMode::Proportional => "proportional",
            EnvPuMode::Bounded => "bounded",
        }
    }
}

impl std::str::FromStr for EnvPuMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proportional" => Ok(EnvPuMode::Proportional),
            "bounded" => Ok(EnvPuMode::Bounded),
            other => Err(format!("unknown env-pu mode `{other}` (expected proportional|bounded)")),
        }
    }
}

/// Moves the particles at `selected` upwind. Each particle draws its angle as
/// `upwind_heading + U[-pi/4, pi/4]` and a step fraction from `U[0, 1)`.
pub fn env_pu<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    selected: &[usize],
    upwind_heading: f64,
    mode: EnvPuMode,
    bounded_scale: f64,
    rng: &mut R,
    volume: &SearchVolume,
) {
    for &i in selected {
        let theta = upwind_heading + rng.random_range(-FRAC_PI_4..=FRAC_PI_4);
        let rand: f64 = rng.random();
        let p = &mut cloud.particles[i];
        let moved = match mode {
            EnvPuMode::Proportional => env_pu_step(p.position, rand, theta),
            EnvPuMode::Bounded => env_pu_bounded_step(p.position, rand, theta, bounded_scale),
        };
        p.position = volume.clamp(moved);
    }
}

/// Pulls the particles at `selected` a uniform fraction of the way to `target`.
pub fn col_pu<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    selected: &[usize],
    target: &Vec3,
    rng: &mut R,
    volume: &SearchVolume,
) {
    for &i in selected {
        let rand: f64 = rng.random();
        let p = &mut cloud.particles[i];
        p.position = volume.clamp(p.position + (target - p.position) * rand);
    }
}

/// Confidence-weighted mean of cue-captured neighbours' means, with the
/// weights renormalized to sum to one. `None` without any such neighbour.
pub fn gbest<I>(neighbors: I) -> Option<Vec3>
where
    I: IntoIterator<Item = (Vec3, f64)>,
{
    let (sum, total) = neighbors
        .into_iter()
        .fold((Vec3::zeros(), 0.0), |(s, t), (mu, beta)| (s + mu * beta, t + beta));
    (total > 0.0).then(|| sum / total)
}

/// `delta_c / (k - k_{m - delta_c})`, zero before `delta_c` cues. The
/// iteration before the first cue is taken as 0.
pub fn cue_frequency(cue_iterations: &[usize], k: usize, delta_c: usize) -> f64 {
    let m = cue_iterations.len();
    if delta_c == 0 || m < delta_c {
        return 0.0;
    }
    let anchor = if m == delta_c { 0 } else { cue_iterations[m - delta_c - 1] };
    let span = k.saturating_sub(anchor);
    if span == 0 {
        return 1.0;
    }
    (delta_c as f64 / span as f64).min(1.0)
}

/// Shrinks the cloud to `clamp(floor(N f_dist (1 - f_cue)), N_min, N_max)`
/// by dropping a uniform random subset. Returns the new count.
pub fn update_particle_count<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    agent_pos: &Vec3,
    estimate: &Vec3,
    k: usize,
    delta_c: usize,
    rng: &mut R,
) -> usize {
    let n = cloud.len();
    let distance = (agent_pos - estimate).norm();
    let f_dist = (-1.0 / distance).exp();
    let f_cue = cue_frequency(&cloud.cue_iterations, k, delta_c);
    let target = (n as f64 * f_dist * (1.0 - f_cue)).floor() as usize;
    let target = target.clamp(cloud.n_min, cloud.n_max).min(n);
    if target < n {
        let mut keep = index::sample(rng, n, target).into_vec();
        keep.sort_unstable();
        cloud.particles = keep.into_iter().map(|i| cloud.particles[i]).collect();
        cloud.normalize();
    }
    cloud.len()
}
