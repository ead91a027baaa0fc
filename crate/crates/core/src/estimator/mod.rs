//! Collaborative particle filter over the source position.
//!
//! Each agent owns a [`ParticleCloud`]. One filter iteration fuses the
//! agent's own detection with its neighbours' detections (tempered by
//! confidence factors), resamples, moves a shrinking subset of particles
//! (upwind drift plus attraction toward cue-captured neighbours), adapts the
//! particle count, and summarizes the cloud as a Gaussian for exchange.

mod filter;
mod gaussian;
mod pugl;
mod update;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::plume::SearchVolume;
use crate::Vec3;

pub use filter::{collaborative_step, FilterParams, FilterStepReport, FitStage};
pub use gaussian::{
    confidence_factor, estimate_source, fit_gaussian, kl_gaussian, ConfidenceFactor, GaussianSummary, COV_RIDGE,
    MIN_BETA,
};
pub use pugl::{
    col_pu, cue_frequency, env_pu, env_pu_bounded_step, env_pu_step, gbest, select_move_count, update_particle_count,
    EnvPuMode,
};
pub use update::{
    effective_sample_size, maybe_resample, resample_low_variance, systematic_indices, update_weights,
    NeighborMessage,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec3,
    pub weight: f64,
}

/// Weighted particle approximation of the source posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleCloud {
    pub particles: Vec<Particle>,
    pub n_min: usize,
    pub n_max: usize,
    /// Iterations at which this agent captured a cue, oldest first.
    pub cue_iterations: Vec<usize>,
}

impl ParticleCloud {
    /// `n` particles uniformly distributed in the volume with equal weights.
    pub fn uniform<R: Rng + ?Sized>(n: usize, n_min: usize, n_max: usize, volume: &SearchVolume, rng: &mut R) -> Self {
        assert!(n >= 1, "cloud needs at least one particle");
        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| Particle {
                position: Vec3::new(
                    rng.random::<f64>() * volume.lx,
                    rng.random::<f64>() * volume.ly,
                    rng.random::<f64>() * volume.lz,
                ),
                weight: w,
            })
            .collect();
        Self {
            particles,
            n_min,
            n_max,
            cue_iterations: Vec::new(),
        }
    }

    pub fn from_particles(particles: Vec<Particle>, n_min: usize, n_max: usize) -> Self {
        Self {
            particles,
            n_min,
            n_max,
            cue_iterations: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn cue_count(&self) -> usize {
        self.cue_iterations.len()
    }

    pub fn record_cue(&mut self, iteration: usize) {
        self.cue_iterations.push(iteration);
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights().sum()
    }

    pub fn normalize(&mut self) {
        let total = self.weight_sum();
        if total > 0.0 && total.is_finite() {
            for p in &mut self.particles {
                p.weight /= total;
            }
        } else {
            self.set_uniform_weights();
        }
    }

    pub fn set_uniform_weights(&mut self) {
        let w = 1.0 / self.len() as f64;
        for p in &mut self.particles {
            p.weight = w;
        }
    }
}
