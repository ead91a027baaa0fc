use nalgebra::{Cholesky, Matrix3};
use serde::{Deserialize, Serialize};

use super::ParticleCloud;
use crate::error::{OslError, Result};
use crate::Vec3;

/// Ridge (m^2) added to fitted covariances and to both operands of the KL.
pub const COV_RIDGE: f64 = 1e-6;

/// Smallest confidence factor; `exp(-KL)` is floored here.
pub const MIN_BETA: f64 = 1e-300;

/// Mean and covariance of a particle cloud. The covariance is stored as its
/// six unique entries `[xx, xy, xz, yy, yz, zz]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub mu: Vec3,
    pub sigma: [f64; 6],
}

impl GaussianSummary {
    pub fn new(mu: Vec3, sigma: &Matrix3<f64>) -> Self {
        Self {
            mu,
            sigma: [
                sigma[(0, 0)],
                0.5 * (sigma[(0, 1)] + sigma[(1, 0)]),
                0.5 * (sigma[(0, 2)] + sigma[(2, 0)]),
                sigma[(1, 1)],
                0.5 * (sigma[(1, 2)] + sigma[(2, 1)]),
                sigma[(2, 2)],
            ],
        }
    }

    /// Moments of the uniform distribution over a box, plus the ridge.
    pub fn uniform_box(extents: Vec3) -> Self {
        let var = |l: f64| l * l / 12.0 + COV_RIDGE;
        Self {
            mu: extents * 0.5,
            sigma: [var(extents.x), 0.0, 0.0, var(extents.y), 0.0, var(extents.z)],
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let [xx, xy, xz, yy, yz, zz] = self.sigma;
        Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
    }

    pub fn trace(&self) -> f64 {
        self.sigma[0] + self.sigma[3] + self.sigma[5]
    }

    /// `sqrt(trace sigma)`, the scalar spread used for declaration.
    pub fn spread(&self) -> f64 {
        self.trace().sqrt()
    }
}

/// Weighted mean of the particle positions.
pub fn estimate_source(cloud: &ParticleCloud) -> Vec3 {
    cloud
        .particles
        .iter()
        .fold(Vec3::zeros(), |acc, p| acc + p.position * p.weight)
}

/// Weighted mean and full weighted covariance (plus ridge) of the cloud.
pub fn fit_gaussian(cloud: &ParticleCloud) -> GaussianSummary {
    let mu = estimate_source(cloud);
    let mut sigma = Matrix3::identity() * COV_RIDGE;
    for p in &cloud.particles {
        let dev = p.position - mu;
        sigma += dev * dev.transpose() * p.weight;
    }
    GaussianSummary::new(mu, &sigma)
}

fn regularized_cholesky(s: &GaussianSummary) -> Result<Cholesky<f64, nalgebra::U3>> {
    let m = s.matrix() + Matrix3::identity() * COV_RIDGE;
    Cholesky::new(m).ok_or(OslError::SingularCovariance)
}

/// Closed-form `KL(p || q)` between two trivariate normals, in nats.
pub fn kl_gaussian(p: &GaussianSummary, q: &GaussianSummary) -> Result<f64> {
    if p == q {
        return Ok(0.0);
    }
    let lp = regularized_cholesky(p)?;
    let lq = regularized_cholesky(q)?;
    let lq_l = lq.l();
    let lp_l = lp.l();

    // tr(Sq^-1 Sp) = ||Lq^-1 Lp||_F^2
    let solved = lq_l
        .solve_lower_triangular(&lp_l)
        .ok_or(OslError::SingularCovariance)?;
    let trace_term = solved.norm_squared();

    let diff = q.mu - p.mu;
    let maha = lq_l
        .solve_lower_triangular(&diff)
        .ok_or(OslError::SingularCovariance)?
        .norm_squared();

    let ln_det = |l: &Matrix3<f64>| 2.0 * (0..3).map(|i| l[(i, i)].ln()).sum::<f64>();
    let kl = 0.5 * (trace_term + maha - 3.0 + ln_det(&lq_l) - ln_det(&lp_l));
    Ok(kl.max(0.0))
}

/// Weight in `(0, 1]` given to a neighbour's likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceFactor(f64);

impl ConfidenceFactor {
    pub const FULL: ConfidenceFactor = ConfidenceFactor(1.0);

    pub fn from_divergence(kl: f64) -> Self {
        Self((-kl).exp().clamp(MIN_BETA, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `beta = exp(-KL(own || neighbour))` on the previous iteration's summaries.
pub fn confidence_factor(own_prev: &GaussianSummary, neighbor_prev: &GaussianSummary) -> Result<ConfidenceFactor> {
    Ok(ConfidenceFactor::from_divergence(kl_gaussian(own_prev, neighbor_prev)?))
}
