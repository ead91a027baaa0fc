//! Oracle checks shared by the property suites and the acceptance target.
//! Each returns `Err` with a description of the first mismatch.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::Matrix3;
use osl_core::estimator::{
    effective_sample_size, fit_gaussian, kl_gaussian, systematic_indices, update_weights, ConfidenceFactor,
    GaussianSummary, NeighborMessage, Particle, ParticleCloud, COV_RIDGE,
};
use osl_core::planner::{entropy, expected_next_value, max_step, sphere_point_counts, DirectionAction, MeasurementLog};
use osl_core::plume::{typical_length, Detection, PlumeParams};
use osl_core::Vec3;

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a == 0.0 && b == 0.0)
}

pub fn cloud(points: &[(Vec3, f64)]) -> ParticleCloud {
    let particles = points.iter().map(|&(position, weight)| Particle { position, weight }).collect();
    let mut c = ParticleCloud::from_particles(particles, 1, 1000);
    c.normalize();
    c
}

/// Poisson pmf by direct multiplication.
pub fn poisson_direct(d: u32, mean: f64) -> f64 {
    let mut p = (-mean).exp();
    for i in 1..=d {
        p *= mean / i as f64;
    }
    p
}

/// Encounter rate written out independently of the library.
pub fn rate_direct(sensor: &Vec3, source: &Vec3, plume: &PlumeParams) -> f64 {
    let lambda = (plume.d * plume.tau / (1.0 + plume.v * plume.v * plume.tau / (4.0 * plume.d))).sqrt();
    let r = (sensor - source).norm().max(plume.a);
    plume.a * plume.q / r * (-(sensor.y - source.y) * plume.v / (2.0 * plume.d)).exp() * (-r / lambda).exp()
}

// ---- filter ----

/// Weights after an update sum to one.
pub fn check_normalization(
    mut c: ParticleCloud,
    own: &Detection,
    messages: &[(NeighborMessage, ConfidenceFactor)],
    plume: &PlumeParams,
) -> Check {
    update_weights(&mut c, own, &own.sensed_at, messages, plume);
    let s = c.weight_sum();
    ensure((s - 1.0).abs() <= 1e-9, || format!("weights sum to {s}"))?;
    ensure(c.weights().all(|w| w.is_finite() && w >= 0.0), || "negative or non-finite weight".into())
}

pub fn check_ess_bounds(c: &ParticleCloud) -> Check {
    let ess = effective_sample_size(c);
    let n = c.len() as f64;
    ensure(ess >= 1.0 - 1e-9 && ess <= n + 1e-9, || format!("ESS {ess} outside [1, {n}]"))
}

/// Every index is duplicated `floor(N w)` or `ceil(N w)` times.
pub fn check_systematic_counts(weights: &[f64], u0: f64) -> Check {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let picked = systematic_indices(weights, n, u0);
    ensure(picked.len() == n, || format!("picked {} of {n}", picked.len()))?;
    let mut counts = vec![0usize; n];
    for i in picked {
        counts[i] += 1;
    }
    for (i, (&w, &c)) in weights.iter().zip(&counts).enumerate() {
        let expected = n as f64 * w / total;
        let lo = (expected - 1e-9).floor() as usize;
        let hi = (expected + 1e-9).ceil() as usize;
        ensure(c >= lo && c <= hi, || format!("index {i}: weight share {expected} but {c} copies"))?;
    }
    Ok(())
}

pub fn check_kl_self_and_beta(p: &GaussianSummary, q: &GaussianSummary) -> Check {
    let self_kl = kl_gaussian(p, p).map_err(|e| e.to_string())?;
    ensure(self_kl == 0.0, || format!("KL(P||P) = {self_kl}"))?;
    let kl = kl_gaussian(p, q).map_err(|e| e.to_string())?;
    ensure(kl >= 0.0, || format!("negative KL {kl}"))?;
    let beta = ConfidenceFactor::from_divergence(kl).value();
    ensure(beta > 0.0 && beta <= 1.0, || format!("beta {beta} outside (0, 1]"))
}

/// Fitted moments against a plain double loop (weights normalized first).
pub fn check_gaussian_fit(c: &ParticleCloud) -> Check {
    let fit = fit_gaussian(c);
    let total: f64 = c.particles.iter().map(|p| p.weight).sum();
    let mut mean = [0.0; 3];
    for p in &c.particles {
        for a in 0..3 {
            mean[a] += p.weight / total * p.position[a];
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in &c.particles {
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += p.weight / total * (p.position[a] - mean[a]) * (p.position[b] - mean[b]);
            }
        }
    }
    let scale = mean.iter().map(|m| m.abs()).fold(1.0, f64::max);
    for a in 0..3 {
        ensure((fit.mu[a] - mean[a]).abs() <= 1e-12 * scale, || format!("mean[{a}] {} vs {}", fit.mu[a], mean[a]))?;
    }
    let m = fit.matrix();
    let cov_scale = (0..3).map(|a| cov[a][a]).sum::<f64>() + COV_RIDGE;
    for a in 0..3 {
        for b in 0..3 {
            let expected = cov[a][b] + if a == b { COV_RIDGE } else { 0.0 };
            ensure((m[(a, b)] - expected).abs() <= 1e-12 * cov_scale, || {
                format!("cov[{a}][{b}] {} vs {expected}", m[(a, b)])
            })?;
        }
    }
    Ok(())
}

/// Weight update against the explicit product
/// `w_prev * pmf(own) * prod pmf(d_j)^beta_j`, normalized.
pub fn check_update_against_product(
    c: &ParticleCloud,
    own: &Detection,
    messages: &[(NeighborMessage, ConfidenceFactor)],
    plume: &PlumeParams,
) -> Check {
    let mut updated = c.clone();
    update_weights(&mut updated, own, &own.sensed_at, messages, plume);
    let raw: Vec<f64> = c
        .particles
        .iter()
        .map(|p| {
            let mut w = p.weight * poisson_direct(own.count, rate_direct(&own.sensed_at, &p.position, plume) * plume.dt);
            for (m, beta) in messages {
                let l = poisson_direct(m.detection, rate_direct(&m.sender_pos, &p.position, plume) * plume.dt);
                w *= l.powf(beta.value());
            }
            w
        })
        .collect();
    let total: f64 = raw.iter().sum();
    ensure(total > 1e-280, || "oracle underflow; instance too extreme".into())?;
    for (i, (p, r)) in updated.particles.iter().zip(&raw).enumerate() {
        let expected = r / total;
        ensure(close(p.weight, expected, 1e-12) || (p.weight < 1e-250 && expected < 1e-250), || {
            format!("particle {i}: weight {} vs oracle {expected}", p.weight)
        })?;
    }
    Ok(())
}

// ---- planner ----

pub fn check_entropy_closed_forms(n: usize, p: f64) -> Check {
    let uniform = cloud(&vec![(Vec3::zeros(), 1.0); n]);
    ensure(close(entropy(&uniform), (n as f64).ln(), 1e-12) || n == 1, || format!("uniform {n}"))?;
    let mut spike_points = vec![(Vec3::zeros(), 0.0); n];
    spike_points[0].1 = 1.0;
    ensure(entropy(&cloud(&spike_points)) == 0.0, || "one-hot entropy not zero".into())?;
    let two = cloud(&[(Vec3::zeros(), p), (Vec3::repeat(1.0), 1.0 - p)]);
    let expected = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
    ensure(close(entropy(&two), expected, 1e-12), || format!("two-point entropy at p = {p}"))
}

pub fn check_l_max_table() -> Check {
    for (zeta, l) in [(0.5, 1), (0.1, 1), (0.02, 5)] {
        let got = max_step(zeta, 10);
        ensure(got == l, || format!("zeta {zeta}: l_max {got}, expected {l}"))?;
    }
    Ok(())
}

/// `sum Z(l) = z(l_max)`, the count inside the largest sphere.
pub fn check_telescoping(pos: &Vec3, dir: DirectionAction, points: &[Vec3], g: f64, l_max: usize) -> Check {
    let log: MeasurementLog = points.iter().copied().collect();
    let z = sphere_point_counts(pos, dir, &log, g, l_max);
    let half = dir.vector() * g * (l_max as f64 * 0.5);
    let center = pos + half;
    let inside = points.iter().filter(|p| (*p - center).norm() < half.norm()).count();
    let sum: usize = z.iter().sum();
    ensure(sum == inside, || format!("sum Z = {sum}, z(l_max) = {inside}"))
}

/// Expected next value by explicit enumeration of counts and posteriors.
pub fn expected_value_oracle(candidate: &Vec3, c: &ParticleCloud, plume: &PlumeParams, h1: f64) -> f64 {
    let means: Vec<f64> = c.particles.iter().map(|p| rate_direct(candidate, &p.position, plume) * plume.dt).collect();
    let mut probs = Vec::new();
    let mut cdf = 0.0;
    for d in 0..=50u32 {
        let p: f64 = c.particles.iter().zip(&means).map(|(q, &m)| q.weight * poisson_direct(d, m)).sum();
        probs.push(p);
        cdf += p;
        if cdf >= 0.999 {
            break;
        }
    }
    let (mut acc, mut mass) = (0.0, 0.0);
    for (d, &pd) in probs.iter().enumerate() {
        let post: Vec<f64> = c.particles.iter().zip(&means).map(|(q, &m)| q.weight * poisson_direct(d as u32, m)).collect();
        let z: f64 = post.iter().sum();
        if pd <= 0.0 || z <= 0.0 {
            continue;
        }
        let mut est = Vec3::zeros();
        let mut h = 0.0;
        for (q, w) in c.particles.iter().zip(&post) {
            let w = w / z;
            est += q.position * w;
            if w > 0.0 {
                h -= w * w.ln();
            }
        }
        acc += pd * ((candidate - est).norm() + h1 * h);
        mass += pd;
    }
    acc / mass
}

pub fn check_expected_value(candidate: &Vec3, c: &ParticleCloud, plume: &PlumeParams, h1: f64) -> Check {
    let got = expected_next_value(candidate, c, plume, h1);
    let want = expected_value_oracle(candidate, c, plume, h1);
    ensure(close(got, want, 1e-10), || format!("E[W] {got} vs oracle {want}"))
}

pub fn lambda() -> f64 {
    typical_length(&PlumeParams::default())
}

pub fn summary(mu: Vec3, diag: [f64; 3]) -> GaussianSummary {
    GaussianSummary::new(mu, &Matrix3::from_diagonal(&Vec3::from(diag)))
}
