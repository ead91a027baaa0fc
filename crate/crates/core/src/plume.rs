//! Rate-based plume: mean particulate encounter rate of a spherical sensor
//! in a steady wind, Poisson detection counts, and the diffusion ratio that
//! bounds the planner's step length.
//!
//! Wind blows along -y, so the plume trails toward decreasing y and the
//! upwind unit vector is +y. The advection factor `exp(-(y - y_s) V / 2D)`
//! exceeds one exactly on the downwind side of the source.
//!
//! `Q` is treated as a count-rate scale: `a Q / |u - r_s|` is read directly
//! in 1/s.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{require_positive, OslError, Result};
use crate::Vec3;

/// Physical constants of the plume and the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlumeParams {
    /// Release rate.
    pub q: f64,
    /// Mean wind speed (m/s).
    pub v: f64,
    /// Effective diffusivity (m^2/s).
    pub d: f64,
    /// Particulate lifetime (s).
    pub tau: f64,
    /// Sensor sphere radius (m).
    pub a: f64,
    /// Sensing interval (s).
    pub dt: f64,
}

impl Default for PlumeParams {
    fn default() -> Self {
        Self {
            q: 5.0,
            v: 1.0,
            d: 1.0,
            tau: 100.0,
            a: 1.0,
            dt: 1.0,
        }
    }
}

impl PlumeParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("q", self.q)?;
        require_positive("v", self.v)?;
        require_positive("d", self.d)?;
        require_positive("tau", self.tau)?;
        require_positive("a", self.a)?;
        require_positive("dt", self.dt)
    }

    /// Unit vector pointing into the wind.
    pub fn upwind(&self) -> Vec3 {
        Vec3::new(0.0, 1.0, 0.0)
    }
}

/// Axis-aligned search box `[0, lx] x [0, ly] x [0, lz]` gridded at edge `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchVolume {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub g: f64,
}

impl Default for SearchVolume {
    fn default() -> Self {
        Self {
            lx: 100.0,
            ly: 60.0,
            lz: 30.0,
            g: 10.0,
        }
    }
}

impl SearchVolume {
    pub fn validate(&self, plume: &PlumeParams) -> Result<()> {
        require_positive("lx", self.lx)?;
        require_positive("ly", self.ly)?;
        require_positive("lz", self.lz)?;
        require_positive("g", self.g)?;
        let reach = 2.0 * (plume.d * plume.tau).sqrt();
        if self.g >= reach {
            return Err(OslError::InvalidParam {
                name: "g",
                reason: format!("grid edge must be below 2*sqrt(D*tau) = {reach}, got {}", self.g),
            });
        }
        if self.g > self.lx.min(self.ly).min(self.lz) {
            return Err(OslError::InvalidParam {
                name: "g",
                reason: "grid edge larger than the smallest extent".into(),
            });
        }
        Ok(())
    }

    pub fn extents(&self) -> Vec3 {
        Vec3::new(self.lx, self.ly, self.lz)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0.0..=self.lx).contains(&p.x) && (0.0..=self.ly).contains(&p.y) && (0.0..=self.lz).contains(&p.z)
    }

    pub fn clamp(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(0.0, self.lx),
            p.y.clamp(0.0, self.ly),
            p.z.clamp(0.0, self.lz),
        )
    }

    pub fn diagonal(&self) -> f64 {
        self.extents().norm()
    }

    pub fn center(&self) -> Vec3 {
        self.extents() * 0.5
    }

    /// Cell counts along each axis.
    pub fn cells(&self) -> [usize; 3] {
        let n = |len: f64| ((len / self.g).round() as usize).max(1);
        [n(self.lx), n(self.ly), n(self.lz)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub position: Vec3,
}

impl SourceConfig {
    /// Fractions of the extents where the default source sits: upwind of
    /// and across from the corner the agents start in.
    pub const DEFAULT_FRACTIONS: [f64; 3] = [0.7, 0.75, 0.5];

    pub fn default_for(volume: &SearchVolume) -> Self {
        let [fx, fy, fz] = Self::DEFAULT_FRACTIONS;
        Self {
            position: Vec3::new(fx * volume.lx, fy * volume.ly, fz * volume.lz),
        }
    }

    pub fn validate(&self, volume: &SearchVolume) -> Result<()> {
        if volume.contains(&self.position) {
            Ok(())
        } else {
            Err(OslError::InvalidParam {
                name: "source",
                reason: format!("source {:?} lies outside the search volume", self.position),
            })
        }
    }
}

/// One sensing event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub count: u32,
    pub sensed_at: Vec3,
    pub iteration: usize,
}

/// Mean distance a particulate travels before it decays.
pub fn typical_length(params: &PlumeParams) -> f64 {
    let advection = params.v * params.v * params.tau / (4.0 * params.d);
    (params.d * params.tau / (1.0 + advection)).sqrt()
}

/// Mean encounter rate at `sensor` for a source at `source`.
///
/// Fails when the sensor sphere contains the source.
pub fn mean_encounter_rate(sensor: &Vec3, params: &PlumeParams, source: &Vec3) -> Result<f64> {
    let distance = (sensor - source).norm();
    if distance < params.a {
        return Err(OslError::CoincidentSource {
            distance,
            radius: params.a,
        });
    }
    Ok(rate_at_distance(sensor.y - source.y, distance, params, typical_length(params)))
}

/// Encounter rate with the separation floored at the sensor radius. This is
/// what the filter uses, since particle hypotheses may sit on the sensor.
pub fn clamped_encounter_rate(sensor: &Vec3, params: &PlumeParams, source: &Vec3, lambda: f64) -> f64 {
    let distance = (sensor - source).norm().max(params.a);
    rate_at_distance(sensor.y - source.y, distance, params, lambda)
}

#[inline]
fn rate_at_distance(dy: f64, distance: f64, params: &PlumeParams, lambda: f64) -> f64 {
    params.a * params.q / distance
        * (-dy * params.v / (2.0 * params.d)).exp()
        * (-distance / lambda).exp()
}

/// Natural log of the Poisson pmf with mean `mean`.
pub fn ln_detection_pmf(count: u32, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if count == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let k = count as f64;
    k * mean.ln() - mean - ln_factorial(count as u64)
}

/// Probability of `count` encounters in `dt` at the given rate.
pub fn detection_pmf(count: u32, rate: f64, dt: f64) -> f64 {
    ln_detection_pmf(count, rate * dt).exp()
}

/// Draws a detection count at `sensor`. A sensor overlapping the source
/// senses the rate at one sensor radius.
pub fn sample_detection<R: Rng + ?Sized>(
    rng: &mut R,
    sensor: &Vec3,
    params: &PlumeParams,
    source: &SourceConfig,
    iteration: usize,
) -> Detection {
    let lambda = typical_length(params);
    let mean = clamped_encounter_rate(sensor, params, &source.position, lambda) * params.dt;
    Detection {
        count: sample_poisson(rng, mean),
        sensed_at: *sensor,
        iteration,
    }
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if !(mean > 0.0) {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    draw as u32
}

/// Default detection threshold for the diffusion ratio: 1% of the rate one
/// typical length away from the source (crosswind).
pub fn default_conc_threshold(params: &PlumeParams) -> f64 {
    0.01 * params.a * params.q / typical_length(params)
}

/// Fraction of grid cells whose center sees a mean rate above `threshold`.
pub fn diffusion_ratio(
    params: &PlumeParams,
    source: &SourceConfig,
    volume: &SearchVolume,
    threshold: f64,
) -> Result<f64> {
    require_positive("conc_threshold", threshold)?;
    let lambda = typical_length(params);
    let [nx, ny, nz] = volume.cells();
    let (ex, ey, ez) = (volume.lx / nx as f64, volume.ly / ny as f64, volume.lz / nz as f64);
    let mut above = 0usize;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let center = Vec3::new((i as f64 + 0.5) * ex, (j as f64 + 0.5) * ey, (k as f64 + 0.5) * ez);
                let distance = (center - source.position).norm();
                // cells holding the source are saturated
                let hot = distance < params.a
                    || rate_at_distance(center.y - source.position.y, distance, params, lambda) > threshold;
                if hot {
                    above += 1;
                }
            }
        }
    }
    Ok(above as f64 / (nx * ny * nz) as f64)
}
