//! Line-based `key = value` run configuration.
//!
//! Every constant of the simulator has one flat key so that sweeps map
//! one-to-one onto keys. Absent keys take their defaults; `#` starts a
//! comment. The canonical text (every key, fixed order) round-trips exactly
//! and its SHA-256 identifies the effective configuration in outputs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::energy::EnergyParams;
use crate::error::{OslError, Result};
use crate::plume::{PlumeParams, SearchVolume, SourceConfig};
use crate::sim::{SwarmConfig, World};
use crate::Vec3;

/// Every recognised key, in canonical order.
pub const KEYS: &[&str] = &[
    // plume and sensor
    "q",
    "v",
    "d",
    "tau",
    "a",
    "dt",
    // search volume
    "lx",
    "ly",
    "lz",
    "g",
    // source; absent coordinates follow the default placement
    "source_x",
    "source_y",
    "source_z",
    // energy
    "p_f",
    "p_h",
    "e_b",
    "t_h",
    "gamma_c",
    "cycles_per_bit",
    "f_c",
    "p_t",
    "r_t",
    "e_max",
    // team
    "uav_count",
    "comm_radius",
    "algo",
    "k_max",
    "delta_dec",
    "eps_succ",
    "speed",
    "hover_secs",
    "turn_secs",
    "max_search_time",
    // filter
    "n",
    "n_min",
    "n_max",
    "gamma1",
    "gamma2",
    "delta_c",
    "fit_stage",
    "env_pu",
    "env_pu_scale",
    // planner
    "kappa1",
    "kappa2",
    "step_ceiling",
    "conc_threshold",
    // batch
    "seed",
    "runs",
];

/// Sweep-only alias that sets `lx`, `ly` and `lz` from `LXxLYxLZ`.
pub const VOLUME_KEY: &str = "volume";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plume: PlumeParams,
    pub volume: SearchVolume,
    /// Explicit source coordinates; `None` follows the default placement.
    pub source: [Option<f64>; 3],
    pub energy: EnergyParams,
    pub swarm: SwarmConfig,
    /// Master seed.
    pub seed: u64,
    /// Monte Carlo batch size.
    pub runs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plume: PlumeParams::default(),
            volume: SearchVolume::default(),
            source: [None; 3],
            energy: EnergyParams::default(),
            swarm: SwarmConfig::default(),
            seed: 0,
            runs: 200,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| format!("key `{key}`: cannot parse `{value}`: {e}"))
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, String> {
    let x: f64 = parse_value(key, value)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("key `{key}`: value must be finite, got `{value}`"))
    }
}

impl RunConfig {
    /// The resolved source position.
    pub fn source_position(&self) -> Vec3 {
        let default = SourceConfig::default_for(&self.volume).position;
        Vec3::new(
            self.source[0].unwrap_or(default.x),
            self.source[1].unwrap_or(default.y),
            self.source[2].unwrap_or(default.z),
        )
    }

    pub fn world(&self) -> World {
        World {
            plume: self.plume,
            volume: self.volume,
            source: SourceConfig { position: self.source_position() },
            energy: self.energy,
        }
    }

    /// Sets one key from its textual value. Errors name the key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let f = |v: &str| parse_f64(key, v);
        let p = &mut self.plume;
        let e = &mut self.energy;
        let s = &mut self.swarm;
        match key {
            "q" => p.q = f(value)?,
            "v" => p.v = f(value)?,
            "d" => p.d = f(value)?,
            "tau" => p.tau = f(value)?,
            "a" => p.a = f(value)?,
            "dt" => p.dt = f(value)?,
            "lx" => self.volume.lx = f(value)?,
            "ly" => self.volume.ly = f(value)?,
            "lz" => self.volume.lz = f(value)?,
            "g" => self.volume.g = f(value)?,
            "source_x" => self.source[0] = Some(f(value)?),
            "source_y" => self.source[1] = Some(f(value)?),
            "source_z" => self.source[2] = Some(f(value)?),
            "p_f" => e.p_f = f(value)?,
            "p_h" => e.p_h = f(value)?,
            "e_b" => e.e_b = f(value)?,
            "t_h" => e.t_h = f(value)?,
            "gamma_c" => e.gamma_c = f(value)?,
            "cycles_per_bit" => e.cycles_per_bit = f(value)?,
            "f_c" => e.f_c = f(value)?,
            "p_t" => e.p_t = f(value)?,
            "r_t" => e.r_t = f(value)?,
            "e_max" => e.e_max = f(value)?,
            "uav_count" => s.uav_count = parse_value(key, value)?,
            "comm_radius" => s.comm_radius = f(value)?,
            "algo" => s.variant = value.parse()?,
            "k_max" => s.k_max = parse_value(key, value)?,
            "delta_dec" => s.delta_dec = f(value)?,
            "eps_succ" => s.eps_succ = f(value)?,
            "speed" => s.speed = f(value)?,
            "hover_secs" => s.hover_secs = f(value)?,
            "turn_secs" => s.turn_secs = f(value)?,
            "max_search_time" => s.max_search_time = f(value)?,
            "n" => s.filter.n_init = parse_value(key, value)?,
            "n_min" => s.filter.n_min = parse_value(key, value)?,
            "n_max" => s.filter.n_max = parse_value(key, value)?,
            "gamma1" => s.filter.gamma1 = f(value)?,
            "gamma2" => s.filter.gamma2 = f(value)?,
            "delta_c" => s.filter.delta_c = parse_value(key, value)?,
            "fit_stage" => s.filter.fit_stage = value.parse()?,
            "env_pu" => s.filter.env_pu = value.parse()?,
            "env_pu_scale" => s.filter.env_pu_scale = f(value)?,
            "kappa1" => s.planner.kappa1 = f(value)?,
            "kappa2" => s.planner.kappa2 = f(value)?,
            "step_ceiling" => s.planner.step_ceiling = parse_value(key, value)?,
            "conc_threshold" => {
                s.planner.conc_threshold = if value == "auto" { None } else { Some(f(value)?) }
            }
            "seed" => self.seed = parse_value(key, value)?,
            "runs" => self.runs = parse_value(key, value)?,
            VOLUME_KEY => {
                let parts: Vec<&str> = value.split('x').collect();
                if parts.len() != 3 {
                    return Err(format!("key `{key}`: expected LXxLYxLZ, got `{value}`"));
                }
                self.volume.lx = f(parts[0])?;
                self.volume.ly = f(parts[1])?;
                self.volume.lz = f(parts[2])?;
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Textual value of `key`, as written by [`RunConfig::to_canonical`].
    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.plume;
        let e = &self.energy;
        let s = &self.swarm;
        let opt = |x: Option<f64>| x.map_or_else(|| "auto".to_string(), |v| v.to_string());
        Some(match key {
            "q" => p.q.to_string(),
            "v" => p.v.to_string(),
            "d" => p.d.to_string(),
            "tau" => p.tau.to_string(),
            "a" => p.a.to_string(),
            "dt" => p.dt.to_string(),
            "lx" => self.volume.lx.to_string(),
            "ly" => self.volume.ly.to_string(),
            "lz" => self.volume.lz.to_string(),
            "g" => self.volume.g.to_string(),
            "source_x" => self.source_position().x.to_string(),
            "source_y" => self.source_position().y.to_string(),
            "source_z" => self.source_position().z.to_string(),
            "p_f" => e.p_f.to_string(),
            "p_h" => e.p_h.to_string(),
            "e_b" => e.e_b.to_string(),
            "t_h" => e.t_h.to_string(),
            "gamma_c" => e.gamma_c.to_string(),
            "cycles_per_bit" => e.cycles_per_bit.to_string(),
            "f_c" => e.f_c.to_string(),
            "p_t" => e.p_t.to_string(),
            "r_t" => e.r_t.to_string(),
            "e_max" => e.e_max.to_string(),
            "uav_count" => s.uav_count.to_string(),
            "comm_radius" => s.comm_radius.to_string(),
            "algo" => s.variant.to_string(),
            "k_max" => s.k_max.to_string(),
            "delta_dec" => s.delta_dec.to_string(),
            "eps_succ" => s.eps_succ.to_string(),
            "speed" => s.speed.to_string(),
            "hover_secs" => s.hover_secs.to_string(),
            "turn_secs" => s.turn_secs.to_string(),
            "max_search_time" => s.max_search_time.to_string(),
            "n" => s.filter.n_init.to_string(),
            "n_min" => s.filter.n_min.to_string(),
            "n_max" => s.filter.n_max.to_string(),
            "gamma1" => s.filter.gamma1.to_string(),
            "gamma2" => s.filter.gamma2.to_string(),
            "delta_c" => s.filter.delta_c.to_string(),
            "fit_stage" => s.filter.fit_stage.as_str().to_string(),
            "env_pu" => s.filter.env_pu.as_str().to_string(),
            "env_pu_scale" => s.filter.env_pu_scale.to_string(),
            "kappa1" => s.planner.kappa1.to_string(),
            "kappa2" => s.planner.kappa2.to_string(),
            "step_ceiling" => s.planner.step_ceiling.to_string(),
            "conc_threshold" => opt(s.planner.conc_threshold),
            "seed" => self.seed.to_string(),
            "runs" => self.runs.to_string(),
            VOLUME_KEY => format!("{}x{}x{}", self.volume.lx, self.volume.ly, self.volume.lz),
            _ => return None,
        })
    }

    /// Whether `key` can be set (and therefore swept).
    pub fn is_key(key: &str) -> bool {
        key == VOLUME_KEY || KEYS.contains(&key)
    }

    /// Checks every module invariant.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(OslError::InvalidParam {
                name: "runs",
                reason: "need at least one run".into(),
            });
        }
        self.swarm.validate()?;
        self.world().validate()
    }

    /// Every key in canonical order, one `key = value` line each. The source
    /// is written resolved, so the text is self-contained.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key has a value");
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical().as_bytes()))
    }
}

/// Parses and validates configuration text. Unknown keys, unparsable values
/// and invariant violations are reported with the offending line (0 when
/// the violating value is a default) and key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut lines: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(OslError::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key == VOLUME_KEY || !KEYS.contains(&key) {
            return Err(OslError::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if let Some(first) = lines.insert(key.to_string(), line) {
            return Err(OslError::Config {
                line,
                message: format!("key `{key}` already set on line {first}"),
            });
        }
        config.set(key, value).map_err(|message| OslError::Config { line, message })?;
    }
    config.validate().map_err(|e| match e {
        OslError::InvalidParam { name, reason } => {
            let key = config_key_for(name);
            OslError::Config {
                line: lines.get(key).copied().unwrap_or(0),
                message: format!("key `{key}`: {reason}"),
            }
        }
        other => other,
    })?;
    Ok(config)
}

/// Config key behind a parameter name used in validation errors.
fn config_key_for(param: &str) -> &str {
    match param {
        "source" => "source_x",
        other => other,
    }
}
