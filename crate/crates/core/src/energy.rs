//! Per-agent energy accounting.
//!
//! The ledger only stores event counters; every energy figure is derived
//! from them on demand, so event order never matters and the total is the
//! exact sum of its components.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, OslError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Flying power (kJ/s).
    pub p_f: f64,
    /// Hovering power (kJ/s).
    pub p_h: f64,
    /// Energy per turn (kJ).
    pub e_b: f64,
    /// Hover duration per sensing point (s).
    pub t_h: f64,
    /// Effective capacitance coefficient.
    pub gamma_c: f64,
    /// CPU cycles per bit.
    pub cycles_per_bit: f64,
    /// CPU frequency (cycles/s).
    pub f_c: f64,
    /// Transmit power (kJ/s).
    pub p_t: f64,
    /// Transmit rate (bits/s).
    pub r_t: f64,
    /// Battery budget (kJ).
    pub e_max: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            p_f: 0.663,
            p_h: 0.47,
            e_b: 3.415,
            t_h: 1.0,
            gamma_c: 1e-28,
            cycles_per_bit: 1000.0,
            f_c: 1e9,
            p_t: 0.25,
            r_t: 1e6,
            e_max: 2000.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("p_f", self.p_f)?;
        require_positive("p_h", self.p_h)?;
        require_positive("e_b", self.e_b)?;
        require_positive("t_h", self.t_h)?;
        require_positive("gamma_c", self.gamma_c)?;
        require_positive("cycles_per_bit", self.cycles_per_bit)?;
        require_positive("f_c", self.f_c)?;
        require_positive("p_t", self.p_t)?;
        require_positive("r_t", self.r_t)?;
        require_positive("e_max", self.e_max)
    }
}

/// Energy split by source, in kJ.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub flying: f64,
    pub hovering: f64,
    pub turning: f64,
    pub compute: f64,
    pub comm: f64,
}

impl EnergyBreakdown {
    pub fn movement(&self) -> f64 {
        self.flying + self.hovering + self.turning
    }

    pub fn total(&self) -> f64 {
        self.movement() + self.compute + self.comm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Path length flown (m).
    pub fly_distance: f64,
    /// Flight time at the recorded speeds (s).
    pub fly_time: f64,
    pub hover_points: u64,
    pub turn_points: u64,
    pub comp_bits: u64,
    pub comm_bits: u64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_flight(&mut self, distance: f64, speed: f64) -> Result<()> {
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(OslError::InvalidParam {
                name: "speed",
                reason: format!("flight speed must be > 0, got {speed}"),
            });
        }
        if !(distance >= 0.0) {
            return Err(OslError::InvalidParam {
                name: "distance",
                reason: format!("flight distance must be >= 0, got {distance}"),
            });
        }
        self.fly_distance += distance;
        self.fly_time += distance / speed;
        Ok(())
    }

    pub fn record_hover(&mut self) {
        self.hover_points += 1;
    }

    pub fn record_turn(&mut self) {
        self.turn_points += 1;
    }

    pub fn record_compute(&mut self, bits: u64) {
        self.comp_bits += bits;
    }

    pub fn record_comm(&mut self, bits: u64) {
        self.comm_bits += bits;
    }

    /// Folds another ledger's events into this one.
    pub fn absorb(&mut self, other: &EnergyLedger) {
        self.fly_distance += other.fly_distance;
        self.fly_time += other.fly_time;
        self.hover_points += other.hover_points;
        self.turn_points += other.turn_points;
        self.comp_bits += other.comp_bits;
        self.comm_bits += other.comm_bits;
    }

    pub fn breakdown(&self, params: &EnergyParams) -> EnergyBreakdown {
        EnergyBreakdown {
            flying: params.p_f * self.fly_time,
            hovering: params.p_h * self.hover_points as f64 * params.t_h,
            turning: self.turn_points as f64 * params.e_b,
            compute: params.gamma_c * params.cycles_per_bit * params.f_c * params.f_c * self.comp_bits as f64,
            comm: params.p_t * self.comm_bits as f64 / params.r_t,
        }
    }

    /// Total energy and whether it has gone past the battery budget.
    pub fn total_and_budget(&self, params: &EnergyParams) -> (f64, bool) {
        let total = self.breakdown(params).total();
        (total, total > params.e_max)
    }
}
