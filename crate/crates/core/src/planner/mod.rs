//! One-step POMDP planning: direction first, then step length along it.

mod direction;
mod step;

use serde::{Deserialize, Serialize};

use crate::Vec3;

pub use direction::{
    choose_direction, distance_to_estimate, entropy, expected_next_value, hypothetical_value, predictive_support,
    value_function, DirectionChoice,
};
pub use step::{choose_step, entropy_weight, history_weight, max_step, sphere_point_counts, StepAction};

/// One of the 26 neighbouring grid directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectionAction {
    pub offset: [i8; 3],
}

impl DirectionAction {
    /// All 26 directions in lexicographic order of their offsets.
    pub fn all() -> &'static [DirectionAction; 26] {
        &ALL_DIRECTIONS
    }

    /// Position in [`DirectionAction::all`].
    pub fn index(self) -> usize {
        ALL_DIRECTIONS.iter().position(|d| *d == self).expect("valid direction")
    }

    pub fn from_index(i: usize) -> Option<Self> {
        ALL_DIRECTIONS.get(i).copied()
    }

    pub fn vector(self) -> Vec3 {
        Vec3::new(self.offset[0] as f64, self.offset[1] as f64, self.offset[2] as f64)
    }
}

const fn build_directions() -> [DirectionAction; 26] {
    let mut out = [DirectionAction { offset: [0, 0, 0] }; 26];
    let mut n = 0;
    let mut i = 0;
    while i < 27 {
        let dx = (i / 9) as i8 - 1;
        let dy = ((i / 3) % 3) as i8 - 1;
        let dz = (i % 3) as i8 - 1;
        if !(dx == 0 && dy == 0 && dz == 0) {
            out[n] = DirectionAction { offset: [dx, dy, dz] };
            n += 1;
        }
        i += 1;
    }
    out
}

static ALL_DIRECTIONS: [DirectionAction; 26] = build_directions();

/// Tunables for the weights inside the value and step rewards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    /// Entropy weight per metre of cloud spread.
    pub kappa1: f64,
    /// Revisit penalty (m per logged point) far from the estimate.
    pub kappa2: f64,
    /// Step ceiling when the diffusion ratio is zero.
    pub step_ceiling: usize,
    /// Rate threshold for the diffusion ratio; `None` uses 1% of `aQ/lambda`.
    pub conc_threshold: Option<f64>,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            kappa1: 1.0,
            kappa2: 10.0,
            step_ceiling: 10,
            conc_threshold: None,
        }
    }
}

/// Append-only log of an agent's sensing positions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementLog {
    points: Vec<Vec3>,
}

impl MeasurementLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: Vec3) {
        self.points.push(p);
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FromIterator<Vec3> for MeasurementLog {
    fn from_iter<T: IntoIterator<Item = Vec3>>(iter: T) -> Self {
        Self { points: iter.into_iter().collect() }
    }
}
