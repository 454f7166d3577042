use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{dimension, invalid, Error, Result};
use crate::plant::LtiPlant;

/// Which running cost is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// `sum_i lambda_i ||u_i||_1`; its minimizers are the sparsest controls.
    L1,
    /// `sum_i lambda_i ||u_i||_1 + r_i ||u_i||_2^2 / 2`.
    L1L2,
    /// `sum_i r_i ||u_i||_2^2 / 2` (minimum energy).
    L2,
}

impl Objective {
    pub fn uses_l1(self) -> bool {
        matches!(self, Objective::L1 | Objective::L1L2)
    }

    pub fn uses_l2(self) -> bool {
        matches!(self, Objective::L1L2 | Objective::L2)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::L1 => "L1",
            Objective::L1L2 => "L1L2",
            Objective::L2 => "L2",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['/', '-', '_'], "").as_str() {
            "L1" => Ok(Objective::L1),
            "L1L2" => Ok(Objective::L1L2),
            "L2" => Ok(Objective::L2),
            other => Err(invalid(format!("unknown mode '{other}' (expected L1, L1L2 or L2)"))),
        }
    }
}

/// Steer `x0` to the origin at `horizon` seconds with `|u_i(t)| <= 1`,
/// transcribed on `intervals` uniform hold intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub plant: LtiPlant,
    pub x0: DVector<f64>,
    pub horizon: f64,
    pub intervals: usize,
    /// Per-input L1 weights.
    pub lambda: Vec<f64>,
    /// Per-input quadratic weights.
    pub r: Vec<f64>,
    pub mode: Objective,
}

impl ControlProblem {
    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    pub fn with_mode(&self, mode: Objective) -> Self {
        ControlProblem { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.check_state(&self.x0)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(format!("final time must be > 0, got {}", self.horizon)));
        }
        if self.intervals == 0 {
            return Err(invalid("N must be at least 1"));
        }
        let m = self.plant.inputs();
        if self.lambda.len() != m || self.r.len() != m {
            return Err(dimension(format!(
                "plant has {m} inputs but lambda has {} and r has {} entries",
                self.lambda.len(),
                self.r.len()
            )));
        }
        for (i, &l) in self.lambda.iter().enumerate() {
            let ok = if self.mode.uses_l1() { l > 0.0 } else { l >= 0.0 };
            if !ok || !l.is_finite() {
                return Err(invalid(format!(
                    "lambda[{i}] = {l} is not allowed in {} mode",
                    self.mode
                )));
            }
        }
        for (i, &r) in self.r.iter().enumerate() {
            let ok = if self.mode.uses_l2() { r > 0.0 } else { r >= 0.0 };
            if !ok || !r.is_finite() {
                return Err(invalid(format!("r[{i}] = {r} is not allowed in {} mode", self.mode)));
            }
        }
        Ok(())
    }
}
