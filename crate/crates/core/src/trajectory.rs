use nalgebra::{DMatrix, DVector};

use crate::error::{dimension, invalid, Result};

/// Piecewise-constant control on a uniform grid: `values[(i, k)]` is input
/// `i` held over `[k h, (k + 1) h)`.
///
/// Storage is column-major `m x N`, so [`ControlTrajectory::as_vec`] is the
/// stacked vector `[u[0]; u[1]; ...; u[N-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory {
    step: f64,
    values: DMatrix<f64>,
}

impl ControlTrajectory {
    pub fn new(step: f64, values: DMatrix<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("grid step must be > 0, got {step}")));
        }
        if values.ncols() == 0 || values.nrows() == 0 {
            return Err(dimension("control trajectory needs at least one input and one sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("control samples must be finite"));
        }
        Ok(ControlTrajectory { step, values })
    }

    /// Build from a stacked sample vector of length `m * N`.
    pub fn from_stacked(step: f64, inputs: usize, stacked: &[f64]) -> Result<Self> {
        if inputs == 0 || !stacked.len().is_multiple_of(inputs) {
            return Err(dimension(format!(
                "{} samples cannot be split into {inputs} channels",
                stacked.len()
            )));
        }
        let n = stacked.len() / inputs;
        Self::new(step, DMatrix::from_column_slice(inputs, n, stacked))
    }

    /// A single-input trajectory.
    pub fn scalar(step: f64, samples: &[f64]) -> Result<Self> {
        Self::from_stacked(step, 1, samples)
    }

    pub fn zeros(step: f64, inputs: usize, intervals: usize) -> Result<Self> {
        Self::new(step, DMatrix::zeros(inputs, intervals))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn inputs(&self) -> usize {
        self.values.nrows()
    }

    /// Number of grid intervals `N`.
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.len() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn as_vec(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn sample(&self, k: usize) -> DVector<f64> {
        self.values.column(k).into_owned()
    }

    pub fn channel(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.values[(i, k)])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    /// Largest sample-wise difference from another trajectory on the same grid.
    pub fn max_abs_diff(&self, other: &ControlTrajectory) -> Result<f64> {
        if self.values.shape() != other.values.shape() {
            return Err(dimension(format!(
                "trajectory shapes differ: {:?} vs {:?}",
                self.values.shape(),
                other.values.shape()
            )));
        }
        Ok((&self.values - &other.values).amax())
    }
}

/// States at the grid points `t = 0, h, ..., N h`, one column per time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub step: f64,
    pub states: DMatrix<f64>,
}

impl StateTrajectory {
    pub fn state(&self, k: usize) -> DVector<f64> {
        self.states.column(k).into_owned()
    }

    pub fn initial(&self) -> DVector<f64> {
        self.state(0)
    }

    pub fn terminal(&self) -> DVector<f64> {
        self.state(self.states.ncols() - 1)
    }

    /// Number of stored grid points (`N + 1`).
    pub fn points(&self) -> usize {
        self.states.ncols()
    }
}
