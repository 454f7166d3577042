use nalgebra::{DMatrix, DVector};

use crate::error::{dimension, invalid, Result};
use crate::plant::{discretize, reachability_matrix};
use crate::problem::ControlProblem;

/// Finite-dimensional convex program
///
/// ```text
/// minimize   sum_j lambda_diag[j] |u_j| + r_diag[j] u_j^2 / 2
/// subject to |u_j| <= box_bound,  phi u = target
/// ```
///
/// over the stacked control `u = [u[0]; ...; u[N-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProgram {
    pub phi: DMatrix<f64>,
    /// `-Ad^N x0`.
    pub target: DVector<f64>,
    /// Per-sample L1 weights `lambda_i h` (zero in L2 mode).
    pub lambda_diag: DVector<f64>,
    /// Per-sample quadratic weights `r_i h` (zero in L1 mode).
    pub r_diag: DVector<f64>,
    pub box_bound: f64,
    pub step: f64,
    pub inputs: usize,
    /// Per-input weights of the original problem, used for reporting
    /// J0/J1/J2 regardless of which terms are optimized.
    pub lambda: Vec<f64>,
    pub r: Vec<f64>,
}

impl DiscreteProgram {
    pub fn variables(&self) -> usize {
        self.phi.ncols()
    }

    pub fn intervals(&self) -> usize {
        self.variables() / self.inputs
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.variables();
        if self.inputs == 0 || nv == 0 || !nv.is_multiple_of(self.inputs) {
            return Err(dimension(format!(
                "{nv} columns do not split into {} inputs",
                self.inputs
            )));
        }
        if self.target.len() != self.phi.nrows() {
            return Err(dimension(format!(
                "target has length {}, constraint matrix has {} rows",
                self.target.len(),
                self.phi.nrows()
            )));
        }
        if self.lambda_diag.len() != nv || self.r_diag.len() != nv {
            return Err(dimension("weight vectors must have one entry per variable"));
        }
        if self.lambda.len() != self.inputs || self.r.len() != self.inputs {
            return Err(dimension("per-input weights must have one entry per input"));
        }
        if self
            .lambda_diag
            .iter()
            .chain(self.r_diag.iter())
            .any(|&w| !(w >= 0.0 && w.is_finite()))
        {
            return Err(invalid("objective weights must be finite and nonnegative"));
        }
        if !(self.box_bound > 0.0 && self.box_bound.is_finite()) {
            return Err(invalid(format!("box bound must be > 0, got {}", self.box_bound)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid(format!("grid step must be > 0, got {}", self.step)));
        }
        if self.phi.iter().chain(self.target.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("constraint data must be finite"));
        }
        Ok(())
    }

    /// `sum_i lambda_i int |u_i| dt` by the rectangle rule.
    pub fn j1(&self, u: &[f64]) -> f64 {
        self.per_input_sum(u, |i, v| self.lambda[i] * v.abs())
    }

    /// `sum_i r_i / 2 int u_i^2 dt`.
    pub fn j2(&self, u: &[f64]) -> f64 {
        self.per_input_sum(u, |i, v| 0.5 * self.r[i] * v * v)
    }

    /// `sum_i lambda_i |supp_eps(u_i)|`, counting samples with `|u| > eps`.
    pub fn j0(&self, u: &[f64], epsilon: f64) -> f64 {
        self.per_input_sum(u, |i, v| if v.abs() > epsilon { self.lambda[i] } else { 0.0 })
    }

    /// Value of the optimized objective.
    pub fn objective(&self, u: &[f64]) -> f64 {
        u.iter()
            .enumerate()
            .map(|(j, v)| self.lambda_diag[j] * v.abs() + 0.5 * self.r_diag[j] * v * v)
            .sum()
    }

    /// `||phi u - target||_2`.
    pub fn equality_residual(&self, u: &[f64]) -> f64 {
        (&self.phi * DVector::from_column_slice(u) - &self.target).norm()
    }

    fn per_input_sum(&self, u: &[f64], f: impl Fn(usize, f64) -> f64) -> f64 {
        self.step * u.iter().enumerate().map(|(j, &v)| f(j % self.inputs, v)).sum::<f64>()
    }
}

/// Zero-order-hold transcription on a uniform grid `h = T / N`.
pub fn transcribe(problem: &ControlProblem) -> Result<DiscreteProgram> {
    problem.validate()?;
    let h = problem.step();
    let n_int = problem.intervals;
    let m = problem.plant.inputs();
    let disc = discretize(&problem.plant, h)?;
    let reach = reachability_matrix(&disc.ad, &disc.bd, n_int)?;
    let target = -reach.free(&problem.x0);
    if reach.phi.iter().chain(target.iter()).any(|v| !v.is_finite()) {
        return Err(invalid("reachability data overflowed; horizon too long for this plant"));
    }

    let l1 = problem.mode.uses_l1();
    let l2 = problem.mode.uses_l2();
    let lambda_diag = DVector::from_fn(m * n_int, |j, _| if l1 { problem.lambda[j % m] * h } else { 0.0 });
    let r_diag = DVector::from_fn(m * n_int, |j, _| if l2 { problem.r[j % m] * h } else { 0.0 });

    Ok(DiscreteProgram {
        phi: reach.phi,
        target,
        lambda_diag,
        r_diag,
        box_bound: 1.0,
        step: h,
        inputs: m,
        lambda: problem.lambda.clone(),
        r: problem.r.clone(),
    })
}
