//! Transcription of a [`ControlProblem`] into a convex program, its solution
//! by operator splitting, and the minimum feasible horizon.

mod admm;
mod min_time;
mod program;

use nalgebra::DVector;

pub use min_time::{box_feasible, minimum_time, Feasibility};
pub use program::{transcribe, DiscreteProgram};

use crate::error::{invalid, Result};
use crate::problem::{ControlProblem, Objective};
use crate::trajectory::ControlTrajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Initial splitting penalty; adapted during the run.
    pub rho: f64,
    /// Bound on the consensus gap `||x - z||_inf`.
    pub tol_primal: f64,
    /// Bound on the KKT stationarity residual, relative to the largest
    /// objective weight.
    pub tol_dual: f64,
    /// Terminal-constraint tolerance, relative to `max(1, ||target||)`.
    pub tol_eq: f64,
    pub max_iter: usize,
    /// Try to finish by solving the KKT equations on the current support.
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rho: 1.0,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            tol_eq: 1e-6,
            max_iter: 50_000,
            polish: true,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("tol_primal", self.tol_primal),
            ("tol_dual", self.tol_dual),
            ("tol_eq", self.tol_eq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// The consensus gap stopped shrinking while still large, which is what
    /// an empty feasible set looks like to the splitting method.
    InfeasibleSuspected,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::InfeasibleSuspected => "infeasible_suspected",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub control: ControlTrajectory,
    /// Weighted support measure in seconds, threshold [`crate::analysis::DEFAULT_EPSILON`].
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    /// Value of the optimized objective (the J terms selected by the mode).
    pub objective: f64,
    pub iterations: usize,
    /// Box violation of the returned control, or the splitting consensus gap
    /// when it was returned straight from the iteration.
    pub primal_residual: f64,
    /// KKT stationarity residual relative to the largest objective weight.
    pub dual_residual: f64,
    /// `||Phi u - target||_2`.
    pub eq_residual: f64,
    pub status: SolveStatus,
    /// Whether the control came from the support-freezing KKT solve.
    pub polished: bool,
    /// Multiplier of the terminal constraint, in objective units.
    pub multiplier: DVector<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

pub fn solve(program: &DiscreteProgram, options: &SolveOptions) -> Result<SolveReport> {
    program.validate()?;
    options.validate()?;
    admm::run(program, options)
}

pub fn solve_problem(problem: &ControlProblem, options: &SolveOptions) -> Result<SolveReport> {
    solve(&transcribe(problem)?, options)
}

/// Sparsest (L1-optimal) control: `problem` with its mode forced to L1.
pub fn solve_l1(problem: &ControlProblem, options: &SolveOptions) -> Result<SolveReport> {
    solve_problem(&problem.with_mode(Objective::L1), options)
}

/// Minimum-energy control under the input bound.
pub fn solve_l2(problem: &ControlProblem, options: &SolveOptions) -> Result<SolveReport> {
    solve_problem(&problem.with_mode(Objective::L2), options)
}
