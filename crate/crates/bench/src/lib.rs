//! Fixtures shared by the benchmarks.

use handsoff_core::reference::fourth_order_problem;
use handsoff_core::solver::transcribe;
use handsoff_core::{DiscreteProgram, Objective};
use nalgebra::DMatrix;

/// Transcribed reference problem on `intervals` hold intervals.
pub fn reference_program(mode: Objective, intervals: usize) -> DiscreteProgram {
    transcribe(&fourth_order_problem(mode, intervals)).expect("reference problem is well posed")
}

/// Deterministic dense test matrix with entries in `[-1, 1]`.
pub fn test_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| (((i * 31 + j * 17) % 23) as f64 / 11.0) - 1.0)
}
