//! Benchmark plants and problems used by tests, benches and the CLI docs.

use nalgebra::{DMatrix, DVector};

use crate::plant::LtiPlant;
use crate::problem::{ControlProblem, Objective};

/// Fourth-order single-input plant with poles at `0, 0, +-j`.
pub fn fourth_order_plant() -> LtiPlant {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, -1.0, 0.0, 0.0,
        1.0,  0.0, 0.0, 0.0,
        0.0,  1.0, 0.0, 0.0,
        0.0,  0.0, 1.0, 0.0,
    ]);
    let b = DMatrix::from_column_slice(4, 1, &[2.0, 0.0, 0.0, 0.0]);
    LtiPlant::new(a, b).expect("reference plant is well formed")
}

/// Drive the fourth-order plant from `[1, 1, 1, 1]` to the origin in 10 s
/// with unit weights.
pub fn fourth_order_problem(mode: Objective, intervals: usize) -> ControlProblem {
    ControlProblem {
        plant: fourth_order_plant(),
        x0: DVector::from_element(4, 1.0),
        horizon: 10.0,
        intervals,
        lambda: vec![1.0],
        r: vec![1.0],
        mode,
    }
}

/// `x1' = x2, x2' = u`.
pub fn double_integrator() -> LtiPlant {
    LtiPlant::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
    )
    .expect("reference plant is well formed")
}

/// Rest-to-rest transfer of the double integrator from `[1, 0]`.
pub fn double_integrator_problem(mode: Objective, horizon: f64, intervals: usize) -> ControlProblem {
    ControlProblem {
        plant: double_integrator(),
        x0: DVector::from_column_slice(&[1.0, 0.0]),
        horizon,
        intervals,
        lambda: vec![1.0],
        r: vec![1.0],
        mode,
    }
}
