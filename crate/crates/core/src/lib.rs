//! Maximum hands-off (sparsest), mixed L1/L2 and minimum-energy control of
//! linear time-invariant plants.
//!
//! A continuous-time problem is transcribed on a uniform zero-order-hold grid
//! into a convex program
//!
//! ```text
//! minimize   sum_k sum_i  lambda_i h |u_i[k]| + 1/2 r_i h u_i[k]^2
//! subject to |u_i[k]| <= 1,   Phi_N vec(U) = -A_d^N x0
//! ```
//!
//! which is solved by operator splitting. The [`analysis`] module measures
//! the support, switching structure and smoothness of the result and checks
//! it against the minimum-principle structure of L1-optimal controls.

pub mod analysis;
pub mod error;
pub mod plant;
pub mod problem;
pub mod reference;
pub mod scalar_ops;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use plant::LtiPlant;
pub use problem::{ControlProblem, Objective};
pub use solver::{DiscreteProgram, SolveOptions, SolveReport, SolveStatus};
pub use trajectory::{ControlTrajectory, StateTrajectory};
