//! Continuous-time LTI plants, zero-order-hold discretization and the
//! finite-horizon reachability map.

mod energy;
mod expm;

use nalgebra::{DMatrix, DVector};

pub(crate) use energy::require_controllable;
pub use energy::{controllability_gramian, controllability_rank, min_energy_closed_form};
pub use expm::expm;

use crate::error::{dimension, invalid, Result};
use crate::trajectory::{ControlTrajectory, StateTrajectory};

/// `dx/dt = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LtiPlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(dimension(format!("A must be square, got {}x{}", a.nrows(), a.ncols())));
        }
        if a.nrows() == 0 || b.ncols() == 0 {
            return Err(dimension("plant needs at least one state and one input"));
        }
        if b.nrows() != a.nrows() {
            return Err(dimension(format!(
                "B has {} rows but A is {}x{}",
                b.nrows(),
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("plant matrices must be finite"));
        }
        Ok(LtiPlant { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.states() {
            return Err(dimension(format!(
                "state has length {}, plant has {} states",
                x.len(),
                self.states()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("state must be finite"));
        }
        Ok(())
    }
}

/// Exact discrete-time model under zero-order hold with step `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub ad: DMatrix<f64>,
    pub bd: DMatrix<f64>,
    pub step: f64,
}

/// `Ad = e^{A h}`, `Bd = int_0^h e^{A t} B dt`, both read off the exponential
/// of the block matrix `[[A, B], [0, 0]] h`.
pub fn discretize(plant: &LtiPlant, h: f64) -> Result<Discretized> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("discretization step must be > 0, got {h}")));
    }
    let n = plant.states();
    let m = plant.inputs();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(plant.a() * h));
    aug.view_mut((0, n), (n, m)).copy_from(&(plant.b() * h));
    let e = expm(&aug)?;
    Ok(Discretized {
        ad: e.view((0, 0), (n, n)).into_owned(),
        bd: e.view((0, n), (n, m)).into_owned(),
        step: h,
    })
}

/// Propagate `x0` through the zero-order-hold model driven by `u`.
pub fn simulate(plant: &LtiPlant, x0: &DVector<f64>, u: &ControlTrajectory) -> Result<StateTrajectory> {
    plant.check_state(x0)?;
    if u.inputs() != plant.inputs() {
        return Err(dimension(format!(
            "control has {} channels, plant has {} inputs",
            u.inputs(),
            plant.inputs()
        )));
    }
    let d = discretize(plant, u.step())?;
    let mut states = DMatrix::zeros(plant.states(), u.len() + 1);
    states.set_column(0, x0);
    let mut x = x0.clone();
    for k in 0..u.len() {
        x = &d.ad * &x + &d.bd * u.values().column(k);
        states.set_column(k + 1, &x);
    }
    Ok(StateTrajectory { step: u.step(), states })
}

/// Terminal-state map over `N` steps: `x[N] = Ad^N x0 + phi vec(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reachability {
    /// `[Ad^{N-1} Bd, Ad^{N-2} Bd, ..., Bd]`, `n x (m N)`.
    pub phi: DMatrix<f64>,
    /// `Ad^N`.
    pub transition: DMatrix<f64>,
}

impl Reachability {
    /// Free response `Ad^N x0`.
    pub fn free(&self, x0: &DVector<f64>) -> DVector<f64> {
        &self.transition * x0
    }
}

pub fn reachability_matrix(ad: &DMatrix<f64>, bd: &DMatrix<f64>, intervals: usize) -> Result<Reachability> {
    if intervals == 0 {
        return Err(invalid("horizon must contain at least one interval"));
    }
    if !ad.is_square() || bd.nrows() != ad.nrows() {
        return Err(dimension(format!(
            "Ad is {}x{}, Bd is {}x{}",
            ad.nrows(),
            ad.ncols(),
            bd.nrows(),
            bd.ncols()
        )));
    }
    let n = ad.nrows();
    let m = bd.ncols();
    let mut phi = DMatrix::zeros(n, m * intervals);
    // Block k (acting on u[k]) is Ad^{N-1-k} Bd; fill from the last block back.
    let mut block = bd.clone();
    for k in (0..intervals).rev() {
        phi.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = ad * &block;
    }
    let mut transition = DMatrix::identity(n, n);
    for _ in 0..intervals {
        transition = ad * &transition;
    }
    Ok(Reachability { phi, transition })
}
