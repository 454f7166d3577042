use nalgebra::{DMatrix, DVector};

use super::{expm, LtiPlant};
use crate::error::{invalid, Error, Result};
use crate::trajectory::ControlTrajectory;

// Relative eigenvalue floor below which a Gramian is treated as singular.
const RANK_TOL: f64 = 1e-12;

/// `W_T = int_0^T e^{A t} B B^T e^{A^T t} dt`, via the exponential of the
/// block matrix `[[-A, B B^T], [0, A^T]] T` (Van Loan).
pub fn controllability_gramian(plant: &LtiPlant, horizon: f64) -> Result<DMatrix<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be > 0, got {horizon}")));
    }
    let n = plant.states();
    let a = plant.a();
    let b = plant.b();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-a * horizon));
    block.view_mut((0, n), (n, n)).copy_from(&(b * b.transpose() * horizon));
    block.view_mut((n, n), (n, n)).copy_from(&(a.transpose() * horizon));
    let e = expm(&block)?;
    let g12 = e.view((0, n), (n, n));
    let g22 = e.view((n, n), (n, n));
    let w = g22.transpose() * g12;
    Ok((&w + w.transpose()) * 0.5)
}

/// Numerical rank of the Gramian over `[0, 1]`, equal to the dimension of
/// the controllable subspace.
pub fn controllability_rank(plant: &LtiPlant) -> Result<usize> {
    let w = controllability_gramian(plant, 1.0)?;
    let eig = w.symmetric_eigenvalues();
    let top = eig.amax();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(eig.iter().filter(|&&v| v > RANK_TOL * top).count())
}

pub(crate) fn require_controllable(plant: &LtiPlant) -> Result<()> {
    let rank = controllability_rank(plant)?;
    if rank < plant.states() {
        return Err(Error::Rank(format!(
            "pair (A, B) is not controllable: Gramian rank {rank} < {}",
            plant.states()
        )));
    }
    Ok(())
}

/// Unconstrained minimum-energy control steering `x0` to the origin at `T`:
/// `u(t) = -B^T e^{A^T (T - t)} W_T^{-1} e^{A T} x0`.
///
/// The continuous control is sampled at the midpoint of each of the `N`
/// hold intervals, which keeps the terminal error of the held signal
/// second order in the step.
pub fn min_energy_closed_form(
    plant: &LtiPlant,
    x0: &DVector<f64>,
    horizon: f64,
    intervals: usize,
) -> Result<ControlTrajectory> {
    plant.check_state(x0)?;
    if intervals == 0 {
        return Err(invalid("horizon must contain at least one interval"));
    }
    let w = controllability_gramian(plant, horizon)?;
    let eig = w.clone().symmetric_eigenvalues();
    let top = eig.amax();
    if top == 0.0 || eig.min() <= RANK_TOL * top {
        return Err(Error::Rank("controllability Gramian is singular".into()));
    }
    let chol = w
        .cholesky()
        .ok_or_else(|| Error::Rank("controllability Gramian is not positive definite".into()))?;
    let eta = chol.solve(&(expm(&(plant.a() * horizon))? * x0));

    let h = horizon / intervals as f64;
    let at = plant.a().transpose();
    let bt = plant.b().transpose();
    let m = plant.inputs();
    let mut values = DMatrix::zeros(m, intervals);
    for k in 0..intervals {
        let t = (k as f64 + 0.5) * h;
        let costate = expm(&(&at * (horizon - t)))? * &eta;
        values.set_column(k, &(-(&bt * costate)));
    }
    ControlTrajectory::new(h, values)
}
