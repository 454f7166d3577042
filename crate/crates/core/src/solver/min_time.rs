use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::plant::{discretize, reachability_matrix, LtiPlant};

// Horizons are bracketed by doubling from one second up to this bound.
const MAX_HORIZON: f64 = 1024.0;
const FEASIBILITY_TOL: f64 = 1e-9;
// Normalized coefficients below this are dropped from the LP.
const NEGLIGIBLE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `min ||phi u - target||_1` over the box, with rows scaled to unit norm.
    pub residual: f64,
}

/// Decide whether `phi u = target` has a solution with `|u_j| <= 1` by
/// minimizing the (row-normalized) L1 equality residual over the box.
pub fn box_feasible(phi: &DMatrix<f64>, target: &DVector<f64>) -> Result<Feasibility> {
    let rows = phi.nrows();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let u: Vec<_> = (0..phi.ncols()).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let mut scaled_target_norm = 0.0;
    for i in 0..rows {
        let big = phi.row(i).amax();
        let norm = big * (phi.row(i) / big).norm();
        let scale = if norm > 0.0 && norm.is_finite() {
            1.0 / norm
        } else {
            1.0
        };
        let over = lp.add_var(1.0, (0.0, f64::INFINITY));
        let under = lp.add_var(1.0, (0.0, f64::INFINITY));
        let mut terms: Vec<_> = u
            .iter()
            .enumerate()
            .map(|(j, &var)| (var, phi[(i, j)] * scale))
            .filter(|(_, c)| c.abs() > NEGLIGIBLE)
            .collect();
        terms.push((over, -1.0));
        terms.push((under, 1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, target[i] * scale);
        scaled_target_norm += (target[i] * scale).abs();
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::LinearProgram("feasibility LP was interrupted".into()))?;
    let residual = solution.objective().max(0.0);
    Ok(Feasibility {
        feasible: residual <= FEASIBILITY_TOL * scaled_target_norm.max(1.0),
        residual,
    })
}

/// Shortest horizon over which `x0` can be brought to the origin with
/// `|u_i| <= 1`, found by bisection on the feasibility of the transcribed
/// terminal constraint.
///
/// `density` is the number of hold intervals per second used at every
/// probe (`N = ceil(T density)`). The returned horizon is feasible on that
/// grid and lies within `tol` of the infeasible side of the bracket.
pub fn minimum_time(plant: &LtiPlant, x0: &DVector<f64>, density: f64, tol: f64) -> Result<f64> {
    plant.check_state(x0)?;
    if !(density > 0.0 && density.is_finite()) {
        return Err(invalid(format!("grid density must be > 0, got {density}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid(format!("horizon tolerance must be > 0, got {tol}")));
    }
    crate::plant::require_controllable(plant)?;
    if x0.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    let feasible = |horizon: f64| -> Result<bool> {
        let intervals = ((horizon * density).ceil() as usize).max(1);
        let disc = discretize(plant, horizon / intervals as f64)?;
        let reach = reachability_matrix(&disc.ad, &disc.bd, intervals)?;
        let target = -reach.free(x0);
        if reach.phi.iter().chain(target.iter()).any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(box_feasible(&reach.phi, &target)?.feasible)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_HORIZON {
            return Err(Error::NoBracket(MAX_HORIZON));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
