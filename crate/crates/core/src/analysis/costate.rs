use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{dimension, invalid, Error, Result};
use crate::plant::{discretize, reachability_matrix, LtiPlant};
use crate::trajectory::ControlTrajectory;

/// Violations up to this fraction of `lambda` still count as consistent.
pub const COSTATE_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct CostateCheck {
    pub feasible: bool,
    /// Smallest achievable max violation of the sign conditions, in the
    /// units of the switching function.
    pub residual: f64,
    pub terminal_costate: DVector<f64>,
}

enum Level {
    Bang(f64),
    Off,
    Between(f64),
}

fn classify(v: f64, epsilon: f64) -> Level {
    if v.abs() <= epsilon {
        Level::Off
    } else if (v.abs() - 1.0).abs() <= epsilon {
        Level::Bang(v.signum())
    } else {
        Level::Between(v.signum())
    }
}

/// Search for a terminal costate `p_T` whose switching function
/// `w(t) = B' e^{A'(T-t)} p_T` explains the sign pattern of `u`.
///
/// On each hold interval `w` is replaced by its interval average, which
/// is exactly the multiplier condition of the transcribed program. The
/// conditions are `w <= -lambda` on `+1` samples, `w >= lambda` on `-1`
/// samples, `|w| <= lambda` on zero samples and `w = -lambda sign(u)` on
/// samples strictly between levels. The smallest uniform relaxation `s`
/// making them solvable is found by a linear program.
pub fn costate_consistency(
    plant: &LtiPlant,
    u: &ControlTrajectory,
    lambda: &[f64],
    epsilon: f64,
) -> Result<CostateCheck> {
    let m = plant.inputs();
    let n = plant.states();
    if u.inputs() != m || lambda.len() != m {
        return Err(dimension(format!(
            "control has {} channels and {} weights, plant has {m} inputs",
            u.inputs(),
            lambda.len()
        )));
    }
    if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(invalid("costate check needs positive L1 weights"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    let h = u.step();
    let disc = discretize(plant, h)?;
    let reach = reachability_matrix(&disc.ad, &disc.bd, u.len())?;
    // Row j of g gives the averaged switching function of sample j, scaled by 1/lambda.
    let mut g: DMatrix<f64> = reach.phi.transpose() / h;
    for j in 0..g.nrows() {
        let w = lambda[j % m];
        g.row_mut(j).scale_mut(1.0 / w);
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|c| {
            let s = g.column(c).amax();
            if s > 0.0 {
                1.0 / s
            } else {
                1.0
            }
        })
        .collect();

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let q: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let slack = lp.add_var(1.0, (0.0, f64::INFINITY));
    let values = u.as_vec();
    for (j, &v) in values.iter().enumerate() {
        let mut row: Vec<_> = (0..n)
            .filter(|&c| g[(j, c)] != 0.0)
            .map(|c| (q[c], g[(j, c)] * col_scale[c]))
            .collect();
        let k = row.len();
        match classify(v, epsilon) {
            Level::Bang(sign) if sign > 0.0 => {
                row.push((slack, -1.0));
                lp.add_constraint(row.as_slice(), ComparisonOp::Le, -1.0);
            }
            Level::Bang(_) => {
                row.push((slack, 1.0));
                lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 1.0);
            }
            Level::Off => {
                row.push((slack, -1.0));
                lp.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
                row[k] = (slack, 1.0);
                lp.add_constraint(row.as_slice(), ComparisonOp::Ge, -1.0);
            }
            Level::Between(sign) => {
                row.push((slack, -1.0));
                lp.add_constraint(row.as_slice(), ComparisonOp::Le, -sign);
                row[k] = (slack, 1.0);
                lp.add_constraint(row.as_slice(), ComparisonOp::Ge, -sign);
            }
        }
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::LinearProgram("costate LP was interrupted".into()))?;
    let s = solution.objective().max(0.0);
    let terminal_costate = DVector::from_fn(n, |c, _| solution.var_value(q[c]) * col_scale[c]);
    let lambda_max = lambda.iter().copied().fold(0.0, f64::max);
    Ok(CostateCheck {
        feasible: s <= COSTATE_TOLERANCE,
        residual: s * lambda_max,
        terminal_costate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::double_integrator;

    #[test]
    fn zero_control_is_consistent() {
        let u = ControlTrajectory::zeros(0.1, 1, 40).unwrap();
        let check = costate_consistency(&double_integrator(), &u, &[1.0], 1e-2).unwrap();
        assert!(check.feasible);
        assert!(check.residual <= 1e-12);
    }

    #[test]
    fn dense_alternation_is_inconsistent() {
        let v: Vec<f64> = (0..40).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let u = ControlTrajectory::scalar(0.1, &v).unwrap();
        let check = costate_consistency(&double_integrator(), &u, &[1.0], 1e-2).unwrap();
        assert!(!check.feasible);
        assert!(check.residual > 0.1, "residual {}", check.residual);
    }

    #[test]
    fn single_switch_bang_bang_is_consistent() {
        // w(t) = p2 + (T - t) p1 on the double integrator.
        let mut v = vec![1.0; 10];
        v.extend(vec![0.0; 10]);
        v.extend(vec![-1.0; 10]);
        let u = ControlTrajectory::scalar(0.1, &v).unwrap();
        let check = costate_consistency(&double_integrator(), &u, &[1.0], 1e-2).unwrap();
        assert!(check.feasible, "residual {}", check.residual);
        let p = &check.terminal_costate;
        let w_start = p[1] + 3.0 * p[0];
        assert!(w_start < 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let u = ControlTrajectory::zeros(0.1, 1, 4).unwrap();
        let p = double_integrator();
        assert!(costate_consistency(&p, &u, &[0.0], 1e-2).is_err());
        assert!(costate_consistency(&p, &u, &[1.0, 1.0], 1e-2).is_err());
        assert!(costate_consistency(&p, &u, &[1.0], 0.7).is_err());
    }
}
