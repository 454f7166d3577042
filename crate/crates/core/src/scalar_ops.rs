//! Pointwise maps from the optimality conditions of L1 and L1/L2 control,
//! and the scalar proximal operator used by the splitting solver.

use crate::error::{invalid, Result};

/// Weights of the scalar proximal problem
/// `min_{|u| <= 1} lambda |u| + r u^2 / 2 + rho (u - a)^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    pub lambda: f64,
    pub r: f64,
    pub rho: f64,
}

impl ProxParams {
    pub fn new(lambda: f64, r: f64, rho: f64) -> Result<Self> {
        let p = ProxParams { lambda, r, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(invalid(format!("r must be >= 0, got {}", self.r)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid(format!("rho must be > 0, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Dead-zone map of the L1 minimum principle: `-1` below `-lambda`, `+1`
/// above `lambda`, zero in between.
///
/// On the boundary `|w| = lambda` the map is set-valued; this returns 0.
pub fn dead_zone(w: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("dead-zone threshold must be > 0, got {lambda}")));
    }
    Ok(if w < -lambda {
        -1.0
    } else if w > lambda {
        1.0
    } else {
        0.0
    })
}

/// Soft threshold: moves `v` toward zero by `kappa`, clipping at zero.
///
/// `kappa` must be nonnegative; a negative value is treated as zero.
#[inline]
pub fn shrink(v: f64, kappa: f64) -> f64 {
    let kappa = kappa.max(0.0);
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

/// Clamp to the unit interval.
#[inline]
pub fn sat(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

/// `sat(shrink(v, lambda / r))`, the pointwise L1/L2-optimal control map.
pub fn sat_shrink(v: f64, lambda: f64, r: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("r must be > 0, got {r}")));
    }
    Ok(sat(shrink(v, lambda / r)))
}

/// Minimizer over `u` in `[-1, 1]` of
/// `lambda |u| + r u^2 / 2 + rho (u - a)^2 / 2`.
pub fn prox_box_l1_quad(a: f64, p: ProxParams) -> Result<f64> {
    p.validate()?;
    Ok(prox_unchecked(a, p.lambda, p.r, p.rho))
}

/// [`prox_box_l1_quad`] without parameter validation, for inner loops.
#[inline]
pub(crate) fn prox_unchecked(a: f64, lambda: f64, r: f64, rho: f64) -> f64 {
    let scale = r + rho;
    sat(shrink(rho * a / scale, lambda / scale))
}
