//! Operator splitting for the transcribed program.
//!
//! The iterate pair `(x, z)` splits the problem into
//!
//! * an equality-constrained quadratic step in `x`:
//!   `min r'x^2/2 + rho/2 ||x - z + y||^2  s.t.  Psi x = s`, solved through
//!   the `n x n` Schur complement `Psi (R + rho I)^{-1} Psi^T`, factored once
//!   per value of `rho`;
//! * a separable proximal step in `z`: the L1 weight and the box, applied
//!   sample by sample with [`prox_unchecked`].
//!
//! `Psi`/`s` are the constraint rows scaled to unit norm and the weights are
//! normalized so the largest is one. Convergence is declared only on a KKT
//! certificate of the returned `z` with the multiplier of the `x` step. Every
//! [`POLISH_EVERY`] iterations the support pattern of `z` is frozen and the
//! remaining samples are solved from the KKT equations directly; the result
//! is accepted only if it also passes the certificate.

use nalgebra::{DMatrix, DVector};

use super::program::DiscreteProgram;
use super::{SolveOptions, SolveReport, SolveStatus};
use crate::analysis::DEFAULT_EPSILON;
use crate::error::Result;
use crate::scalar_ops::prox_unchecked;
use crate::trajectory::ControlTrajectory;

const RELAXATION: f64 = 1.6;
const POLISH_EVERY: usize = 100;
const ADAPT_EVERY: usize = 100;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const STALL_WINDOW: usize = 1000;
const STALL_FLOOR: f64 = 1e-3;
const STALL_GAIN: f64 = 0.99;
const MAX_DENSE_POLISH: usize = 400;

/// Row-equilibrated, weight-normalized copy of a [`DiscreteProgram`].
struct Scaled {
    psi: DMatrix<f64>,
    target: DVector<f64>,
    row_scale: DVector<f64>,
    c: DVector<f64>,
    r: DVector<f64>,
    sigma: f64,
    bound: f64,
    /// `max(1, ||target||)` in original units.
    target_scale: f64,
}

impl Scaled {
    fn new(p: &DiscreteProgram) -> Self {
        let rows = p.phi.nrows();
        let row_scale = DVector::from_fn(rows, |i, _| {
            let norm = p.phi.row(i).norm();
            if norm > 0.0 {
                1.0 / norm
            } else {
                1.0
            }
        });
        let mut psi = p.phi.clone();
        for i in 0..rows {
            psi.row_mut(i).scale_mut(row_scale[i]);
        }
        let target = p.target.component_mul(&row_scale);
        let sigma = p.lambda_diag.amax().max(p.r_diag.amax());
        let sigma = if sigma > 0.0 { sigma } else { 1.0 };
        Scaled {
            psi,
            target,
            row_scale,
            c: &p.lambda_diag / sigma,
            r: &p.r_diag / sigma,
            sigma,
            bound: p.box_bound,
            target_scale: p.target.norm().max(1.0),
        }
    }

    /// `||Phi u - target||_2` in original units.
    fn equality_residual(&self, u: &DVector<f64>) -> f64 {
        let scaled = &self.psi * u - &self.target;
        scaled.component_div(&self.row_scale).norm()
    }

    /// Largest distance of `-g_j - r_j u_j` from the subdifferential of
    /// `c_j |.| + indicator(|.| <= bound)` at `u_j`, where `g = Psi^T nu`.
    fn stationarity(&self, u: &DVector<f64>, g: &DVector<f64>) -> f64 {
        let edge = self.bound * (1.0 - 1e-12);
        let mut worst = 0.0f64;
        for j in 0..u.len() {
            let v = u[j];
            let s = -g[j] - self.r[j] * v;
            let c = self.c[j];
            let (lo, hi) = if v >= edge {
                (c, f64::INFINITY)
            } else if v <= -edge {
                (f64::NEG_INFINITY, -c)
            } else if v > 0.0 {
                (c, c)
            } else if v < 0.0 {
                (-c, -c)
            } else {
                (-c, c)
            };
            worst = worst.max(lo - s).max(s - hi);
        }
        worst
    }

    fn box_violation(&self, u: &DVector<f64>) -> f64 {
        u.iter().map(|v| (v.abs() - self.bound).max(0.0)).fold(0.0, f64::max)
    }

    /// Multiplier of `Phi u = target` in original objective units.
    fn unscale_multiplier(&self, nu: &DVector<f64>) -> DVector<f64> {
        nu.component_mul(&self.row_scale) * self.sigma
    }
}

enum Inverse {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Pseudo(nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Inverse {
    fn of(k: DMatrix<f64>) -> Self {
        match k.clone().cholesky() {
            Some(ch) => Inverse::Cholesky(ch),
            None => Inverse::Pseudo(k.svd(true, true)),
        }
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            Inverse::Cholesky(ch) => ch.solve(b),
            Inverse::Pseudo(svd) => pseudo_solve(svd, b),
        }
    }
}

fn pseudo_solve(svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, b: &DVector<f64>) -> DVector<f64> {
    let eps = 1e-12 * svd.singular_values.amax().max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(b.len()))
}

/// Factored `x` step for a fixed `rho`.
struct XStep {
    inv_d: DVector<f64>,
    schur: Inverse,
}

impl XStep {
    fn new(sc: &Scaled, rho: f64) -> Self {
        let inv_d = sc.r.map(|r| 1.0 / (r + rho));
        let mut weighted = sc.psi.clone();
        for (j, mut col) in weighted.column_iter_mut().enumerate() {
            col *= inv_d[j];
        }
        let k = &weighted * sc.psi.transpose();
        XStep {
            inv_d,
            schur: Inverse::of(k),
        }
    }
}

struct Polished {
    u: DVector<f64>,
    nu: DVector<f64>,
    dual: f64,
    eq: f64,
}

pub(crate) fn run(program: &DiscreteProgram, opts: &SolveOptions) -> Result<SolveReport> {
    let sc = Scaled::new(program);
    let nv = program.variables();
    let eq_tol = opts.tol_eq * sc.target_scale;

    let mut rho = opts.rho;
    let mut step = XStep::new(&sc, rho);
    let mut x = DVector::zeros(nv);
    let mut z = DVector::<f64>::zeros(nv);
    let mut z_prev = DVector::zeros(nv);
    let mut y = DVector::<f64>::zeros(nv);
    let mut v = DVector::zeros(nv);
    let mut w = DVector::zeros(nv);
    let mut g = DVector::zeros(nv);
    let mut nu = DVector::zeros(sc.psi.nrows());

    let mut best_primal = f64::INFINITY;
    let mut best_iter = 0usize;
    let mut last_primal = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        // x step
        v.copy_from(&(&z - &y));
        v *= rho;
        w.copy_from(&v.component_mul(&step.inv_d));
        let rhs = &sc.psi * &w - &sc.target;
        nu = step.schur.solve(&rhs);
        g.gemv_tr(1.0, &sc.psi, &nu, 0.0);
        for j in 0..nv {
            x[j] = (v[j] - g[j]) * step.inv_d[j];
        }

        // z and scaled-dual steps
        z_prev.copy_from(&z);
        let mut rd = 0.0f64;
        let mut rp = 0.0f64;
        for j in 0..nv {
            let relaxed = RELAXATION * x[j] + (1.0 - RELAXATION) * z_prev[j];
            let zj = prox_box(relaxed + y[j], sc.c[j], rho, sc.bound);
            y[j] += relaxed - zj;
            z[j] = zj;
            rp = rp.max((x[j] - zj).abs());
            rd = rd.max((zj - z_prev[j]).abs());
        }
        rd *= rho;

        if rp < best_primal * STALL_GAIN {
            best_primal = rp;
            best_iter = iter;
        }

        if rp <= opts.tol_primal && rd <= opts.tol_dual {
            let kkt = sc.stationarity(&z, &g);
            let eq = sc.equality_residual(&z);
            if kkt <= opts.tol_dual && eq <= eq_tol {
                return Ok(report(
                    program,
                    &sc,
                    z,
                    &nu,
                    iter,
                    rp,
                    kkt,
                    eq,
                    SolveStatus::Converged,
                    false,
                ));
            }
        }

        if iter % POLISH_EVERY == 0 && opts.polish {
            if let Some(p) = polish(&sc, &z, &nu) {
                if p.dual <= opts.tol_dual && p.eq <= eq_tol {
                    let primal = sc.box_violation(&p.u);
                    return Ok(report(
                        program,
                        &sc,
                        p.u,
                        &p.nu,
                        iter,
                        primal,
                        p.dual,
                        p.eq,
                        SolveStatus::Converged,
                        true,
                    ));
                }
            }
        }

        if iter - best_iter >= STALL_WINDOW && rp > STALL_FLOOR {
            let kkt = sc.stationarity(&z, &g);
            let eq = sc.equality_residual(&z);
            return Ok(report(
                program,
                &sc,
                z,
                &nu,
                iter,
                rp,
                kkt,
                eq,
                SolveStatus::InfeasibleSuspected,
                false,
            ));
        }

        if iter % ADAPT_EVERY == 0 && rp > 0.0 && rd > 0.0 {
            let factor = (rp / rd).sqrt();
            if !(0.2..=5.0).contains(&factor) {
                let next = (rho * factor).clamp(RHO_MIN, RHO_MAX);
                if next != rho {
                    y *= rho / next;
                    rho = next;
                    step = XStep::new(&sc, rho);
                }
            }
        }
        last_primal = rp;
    }

    let kkt = sc.stationarity(&z, &g);
    let eq = sc.equality_residual(&z);
    Ok(report(
        program,
        &sc,
        z,
        &nu,
        opts.max_iter,
        last_primal,
        kkt,
        eq,
        SolveStatus::MaxIter,
        false,
    ))
}

#[inline]
fn prox_box(a: f64, c: f64, rho: f64, bound: f64) -> f64 {
    if bound == 1.0 {
        prox_unchecked(a, c, 0.0, rho)
    } else {
        bound * prox_unchecked(a / bound, c / bound, 0.0, rho)
    }
}

/// Freeze samples of `z` at `0` or `+-bound`, solve the KKT equations for the
/// rest together with the multiplier, and return the candidate.
///
/// Under-determined systems are resolved by the minimum-norm correction of
/// the current `(z, nu)`.
fn polish(sc: &Scaled, z: &DVector<f64>, nu_guess: &DVector<f64>) -> Option<Polished> {
    let rows = sc.psi.nrows();
    let free: Vec<usize> = (0..z.len()).filter(|&j| z[j] != 0.0 && z[j].abs() < sc.bound).collect();
    let f = free.len();

    let mut reduced = sc.target.clone();
    for j in 0..z.len() {
        if z[j] != 0.0 && z[j].abs() >= sc.bound {
            reduced.axpy(-z[j], &sc.psi.column(j), 1.0);
        }
    }
    let sign = |j: usize| z[j].signum();

    let mut u = z.clone();
    let nu;
    if free.iter().all(|&j| sc.r[j] > 0.0) {
        // u_j = -(c_j s_j + psi_j^T nu) / r_j, leaving an n x n system in nu.
        let mut k = DMatrix::zeros(rows, rows);
        let mut rhs = -reduced;
        for &j in &free {
            let col = sc.psi.column(j);
            k.ger(1.0 / sc.r[j], &col, &col, 1.0);
            rhs.axpy(-sc.c[j] * sign(j) / sc.r[j], &col, 1.0);
        }
        let correction = pseudo_solve(&k.clone().svd(true, true), &(rhs - &k * nu_guess));
        nu = nu_guess + correction;
        for &j in &free {
            u[j] = -(sc.c[j] * sign(j) + sc.psi.column(j).dot(&nu)) / sc.r[j];
        }
    } else {
        if f + rows > MAX_DENSE_POLISH {
            return None;
        }
        let size = f + rows;
        let mut m = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);
        let mut guess = DVector::zeros(size);
        for (a, &j) in free.iter().enumerate() {
            m[(a, a)] = sc.r[j];
            for i in 0..rows {
                m[(a, f + i)] = sc.psi[(i, j)];
                m[(f + i, a)] = sc.psi[(i, j)];
            }
            rhs[a] = -sc.c[j] * sign(j);
            guess[a] = z[j];
        }
        rhs.rows_mut(f, rows).copy_from(&reduced);
        guess.rows_mut(f, rows).copy_from(nu_guess);
        let correction = pseudo_solve(&m.clone().svd(true, true), &(rhs - &m * &guess));
        let sol = guess + correction;
        for (a, &j) in free.iter().enumerate() {
            u[j] = sol[a];
        }
        nu = sol.rows(f, rows).into_owned();
    }

    for &j in &free {
        if u[j] * sign(j) < 0.0 || !u[j].is_finite() || u[j].abs() > sc.bound * (1.0 + 1e-9) {
            return None;
        }
        u[j] = u[j].clamp(-sc.bound, sc.bound);
    }

    let g = sc.psi.tr_mul(&nu);
    Some(Polished {
        dual: sc.stationarity(&u, &g),
        eq: sc.equality_residual(&u),
        u,
        nu,
    })
}

#[allow(clippy::too_many_arguments)]
fn report(
    program: &DiscreteProgram,
    sc: &Scaled,
    u: DVector<f64>,
    nu: &DVector<f64>,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    eq_residual: f64,
    status: SolveStatus,
    polished: bool,
) -> SolveReport {
    let stacked = u.as_slice();
    let control = ControlTrajectory::from_stacked(program.step, program.inputs, stacked)
        .expect("solver iterates are finite and shaped by the program");
    SolveReport {
        j0: program.j0(stacked, DEFAULT_EPSILON),
        j1: program.j1(stacked),
        j2: program.j2(stacked),
        objective: program.objective(stacked),
        control,
        iterations,
        primal_residual,
        dual_residual,
        eq_residual,
        status,
        polished,
        multiplier: sc.unscale_multiplier(nu),
    }
}
