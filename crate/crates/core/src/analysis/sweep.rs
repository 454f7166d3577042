use rayon::prelude::*;

use super::metrics::{bangoffbang_score, derivative_supnorm, l0_measure};
use crate::error::{invalid, Result};
use crate::problem::{ControlProblem, Objective};
use crate::solver::{solve_problem, SolveOptions, SolveStatus};

/// One point of the sparsity/smoothness tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub r: f64,
    pub l0_seconds: f64,
    pub derivative_supnorm: f64,
    pub bangoffbang_score: f64,
    /// `None` when the solve for this weight returned an error.
    pub status: Option<SolveStatus>,
    pub error: Option<String>,
}

impl TradeoffPoint {
    pub fn status_str(&self) -> &str {
        self.status.map_or("error", SolveStatus::as_str)
    }

    pub fn converged(&self) -> bool {
        self.status == Some(SolveStatus::Converged)
    }
}

/// Solve the mixed L1/L2 problem once per quadratic weight, keeping the L1
/// weights of `problem` fixed. Points are independent and solved in
/// parallel; the result is sorted by `r`.
pub fn sweep_tradeoff(
    problem: &ControlProblem,
    r_values: &[f64],
    options: &SolveOptions,
    epsilon: f64,
) -> Result<Vec<TradeoffPoint>> {
    if r_values.is_empty() {
        return Err(invalid("sweep needs at least one weight"));
    }
    if let Some(r) = r_values.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(invalid(format!("sweep weights must be > 0, got {r}")));
    }
    problem.with_mode(Objective::L1).validate()?;
    options.validate()?;

    let mut points: Vec<TradeoffPoint> = r_values
        .par_iter()
        .map(|&r| {
            let mut p = problem.with_mode(Objective::L1L2);
            p.r = vec![r; p.plant.inputs()];
            match solve_problem(&p, options) {
                Ok(report) => TradeoffPoint {
                    r,
                    l0_seconds: l0_measure(&report.control, epsilon),
                    derivative_supnorm: derivative_supnorm(&report.control),
                    bangoffbang_score: bangoffbang_score(&report.control, epsilon),
                    status: Some(report.status),
                    error: None,
                },
                Err(e) => TradeoffPoint {
                    r,
                    l0_seconds: 0.0,
                    derivative_supnorm: 0.0,
                    bangoffbang_score: 0.0,
                    status: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    points.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(points)
}

/// `count` weights log-spaced between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}
