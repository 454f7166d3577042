use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use handsoff_core::analysis::{HandsOffMetrics, TradeoffPoint};
use handsoff_core::{ControlTrajectory, SolveReport, StateTrajectory};
use nalgebra::DMatrix;

pub type IoResult<T> = Result<T, String>;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t, u_1..u_m, x_1..x_n` with one row per grid point; the control cells of
/// the last row are empty since the held input ends there.
pub fn write_trajectory(path: &Path, u: &ControlTrajectory, x: &StateTrajectory) -> IoResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m = u.inputs();
    let n = x.states.nrows();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.extend((1..=n).map(|i| format!("x_{i}")));
    w.write_record(&header).map_err(|e| e.to_string())?;
    for k in 0..=u.len() {
        let mut row = vec![num(u.time(k))];
        if k < u.len() {
            row.extend(u.values().column(k).iter().map(|&v| num(v)));
        } else {
            row.extend(std::iter::repeat_n(String::new(), m));
        }
        row.extend(x.states.column(k).iter().map(|&v| num(v)));
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Read a file written by [`write_trajectory`] for a plant with `n` states
/// and `m` inputs.
pub fn read_trajectory(path: &Path, n: usize, m: usize) -> IoResult<(ControlTrajectory, StateTrajectory)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let width = r.headers().map_err(|e| e.to_string())?.len();
    if width != 1 + m + n {
        return Err(format!(
            "{}: {width} columns, expected {} (t, {m} controls, {n} states)",
            path.display(),
            1 + m + n
        ));
    }
    let mut times = Vec::new();
    let mut controls: Vec<f64> = Vec::new();
    let mut states: Vec<f64> = Vec::new();
    let mut blank_row = None;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| format!("line {line}: {e}"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("line {line}: `{s}` is not a finite number"))
        };
        if blank_row.is_some() {
            return Err(format!("line {line}: rows after the final (blank-control) row"));
        }
        times.push(parse(&rec[0])?);
        let u_cells: Vec<&str> = (1..=m).map(|j| &rec[j]).collect();
        if u_cells.iter().all(|c| c.trim().is_empty()) {
            blank_row = Some(line);
        } else {
            for c in u_cells {
                controls.push(parse(c)?);
            }
        }
        for j in 0..n {
            states.push(parse(&rec[1 + m + j])?);
        }
    }
    if blank_row.is_none() {
        return Err(format!("{}: missing final row with blank controls", path.display()));
    }
    let intervals = times.len() - 1;
    if intervals == 0 {
        return Err(format!("{}: trajectory has no intervals", path.display()));
    }
    let step = (times[intervals] - times[0]) / intervals as f64;
    let u = ControlTrajectory::from_stacked(step, m, &controls).map_err(|e| e.to_string())?;
    let x = StateTrajectory {
        step,
        states: DMatrix::from_column_slice(n, intervals + 1, &states),
    };
    Ok((u, x))
}

fn list(v: &[f64]) -> String {
    v.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(", ")
}

pub fn report_text(report: &SolveReport, metrics: &HandsOffMetrics, terminal_norm: f64, epsilon: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status: {}", report.status);
    let _ = writeln!(s, "iterations: {}", report.iterations);
    let _ = writeln!(s, "polished: {}", report.polished);
    let _ = writeln!(s, "J0 (eps = {epsilon:e}): {:.6}", report.j0);
    let _ = writeln!(s, "J1: {:.6}", report.j1);
    let _ = writeln!(s, "J2: {:.6}", report.j2);
    let _ = writeln!(s, "objective: {:.6}", report.objective);
    let _ = writeln!(s, "l0 [s]: {:.4}", metrics.l0_seconds);
    if metrics.l0_per_channel.len() > 1 {
        let _ = writeln!(s, "l0 per input [s]: {}", list(&metrics.l0_per_channel));
    }
    let _ = writeln!(s, "hands-off: {:.1} %", 100.0 * metrics.handsoff_fraction);
    match metrics.last_switch() {
        Some(t) => {
            let _ = writeln!(s, "last switching time [s]: {t:.4}");
        }
        None => {
            let _ = writeln!(s, "last switching time [s]: none");
        }
    }
    let _ = writeln!(s, "switching times [s]: {}", list(&metrics.switching_times));
    let _ = writeln!(s, "bang-off-bang score: {:.4}", metrics.bangoffbang_score);
    let _ = writeln!(
        s,
        "derivative sup-norm (forward difference): {:.6}",
        metrics.derivative_supnorm
    );
    let _ = writeln!(s, "max jump: {:.6}", metrics.max_jump);
    let _ = writeln!(s, "primal residual: {:.3e}", report.primal_residual);
    let _ = writeln!(s, "dual residual: {:.3e}", report.dual_residual);
    let _ = writeln!(s, "terminal constraint residual: {:.3e}", report.eq_residual);
    let _ = writeln!(s, "terminal state norm: {terminal_norm:.3e}");
    s
}

pub fn write_tradeoff(path: &Path, points: &[TradeoffPoint]) -> IoResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    w.write_record(["r", "l0_seconds", "derivative_supnorm", "status"])
        .map_err(|e| e.to_string())?;
    for p in points {
        let row = if p.status.is_some() {
            [
                num(p.r),
                num(p.l0_seconds),
                num(p.derivative_supnorm),
                p.status_str().to_string(),
            ]
        } else {
            [num(p.r), String::new(), String::new(), p.status_str().to_string()]
        };
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn write_text(path: &Path, text: &str) -> IoResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}
