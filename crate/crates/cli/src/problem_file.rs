//! `key = value` problem files.
//!
//! ```text
//! # fourth-order example
//! A = 0 -1 0 0; 1 0 0 0; 0 1 0 0; 0 0 1 0
//! B = 2; 0; 0; 0
//! x0 = 1, 1, 1, 1
//! T = 10
//! N = 1000
//! mode = L1
//! ```
//!
//! Vectors are comma- or space-separated; matrix rows are separated by `;`.
//! `lambda` and `r` accept a single value for every input. Solver keys
//! (`rho`, `tol_primal`, `tol_dual`, `tol_eq`, `max_iter`) override the
//! defaults.

use std::collections::HashMap;
use std::fmt;

use handsoff_core::{ControlProblem, LtiPlant, Objective, SolveOptions};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn at(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line: Some(line),
        message: message.into(),
    }
}

const KEYS: &[&str] = &[
    "n",
    "m",
    "A",
    "B",
    "x0",
    "T",
    "N",
    "lambda",
    "r",
    "mode",
    "rho",
    "tol_primal",
    "tol_dual",
    "tol_eq",
    "max_iter",
];

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: ControlProblem,
    pub options: SolveOptions,
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>, ParseError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| at(line, format!("`{t}` is not a finite number")))
        })
        .collect()
}

fn matrix(line: usize, text: &str) -> Result<DMatrix<f64>, ParseError> {
    let rows = text
        .split(';')
        .map(|row| numbers(line, row))
        .collect::<Result<Vec<_>, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(at(line, "matrix rows must be nonempty and of equal length"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn scalar(line: usize, text: &str) -> Result<f64, ParseError> {
    match numbers(line, text)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(at(line, format!("expected one number, got `{text}`"))),
    }
}

fn count(line: usize, text: &str) -> Result<usize, ParseError> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| at(line, format!("`{}` is not a nonnegative integer", text.trim())))
}

fn weights(line: usize, text: &str, inputs: usize, key: &str) -> Result<Vec<f64>, ParseError> {
    let w = numbers(line, text)?;
    match w.len() {
        1 => Ok(vec![w[0]; inputs]),
        k if k == inputs => Ok(w),
        k => Err(at(line, format!("{key} has {k} entries, plant has {inputs} inputs"))),
    }
}

pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(at(line, format!("unknown key `{key}`")));
        }
        if let Some((first, _)) = entries.insert(key, (line, value.trim())) {
            return Err(at(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
    }
    let get = |key: &str| entries.get(key).copied();
    let require = |key: &str| {
        get(key).ok_or_else(|| ParseError {
            line: None,
            message: format!("missing required key `{key}`"),
        })
    };

    let (la, a_text) = require("A")?;
    let a = matrix(la, a_text)?;
    let (lb, b_text) = require("B")?;
    let b = matrix(lb, b_text)?;
    if let Some((l, v)) = get("n") {
        let n = count(l, v)?;
        if n != a.nrows() || !a.is_square() {
            return Err(at(la, format!("A is {}x{}, expected {n}x{n}", a.nrows(), a.ncols())));
        }
    }
    if let Some((l, v)) = get("m") {
        let m = count(l, v)?;
        if m != b.ncols() {
            return Err(at(lb, format!("B has {} columns, expected {m}", b.ncols())));
        }
    }
    let plant = LtiPlant::new(a, b).map_err(|e| at(lb, e.to_string()))?;
    let (n, m) = (plant.states(), plant.inputs());

    let (lx, x_text) = require("x0")?;
    let x0 = numbers(lx, x_text)?;
    if x0.len() != n {
        return Err(at(lx, format!("x0 has {} entries, plant has {n} states", x0.len())));
    }
    let (lt, t_text) = require("T")?;
    let horizon = scalar(lt, t_text)?;
    if horizon <= 0.0 {
        return Err(at(lt, format!("T must be > 0, got {horizon}")));
    }
    let (ln, n_text) = require("N")?;
    let intervals = count(ln, n_text)?;
    if intervals == 0 {
        return Err(at(ln, "N must be at least 1"));
    }
    let lambda = match get("lambda") {
        Some((l, v)) => weights(l, v, m, "lambda")?,
        None => vec![1.0; m],
    };
    let r = match get("r") {
        Some((l, v)) => weights(l, v, m, "r")?,
        None => vec![1.0; m],
    };
    let mode = match get("mode") {
        Some((l, v)) => v.parse::<Objective>().map_err(|e| at(l, e.to_string()))?,
        None => Objective::L1,
    };

    let mut options = SolveOptions::default();
    for (key, slot) in [
        ("rho", &mut options.rho),
        ("tol_primal", &mut options.tol_primal),
        ("tol_dual", &mut options.tol_dual),
        ("tol_eq", &mut options.tol_eq),
    ] {
        if let Some((l, v)) = get(key) {
            *slot = scalar(l, v)?;
            if *slot <= 0.0 {
                return Err(at(l, format!("{key} must be > 0")));
            }
        }
    }
    if let Some((l, v)) = get("max_iter") {
        options.max_iter = count(l, v)?;
        if options.max_iter == 0 {
            return Err(at(l, "max_iter must be at least 1"));
        }
    }

    let problem = ControlProblem {
        plant,
        x0: DVector::from_vec(x0),
        horizon,
        intervals,
        lambda,
        r,
        mode,
    };
    problem.validate().map_err(|e| ParseError {
        line: None,
        message: e.to_string(),
    })?;
    Ok(ProblemFile { problem, options })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOURTH_ORDER: &str = "\
# fourth-order plant
n = 4
m = 1
A = 0 -1 0 0; 1 0 0 0; 0 1 0 0; 0 0 1 0
B = 2; 0; 0; 0
x0 = 1, 1, 1, 1
T = 10
N = 1000
lambda = 1
r = 1
mode = L1
";

    #[test]
    fn parses_reference_problem() {
        let f = parse(FOURTH_ORDER).unwrap();
        let p = &f.problem;
        assert_eq!(p.plant.states(), 4);
        assert_eq!(p.plant.a()[(0, 1)], -1.0);
        assert_eq!(p.plant.b()[(0, 0)], 2.0);
        assert_eq!(p.intervals, 1000);
        assert_eq!(p.mode, Objective::L1);
        assert_eq!(f.options, SolveOptions::default());
    }

    #[test]
    fn defaults_and_overrides() {
        let f =
            parse("A = 0 1; 0 0\nB = 0; 1\nx0 = 1 0\nT = 4\nN = 40\nmode = l1/l2\nrho = 2\nmax_iter = 7\n").unwrap();
        assert_eq!(f.problem.lambda, vec![1.0]);
        assert_eq!(f.problem.r, vec![1.0]);
        assert_eq!(f.problem.mode, Objective::L1L2);
        assert_eq!(f.options.rho, 2.0);
        assert_eq!(f.options.max_iter, 7);
    }

    #[test]
    fn errors_point_at_lines() {
        let e = parse("A = 0 1; 0 0\nB = 0; 1\nfoo = 3\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse("A = 0 1; 0 0\nA = 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse("A = 0 1; 0\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse("A = 0 1; 0 0\nB = 0; 1\nx0 = 1 0 0\nT = 1\nN = 4\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse("A = 0 1; 0 0\nB = 0; 1\nx0 = 1 0\nT = 1\n").unwrap_err();
        assert_eq!(e.line, None);
        assert!(e.message.contains("`N`"));
        assert!(parse("A = 0 1; 0 0\nB = 0; 1\nx0 = 1 0\nT = 1\nN = 4\nmode = L3\n").is_err());
        assert!(parse("A = 0 1; 0 0\nB = 0; 1\nx0 = 1 nan\nT = 1\nN = 4\n").is_err());
    }
}
