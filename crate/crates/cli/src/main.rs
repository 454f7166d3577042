mod output;
mod problem_file;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use handsoff_core::analysis::{
    costate_consistency, log_spaced, misplaced_fractional_samples, sweep_tradeoff, HandsOffMetrics, DEFAULT_EPSILON,
};
use handsoff_core::plant::simulate;
use handsoff_core::solver::{minimum_time, solve_problem};
use handsoff_core::Objective;

use problem_file::ProblemFile;

const INPUT_ERROR: u8 = 1;
const NOT_SOLVED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "handsoff",
    version,
    about = "Sparse (hands-off) and L1/L2 optimal control of LTI plants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem and write trajectory.csv and report.txt.
    Solve {
        problem: PathBuf,
        /// Override the file's objective (L1, L1L2 or L2).
        #[arg(long)]
        mode: Option<Objective>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Support and quantization threshold.
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
    },
    /// Solve the L1/L2 problem for each r and write tradeoff.csv.
    Sweep {
        problem: PathBuf,
        /// Comma-separated quadratic weights [default: 9 values log-spaced over 1e-3..10].
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        r_list: Option<Vec<f64>>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
    },
    /// Shortest horizon that reaches the origin under |u| <= 1.
    Mintime {
        problem: PathBuf,
        /// Bisection tolerance in seconds.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        /// Hold intervals per second [default: N / T from the file].
        #[arg(long)]
        density: Option<f64>,
    },
    /// Check a stored trajectory against the problem and the L1 optimality structure.
    Verify {
        problem: PathBuf,
        trajectory: PathBuf,
        #[arg(long)]
        mode: Option<Objective>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
    },
}

fn load(path: &Path) -> Result<ProblemFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    problem_file::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn check_eps(eps: f64) -> Result<(), String> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(format!("--eps must lie in (0, 0.5), got {eps}"))
    }
}

fn solve(path: &Path, mode: Option<Objective>, out: &Path, eps: f64) -> Result<u8, String> {
    check_eps(eps)?;
    let mut file = load(path)?;
    if let Some(mode) = mode {
        file.problem.mode = mode;
    }
    let p = &file.problem;
    let report = solve_problem(p, &file.options).map_err(|e| e.to_string())?;
    let states = simulate(&p.plant, &p.x0, &report.control).map_err(|e| e.to_string())?;
    let metrics = HandsOffMetrics::compute(&report.control, eps);
    let terminal = states.terminal().norm();

    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    output::write_trajectory(&out.join("trajectory.csv"), &report.control, &states)?;
    output::write_text(
        &out.join("report.txt"),
        &output::report_text(&report, &metrics, terminal, eps),
    )?;
    eprintln!(
        "{} mode {}: {} after {} iterations, hands-off {:.1} %",
        path.display(),
        p.mode,
        report.status,
        report.iterations,
        100.0 * metrics.handsoff_fraction
    );
    Ok(if report.converged() { 0 } else { NOT_SOLVED })
}

fn sweep(path: &Path, r_list: Option<Vec<f64>>, out: &Path, eps: f64) -> Result<u8, String> {
    check_eps(eps)?;
    let file = load(path)?;
    let rs = r_list.unwrap_or_else(|| log_spaced(1e-3, 10.0, 9));
    let points = sweep_tradeoff(&file.problem, &rs, &file.options, eps).map_err(|e| e.to_string())?;
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    output::write_tradeoff(&out.join("tradeoff.csv"), &points)?;
    for p in &points {
        if let Some(e) = &p.error {
            eprintln!("r = {:e}: {e}", p.r);
        }
    }
    let ok = points.iter().filter(|p| p.converged()).count();
    eprintln!("{ok} of {} sweep points converged", points.len());
    Ok(if ok > 0 { 0 } else { NOT_SOLVED })
}

fn mintime(path: &Path, tol: f64, density: Option<f64>) -> Result<u8, String> {
    let file = load(path)?;
    let p = &file.problem;
    let density = density.unwrap_or(p.intervals as f64 / p.horizon);
    let t = minimum_time(&p.plant, &p.x0, density, tol).map_err(|e| e.to_string())?;
    println!("minimum time: {t:.6} s");
    println!("grid density: {density} intervals/s");
    Ok(0)
}

fn verify(path: &Path, trajectory: &Path, mode: Option<Objective>, eps: f64) -> Result<u8, String> {
    check_eps(eps)?;
    let file = load(path)?;
    let p = &file.problem;
    let mode = mode.unwrap_or(p.mode);
    let (u, stored) = output::read_trajectory(trajectory, p.plant.states(), p.plant.inputs())?;
    if (u.horizon() - p.horizon).abs() > 1e-9 * p.horizon {
        return Err(format!(
            "trajectory spans {} s, problem horizon is {} s",
            u.horizon(),
            p.horizon
        ));
    }

    let mut checks: Vec<(&str, bool, String)> = Vec::new();
    let peak = u.sup_norm();
    checks.push(("input bound", peak <= 1.0 + 1e-9, format!("max |u| = {peak:.6}")));
    let sim = simulate(&p.plant, &p.x0, &u).map_err(|e| e.to_string())?;
    let terminal = sim.terminal().norm();
    let limit = 1e-4 * p.x0.norm();
    checks.push((
        "terminal state",
        terminal <= limit + 1e-12,
        format!("|x(T)| = {terminal:.3e} (limit {limit:.3e})"),
    ));
    let scale = sim.states.amax().max(1.0);
    let drift = (&sim.states - &stored.states).amax() / scale;
    checks.push((
        "stored states",
        drift <= 1e-6,
        format!("relative deviation {drift:.3e}"),
    ));

    if mode == Objective::L1 {
        let metrics = HandsOffMetrics::compute(&u, eps);
        let misplaced = misplaced_fractional_samples(&u, eps);
        checks.push((
            "bang-off-bang",
            metrics.bangoffbang_score >= 0.98 && misplaced.is_empty(),
            format!(
                "score {:.4}, {} fractional samples inside constant arcs",
                metrics.bangoffbang_score,
                misplaced.len()
            ),
        ));
        let costate = costate_consistency(&p.plant, &u, &p.lambda, eps).map_err(|e| e.to_string())?;
        checks.push((
            "costate consistency",
            costate.feasible,
            format!("residual {:.3e}", costate.residual),
        ));
    } else {
        eprintln!("mode {mode}: structure checks apply to L1 solutions only, skipped");
    }

    let mut all = true;
    for (name, pass, detail) in &checks {
        all &= pass;
        eprintln!("{} {name}: {detail}", if *pass { "ok" } else { "FAILED" });
    }
    Ok(if all { 0 } else { NOT_SOLVED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve {
            problem,
            mode,
            out,
            eps,
        } => solve(&problem, mode, &out, eps),
        Command::Sweep {
            problem,
            r_list,
            out,
            eps,
        } => sweep(&problem, r_list, &out, eps),
        Command::Mintime { problem, tol, density } => mintime(&problem, tol, density),
        Command::Verify {
            problem,
            trajectory,
            mode,
            eps,
        } => verify(&problem, &trajectory, mode, eps),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
