use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use masolve_core::bellman_solver::{bellman_solve, SolveReport, SolverConfig};
use masolve_core::metrics::{error_summary, order_fit};
use masolve_core::problems::{catalog, ProblemSpec};
use masolve_core::reference_methods::{m1_solve, m2_solve, M1Config, M2Config, RootSelection};
use masolve_core::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::output;

/// Largest M1 size run in a study unless explicitly lifted.
pub const DEFAULT_M1_MAX_N: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bellman,
    M1,
    M2,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bellman => "bellman",
            Method::M1 => "m1",
            Method::M2 => "m2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bellman" => Ok(Method::Bellman),
            "m1" => Ok(Method::M1),
            "m2" => Ok(Method::M2),
            other => Err(HarnessError::Config(format!(
                "unknown method `{other}` (expected bellman, m1 or m2)"
            ))),
        }
    }
}

/// Solver settings that differ from each method's defaults. `None` keeps the
/// method default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub det_floor: Option<f64>,
    pub interpolation: Option<bool>,
    pub m1_root: Option<RootSelection>,
    pub m2_clamp: Option<bool>,
}

impl Overrides {
    pub fn bellman(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            det_floor: self.det_floor.unwrap_or(d.det_floor),
            interpolation_enabled: self.interpolation.unwrap_or(d.interpolation_enabled),
            ..d
        }
    }

    pub fn m1(&self) -> M1Config {
        let d = M1Config::default();
        M1Config {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            root_selection: self.m1_root.unwrap_or(d.root_selection),
        }
    }

    pub fn m2(&self) -> M2Config {
        let d = M2Config::default();
        M2Config {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            radicand_clamp: self.m2_clamp.unwrap_or(d.radicand_clamp),
            ..d
        }
    }
}

/// One row of a study table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub problem: String,
    pub method: Method,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_seconds: f64,
    pub sup_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub l2_error_raw: Option<f64>,
    pub marked_final: Option<usize>,
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub record: StudyRecord,
    pub report: SolveReport,
    pub grid: GridSpec,
}

fn dispatch(problem: &ProblemSpec, method: Method, grid: GridSpec, o: &Overrides) -> Result<SolveReport> {
    Ok(match method {
        Method::Bellman => bellman_solve(problem, grid, &o.bellman())?,
        Method::M1 => m1_solve(problem, grid, &o.m1())?,
        Method::M2 => m2_solve(problem, grid, &o.m2())?,
    })
}

/// Runs one solve on an `n × n` grid over the problem's domain. Only the
/// solver call is timed; non-convergence is recorded, not raised.
pub fn run_solve(problem: &ProblemSpec, method: Method, n: usize, overrides: &Overrides) -> Result<SolveOutcome> {
    run_solve_repeated(problem, method, n, overrides, 1)
}

/// Like [`run_solve`] but repeats the solve and keeps the fastest time.
pub fn run_solve_repeated(
    problem: &ProblemSpec,
    method: Method,
    n: usize,
    overrides: &Overrides,
    repetitions: usize,
) -> Result<SolveOutcome> {
    let grid = problem.grid(n)?;
    let mut best: Option<SolveReport> = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let mut report = dispatch(problem, method, grid, overrides)?;
        report.wall_time_seconds = start.elapsed().as_secs_f64();
        if best.as_ref().is_none_or(|b| report.wall_time_seconds < b.wall_time_seconds) {
            best = Some(report);
        }
    }
    let report = best.expect("at least one repetition");

    let errors = if problem.has_exact() {
        Some(error_summary(&report.solution, &problem.sample_exact(grid)?)?)
    } else {
        None
    };
    let record = StudyRecord {
        problem: problem.name().to_owned(),
        method,
        n,
        iterations: report.iterations,
        converged: report.converged,
        wall_time_seconds: report.wall_time_seconds,
        sup_error: errors.map(|e| e.sup_error),
        l2_error: errors.map(|e| e.l2_error),
        l2_error_raw: errors.map(|e| e.l2_error_raw),
        marked_final: report.marked_counts.last().copied(),
        min_value: report.solution.min_value(),
    };
    Ok(SolveOutcome { record, report, grid })
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: String,
    pub params: Vec<(String, f64)>,
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    pub overrides: Overrides,
    /// M1 runs above this size are skipped; `None` lifts the cap.
    pub m1_max_n: Option<usize>,
    pub timing_repetitions: usize,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(problem: &str, methods: Vec<Method>, sizes: Vec<usize>) -> Self {
        StudyConfig {
            problem: problem.to_owned(),
            params: Vec::new(),
            methods,
            sizes,
            overrides: Overrides::default(),
            m1_max_n: Some(DEFAULT_M1_MAX_N),
            timing_repetitions: 1,
            csv_path: None,
            json_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(HarnessError::Config("no methods given".into()));
        }
        if self.sizes.is_empty() {
            return Err(HarnessError::Config("no sizes given".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 3) {
            return Err(HarnessError::Config(format!("size {n} is below the minimum of 3")));
        }
        if self.timing_repetitions == 0 {
            return Err(HarnessError::Config("timing_repetitions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(catalog(&self.problem, &params)?)
    }
}

/// Runs methods × sizes sequentially, method-major. Output files are
/// written after the run, or with the partial results if a solve fails.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRecord>> {
    config.validate()?;
    let problem = config.problem_spec()?;
    let mut records = Vec::new();
    let mut failure = None;
    'outer: for &method in &config.methods {
        for &n in &config.sizes {
            if method == Method::M1 && config.m1_max_n.is_some_and(|cap| n > cap) {
                warn!("skipping m1 at n = {n}: above the study cap; lift it to run");
                continue;
            }
            match run_solve_repeated(&problem, method, n, &config.overrides, config.timing_repetitions) {
                Ok(out) => records.push(out.record),
                Err(e) => {
                    failure = Some(e);
                    break 'outer;
                }
            }
        }
    }
    if let Some(path) = &config.csv_path {
        output::write_csv_file(path, &records)?;
    }
    if let Some(path) = &config.json_path {
        output::write_json_file(path, &records)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(records),
    }
}

/// Fitted slope of one quantity against `n` for a `(problem, method)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitLine {
    pub problem: String,
    pub method: Method,
    pub quantity: String,
    pub sizes: Vec<usize>,
    pub slope: f64,
}

/// Slopes of `sup_error`, `l2_error` and `wall_time_seconds` against `n` per
/// `(problem, method)` group, in order of first appearance. Groups or
/// quantities without at least two positive values are skipped with a warning.
pub fn fit_report(records: &[StudyRecord]) -> Vec<FitLine> {
    let mut groups: Vec<(&str, Method)> = Vec::new();
    for r in records {
        if !groups.contains(&(r.problem.as_str(), r.method)) {
            groups.push((r.problem.as_str(), r.method));
        }
    }
    type Getter = fn(&StudyRecord) -> Option<f64>;
    let quantities: [(&str, Getter); 3] = [
        ("sup_error", |r| r.sup_error),
        ("l2_error", |r| r.l2_error),
        ("wall_time_seconds", |r| Some(r.wall_time_seconds)),
    ];
    let mut lines = Vec::new();
    for (problem, method) in groups {
        let rows: Vec<&StudyRecord> = records
            .iter()
            .filter(|r| r.problem == problem && r.method == method)
            .collect();
        for (name, get) in quantities {
            let (ns, vals): (Vec<usize>, Vec<f64>) =
                rows.iter().filter_map(|r| get(r).map(|v| (r.n, v))).unzip();
            if ns.is_empty() {
                continue;
            }
            match order_fit(&ns, &vals) {
                Ok(slope) => lines.push(FitLine {
                    problem: problem.to_owned(),
                    method,
                    quantity: name.to_owned(),
                    sizes: ns,
                    slope,
                }),
                Err(e) => warn!("no {name} fit for {problem}/{method}: {e}"),
            }
        }
    }
    lines
}
