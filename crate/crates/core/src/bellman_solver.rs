//! Fixed-point iteration on the linear trace equation
//!
//! ```text
//! tr(B_k D²u_k) = 2√f  in Ω,    u_k = φ  on ∂Ω,
//! ```
//!
//! starting from `B_0 = I` (a Poisson problem). For `k ≥ 1`, `B_k` is the
//! Bellman matrix of the discrete Hessian of `u_{k−1}` wherever that Hessian
//! is positive definite. Remaining points are marked, given the identity,
//! and then repaired by [`interpolate_marked`] when interpolation is on.
//! The loop stops once `‖u_k − u_{k−1}‖∞ < tolerance` or the iteration cap is
//! hit.
//!
//! Iterations are counted as linear solves, with the Poisson start as
//! iteration 1.

use alloc::vec::Vec;

use crate::bellman_core::{bellman_matrix, interpolate_marked, is_positive_definite, BellmanField, SymMatrix2};
use crate::error::{Error, Result};
use crate::fdops::{assemble_trace_system, hessian};
use crate::grid::{GridSpec, ScalarField};
use crate::linsolve::{self, Factorization, LinearSolverKind};
use crate::par;
use crate::problems::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub det_floor: f64,
    pub interpolation_enabled: bool,
    pub linear_solver: LinearSolverKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 10_000,
            det_floor: 1e-10,
            interpolation_enabled: true,
            linear_solver: LinearSolverKind::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        if !(self.det_floor >= 0.0) {
            return Err(Error::InvalidConfig("det_floor must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of an iterative solve. `update_norms[k]` and `marked_counts[k]`
/// belong to iteration `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub solution: ScalarField,
    pub update_norms: Vec<f64>,
    pub marked_counts: Vec<usize>,
    /// Filled in by callers that time the solve; zero otherwise.
    pub wall_time_seconds: f64,
}

/// One accepted iterate, as passed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    /// 1-based iteration number.
    pub index: usize,
    pub field: &'a ScalarField,
    pub update_norm: f64,
    pub marked: usize,
}

/// Right-hand side `2√f` and Dirichlet data of a problem on a grid.
#[derive(Debug, Clone)]
pub(crate) struct Discretized {
    pub(crate) f: ScalarField,
    pub(crate) trace_rhs: ScalarField,
    pub(crate) boundary: ScalarField,
}

impl Discretized {
    pub(crate) fn new(problem: &ProblemSpec, grid: GridSpec) -> Result<Self> {
        let f = problem.sample_rhs(grid)?;
        let mut trace_rhs = f.clone();
        for v in trace_rhs.values_mut() {
            *v = 2.0 * libm::sqrt(*v);
        }
        Ok(Discretized {
            f,
            trace_rhs,
            boundary: problem.sample_boundary(grid)?,
        })
    }
}

/// Solves `tr(B D²u) = rhs` with `u = boundary` on ∂Ω.
pub(crate) fn solve_trace(
    b: &BellmanField,
    rhs: &ScalarField,
    boundary: &ScalarField,
    kind: LinearSolverKind,
) -> Result<ScalarField> {
    let system = assemble_trace_system(b, rhs, boundary)?;
    let x = linsolve::solve_with(&system, kind)?;
    boundary.with_interior(&x)
}

/// Same as [`solve_trace`] but with a prepared factorization of the matrix.
pub(crate) fn solve_trace_factored(
    b: &BellmanField,
    rhs: &ScalarField,
    boundary: &ScalarField,
    factor: &Factorization,
) -> Result<ScalarField> {
    let system = assemble_trace_system(b, rhs, boundary)?;
    let x = linsolve::solve_factored(&system, factor)?;
    boundary.with_interior(&x)
}

/// Warm start: `Δu₀ = 2√f`, `u₀ = φ` on ∂Ω.
pub fn poisson_start(problem: &ProblemSpec, grid: GridSpec) -> Result<ScalarField> {
    let d = Discretized::new(problem, grid)?;
    solve_trace(
        &BellmanField::identity(grid),
        &d.trace_rhs,
        &d.boundary,
        LinearSolverKind::default(),
    )
}

/// Bellman matrices of the discrete Hessian of `u`. Points failing
/// [`is_positive_definite`] with `det_floor` are marked and get the identity.
pub fn bellman_field(u: &ScalarField, det_floor: f64) -> BellmanField {
    let grid = *u.grid();
    let m = grid.interior_n();
    let h = hessian(u);
    let mut slots: Vec<(SymMatrix2, bool)> = alloc::vec![(SymMatrix2::IDENTITY, false); m * m];
    let entries = h.entries();
    par::for_each_row(&mut slots, m, |q, row| {
        for (p, slot) in row.iter_mut().enumerate() {
            let e = &entries[q * m + p];
            *slot = if is_positive_definite(e, det_floor) {
                match bellman_matrix(e) {
                    Ok(b) => (b, false),
                    Err(_) => (SymMatrix2::IDENTITY, true),
                }
            } else {
                (SymMatrix2::IDENTITY, true)
            };
        }
    });
    let (matrices, marked) = slots.into_iter().unzip();
    BellmanField::from_parts(grid, matrices, marked).expect("interior-sized arrays")
}

fn step(u_prev: &ScalarField, d: &Discretized, config: &SolverConfig) -> Result<(ScalarField, usize)> {
    let mut b = bellman_field(u_prev, config.det_floor);
    let marked = b.marked_count();
    if config.interpolation_enabled && marked > 0 {
        b = interpolate_marked(&b);
    }
    let u = solve_trace(&b, &d.trace_rhs, &d.boundary, config.linear_solver)?;
    Ok((u, marked))
}

/// One Bellman update from `u_prev`. Returns the new iterate and the number
/// of marked points before the interpolation repair.
pub fn bellman_step(
    u_prev: &ScalarField,
    problem: &ProblemSpec,
    config: &SolverConfig,
) -> Result<(ScalarField, usize)> {
    config.validate()?;
    let d = Discretized::new(problem, *u_prev.grid())?;
    step(u_prev, &d, config)
}

pub fn bellman_solve(problem: &ProblemSpec, grid: GridSpec, config: &SolverConfig) -> Result<SolveReport> {
    bellman_solve_observed(problem, grid, config, |_| {})
}

/// [`bellman_solve`] that hands every iterate (including the Poisson start)
/// to `observer`.
pub fn bellman_solve_observed<F>(
    problem: &ProblemSpec,
    grid: GridSpec,
    config: &SolverConfig,
    mut observer: F,
) -> Result<SolveReport>
where
    F: FnMut(Iterate<'_>),
{
    config.validate()?;
    let d = Discretized::new(problem, grid)?;
    let mut u = solve_trace(
        &BellmanField::identity(grid),
        &d.trace_rhs,
        &d.boundary,
        config.linear_solver,
    )?;
    let mut update_norms = alloc::vec![u.sup_distance(&d.boundary)?];
    let mut marked_counts = alloc::vec![0];
    observer(Iterate {
        index: 1,
        field: &u,
        update_norm: update_norms[0],
        marked: 0,
    });

    let mut converged = false;
    while update_norms.len() < config.max_iterations {
        let (next, marked) = step(&u, &d, config)?;
        let norm = next.sup_distance(&u)?;
        u = next;
        update_norms.push(norm);
        marked_counts.push(marked);
        observer(Iterate {
            index: update_norms.len(),
            field: &u,
            update_norm: norm,
            marked,
        });
        if norm < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        converged,
        iterations: update_norms.len(),
        solution: u,
        update_norms,
        marked_counts,
        wall_time_seconds: 0.0,
    })
}
