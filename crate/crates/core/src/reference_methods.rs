//! The two comparison schemes.
//!
//! **M2** solves a sequence of Poisson problems `Δu_k = g_k`, `u_k = φ` on
//! ∂Ω, with `g_0 = 2√f` and
//! `g_{k+1} = √((Δu_k)² + 2(f − det D²u_k))`.
//!
//! **M1** writes the central-difference equation
//! `D²xx u · D²yy u − (D²xy u)² = f` at a node as a quadratic in `u_ij`,
//!
//! ```text
//! 4(a1 − u)(a2 − u) − ¼(a3 − a4)² = h⁴ f,
//! a1 = ½(u[i+1,j] + u[i−1,j]),      a2 = ½(u[i,j+1] + u[i,j−1]),
//! a3 = ½(u[i+1,j+1] + u[i−1,j−1]),  a4 = ½(u[i−1,j+1] + u[i+1,j−1]),
//! ```
//!
//! and sweeps Gauss–Seidel over the interior, replacing `u_ij` by a root.
//! The smaller root keeps `u_ij ≤ min(a1, a2)`, i.e. non-negative axial
//! second differences; the larger one is available for comparison.

use alloc::vec;

use crate::bellman_core::BellmanField;
use crate::bellman_solver::{solve_trace, solve_trace_factored, Discretized, SolveReport};
use crate::error::{Error, Result};
use crate::fdops::{assemble_trace_system, laplacian, ma_determinant};
use crate::grid::{GridSpec, ScalarField};
use crate::linsolve::{Factorization, LinearSolverKind};
use crate::metrics::count_convexity_failures;
use crate::problems::ProblemSpec;

/// Floor used when counting non-convex points of reference-method iterates.
pub const DIAGNOSTIC_DET_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootSelection {
    /// `½(a1 + a2 − s)`.
    #[default]
    Smaller,
    /// `½(a1 + a2 + s)`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M1Config {
    pub tolerance: f64,
    /// Cap on full sweeps.
    pub max_iterations: usize,
    pub root_selection: RootSelection,
}

impl Default for M1Config {
    fn default() -> Self {
        M1Config {
            tolerance: 1e-12,
            max_iterations: 300_000,
            root_selection: RootSelection::Smaller,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M2Config {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Clamp negative radicands to zero instead of failing.
    pub radicand_clamp: bool,
    pub linear_solver: LinearSolverKind,
    /// Factorize the Poisson matrix once and reuse it. Off by default so
    /// that every iteration does the same work as a Bellman iteration.
    pub reuse_factorization: bool,
}

impl Default for M2Config {
    fn default() -> Self {
        M2Config {
            tolerance: 1e-12,
            max_iterations: 10_000,
            radicand_clamp: true,
            linear_solver: LinearSolverKind::default(),
            reuse_factorization: false,
        }
    }
}

fn validate(tolerance: f64, max_iterations: usize) -> Result<()> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive"));
    }
    if max_iterations == 0 {
        return Err(Error::InvalidConfig("max_iterations must be at least 1"));
    }
    Ok(())
}

/// `g = √((Δu)² + 2(f − det D²u))` at interior nodes; boundary entries are
/// zero.
pub fn m2_update_rhs(u: &ScalarField, f: &ScalarField, clamp: bool) -> Result<ScalarField> {
    if !u.same_grid(f) {
        return Err(Error::GridMismatch);
    }
    let grid = *u.grid();
    let lap = laplacian(u);
    let det = ma_determinant(u);
    let mut g = ScalarField::zeros(grid);
    for (i, j) in grid.interior_points() {
        let l = lap.at(i, j);
        let mut r = l * l + 2.0 * (f.at(i, j) - det.at(i, j));
        if r < 0.0 {
            if !clamp {
                return Err(Error::NegativeRadicand { i, j, value: r });
            }
            r = 0.0;
        }
        g.set(i, j, libm::sqrt(r))?;
    }
    Ok(g)
}

pub fn m2_solve(problem: &ProblemSpec, grid: GridSpec, config: &M2Config) -> Result<SolveReport> {
    validate(config.tolerance, config.max_iterations)?;
    let d = Discretized::new(problem, grid)?;
    let identity = BellmanField::identity(grid);
    let factor = if config.reuse_factorization {
        let system = assemble_trace_system(&identity, &d.trace_rhs, &d.boundary)?;
        Some(Factorization::new(&system, config.linear_solver)?)
    } else {
        None
    };
    let poisson = |g: &ScalarField| match &factor {
        Some(fac) => solve_trace_factored(&identity, g, &d.boundary, fac),
        None => solve_trace(&identity, g, &d.boundary, config.linear_solver),
    };

    let mut prev = d.boundary.clone();
    let mut g = d.trace_rhs.clone();
    let mut update_norms = vec![];
    let mut marked_counts = vec![];
    let mut converged = false;
    loop {
        let u = poisson(&g)?;
        let norm = u.sup_distance(&prev)?;
        update_norms.push(norm);
        marked_counts.push(count_convexity_failures(&u, DIAGNOSTIC_DET_FLOOR));
        prev = u;
        if norm < config.tolerance {
            converged = true;
            break;
        }
        if update_norms.len() >= config.max_iterations {
            break;
        }
        g = m2_update_rhs(&prev, &d.f, config.radicand_clamp)?;
    }
    Ok(SolveReport {
        converged,
        iterations: update_norms.len(),
        solution: prev,
        update_norms,
        marked_counts,
        wall_time_seconds: 0.0,
    })
}

/// Root of the pointwise M1 quadratic.
#[inline]
pub fn m1_update(a1: f64, a2: f64, a3: f64, a4: f64, h: f64, f_val: f64, root: RootSelection) -> f64 {
    let h2 = h * h;
    let d12 = a1 - a2;
    let d34 = a3 - a4;
    let s = libm::sqrt(d12 * d12 + 0.25 * d34 * d34 + h2 * h2 * f_val);
    match root {
        RootSelection::Smaller => 0.5 * (a1 + a2 - s),
        RootSelection::AsPrinted => 0.5 * (a1 + a2 + s),
    }
}

/// Gauss–Seidel on the M1 quadratic, starting from the Poisson warm start.
/// One iteration is one lexicographic sweep (`i` fastest) over the interior;
/// the warm start is not counted.
pub fn m1_solve(problem: &ProblemSpec, grid: GridSpec, config: &M1Config) -> Result<SolveReport> {
    validate(config.tolerance, config.max_iterations)?;
    let h = grid
        .uniform_spacing()
        .ok_or(Error::InvalidArguments("M1 needs equal spacing in x and y"))?;
    let d = Discretized::new(problem, grid)?;
    let mut u = solve_trace(
        &BellmanField::identity(grid),
        &d.trace_rhs,
        &d.boundary,
        LinearSolverKind::default(),
    )?;
    let n = grid.n();
    let f = d.f.values();
    let root = config.root_selection;

    let mut update_norms = vec![];
    let mut marked_counts = vec![];
    let mut converged = false;
    while update_norms.len() < config.max_iterations {
        let v = u.values_mut();
        let mut change = 0.0_f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                let a1 = 0.5 * (v[k + 1] + v[k - 1]);
                let a2 = 0.5 * (v[k + n] + v[k - n]);
                let a3 = 0.5 * (v[k + n + 1] + v[k - n - 1]);
                let a4 = 0.5 * (v[k + n - 1] + v[k - n + 1]);
                let new = m1_update(a1, a2, a3, a4, h, f[k], root);
                change = change.max((new - v[k]).abs());
                v[k] = new;
            }
        }
        if !change.is_finite() {
            return Err(Error::NonFiniteValue { i: 0, j: 0 });
        }
        update_norms.push(change);
        marked_counts.push(count_convexity_failures(&u, DIAGNOSTIC_DET_FLOOR));
        if change < config.tolerance {
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
