//! Finite-difference solvers for the Dirichlet problem of the two-dimensional
//! real Monge–Ampère equation
//!
//! ```text
//! det D²u = f   in Ω,      u = φ   on ∂Ω,
//! ```
//!
//! on a uniform node-centred grid over a rectangle.
//!
//! The main solver ([`bellman_solver`]) writes the Monge–Ampère operator as the
//! infimum of the linear operators `tr(B D²u)` over symmetric positive definite
//! `B` with `det B = 1`, and iterates: build the minimising `B` from the
//! Hessian of the current iterate, then solve the linear trace equation
//! `tr(B D²u) = 2√f`. Two classical reference schemes live in
//! [`reference_methods`]: a Poisson fixed point with an updated right-hand
//! side (M2) and a pointwise Gauss–Seidel iteration on the discretised
//! quadratic (M1).
//!
//! The crate is `no_std` and only needs `alloc`. Timing, IO and the command
//! line front end live in the companion `masolve` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(a > b)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bellman_core;
pub mod bellman_solver;
pub mod error;
pub mod fdops;
pub mod grid;
pub mod linsolve;
pub mod metrics;
pub mod problems;
pub mod reference_methods;

mod par;

pub use bellman_core::{BellmanField, SymMatrix2};
pub use bellman_solver::{bellman_solve, SolveReport, SolverConfig};
pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField};
pub use problems::ProblemSpec;
