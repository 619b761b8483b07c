//! Direct solvers for the interior systems assembled by [`crate::fdops`].
//!
//! Two factorizations are available:
//!
//! * [`LinearSolverKind::NestedDissection`] (default for grid systems): a
//!   multifrontal LU over a geometric nested-dissection ordering of the
//!   interior nodes. For an `N × N` grid it costs `O(N³)` flops.
//! * [`LinearSolverKind::Banded`]: LU with partial pivoting inside the band
//!   of the lexicographic ordering, `O(N⁴)` flops. Works for any system and
//!   is the fallback when no grid layout is attached.
//!
//! Both pivot by rows and reject pivots below `1e−14 · max |Aᵢⱼ|`.

mod banded;
mod nested;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdops::LinearSystem;

pub use banded::BandedLu;
pub use nested::MultifrontalLu;

/// Relative residual every successful [`solve`] guarantees.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Pivot threshold relative to the largest matrix entry.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolverKind {
    #[default]
    NestedDissection,
    Banded,
}

#[derive(Debug, Clone)]
enum Inner {
    Nested(MultifrontalLu),
    Banded(BandedLu),
}

/// A factorized matrix that can be reused for several right-hand sides.
#[derive(Debug, Clone)]
pub struct Factorization {
    inner: Inner,
}

impl Factorization {
    /// Factorizes the matrix of `system` (its right-hand side is ignored).
    /// Nested dissection silently falls back to the banded LU for systems
    /// without a grid layout.
    pub fn new(system: &LinearSystem, kind: LinearSolverKind) -> Result<Self> {
        let inner = match (kind, system.layout()) {
            (LinearSolverKind::NestedDissection, Some(_)) if nested::fits(system) => {
                Inner::Nested(MultifrontalLu::factorize(system)?)
            }
            _ => Inner::Banded(BandedLu::factorize(system)?),
        };
        Ok(Factorization { inner })
    }

    pub fn kind(&self) -> LinearSolverKind {
        match self.inner {
            Inner::Nested(_) => LinearSolverKind::NestedDissection,
            Inner::Banded(_) => LinearSolverKind::Banded,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.inner {
            Inner::Nested(f) => f.dimension(),
            Inner::Banded(f) => f.dimension(),
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: rhs.len(),
            });
        }
        let x = match &self.inner {
            Inner::Nested(f) => f.solve(rhs),
            Inner::Banded(f) => f.solve(rhs),
        };
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                index: k,
                pivot: f64::NAN,
            });
        }
        Ok(x)
    }
}

/// Solves with the default factorization and verifies
/// `‖Ax − b‖∞ / max(1, ‖b‖∞) ≤ 1e−10`.
pub fn solve(system: &LinearSystem) -> Result<Vec<f64>> {
    solve_with(system, LinearSolverKind::default())
}

pub fn solve_with(system: &LinearSystem, kind: LinearSolverKind) -> Result<Vec<f64>> {
    let factor = Factorization::new(system, kind)?;
    solve_factored(system, &factor)
}

/// Solves `system` with a factorization of the same matrix and checks the
/// residual.
pub fn solve_factored(system: &LinearSystem, factor: &Factorization) -> Result<Vec<f64>> {
    let x = factor.solve(system.rhs())?;
    check_residual(system, &x)?;
    Ok(x)
}

fn check_residual(system: &LinearSystem, x: &[f64]) -> Result<()> {
    let r = residual(system, x)?;
    let b = system.rhs().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let relative = r / b.max(1.0);
    if !(relative <= RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge {
            relative,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok(())
}

/// `‖Ax − b‖∞`.
pub fn residual(system: &LinearSystem, x: &[f64]) -> Result<f64> {
    let ax = system.apply(x)?;
    Ok(ax
        .iter()
        .zip(system.rhs())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

pub(crate) fn max_abs_entry(system: &LinearSystem) -> f64 {
    system
        .entries()
        .iter()
        .fold(0.0_f64, |m, e| m.max(e.2.abs()))
}
