//! Error norms, convergence-order fits and convexity diagnostics.

use alloc::vec::Vec;

use crate::bellman_core::{is_positive_definite, SymMatrix2};
use crate::error::{Error, Result};
use crate::fdops::hessian;
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    /// `max |u − ũ|` over all nodes.
    pub sup_error: f64,
    /// `√(hx·hy) · ‖u − ũ‖₂`, a discrete L²(Ω) norm.
    pub l2_error: f64,
    /// Plain Euclidean norm of the nodal difference.
    pub l2_error_raw: f64,
    pub n: usize,
}

pub fn error_summary(u: &ScalarField, exact: &ScalarField) -> Result<ErrorSummary> {
    if !u.same_grid(exact) {
        return Err(Error::GridMismatch);
    }
    let g = u.grid();
    let (sup, sq) = u
        .values()
        .iter()
        .zip(exact.values())
        .fold((0.0_f64, 0.0_f64), |(m, s), (a, b)| {
            let d = (a - b).abs();
            (m.max(d), s + d * d)
        });
    let raw = libm::sqrt(sq);
    Ok(ErrorSummary {
        sup_error: sup,
        l2_error: libm::sqrt(g.hx() * g.hy()) * raw,
        l2_error_raw: raw,
        n: g.n(),
    })
}

/// Least-squares slope of `ln error` against `ln n`.
pub fn order_fit(ns: &[usize], errors: &[f64]) -> Result<f64> {
    if ns.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            actual: errors.len(),
        });
    }
    if ns.len() < 2 {
        return Err(Error::InsufficientPoints(ns.len()));
    }
    if ns.contains(&0) || errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::NonpositiveValues);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| libm::log(n as f64)).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| libm::log(e)).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints(1));
    }
    Ok(sxy / sxx)
}

/// Points where the discrete Hessian fails the positive-definiteness test.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub failures: usize,
    /// Interior mask, lexicographic with `i` fastest; `true` marks a failure.
    pub mask: Vec<bool>,
    /// Interior points per side.
    pub interior_n: usize,
}

impl ConvexityReport {
    /// Grid indices `(i, j)` of the failing interior points.
    pub fn failing_points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.interior_n;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(move |(k, _)| (k % m + 1, k / m + 1))
    }
}

pub fn convexity_diagnostics(u: &ScalarField, det_floor: f64) -> ConvexityReport {
    let h = hessian(u);
    let mask: Vec<bool> = h
        .entries()
        .iter()
        .map(|e| !is_positive_definite(e, det_floor))
        .collect();
    ConvexityReport {
        failures: mask.iter().filter(|&&f| f).count(),
        mask,
        interior_n: u.grid().interior_n(),
    }
}

/// Number of interior points failing the test, without building the mask.
pub fn count_convexity_failures(u: &ScalarField, det_floor: f64) -> usize {
    let g = u.grid();
    let n = g.n();
    let (hx, hy) = (g.hx(), g.hy());
    let v = u.values();
    let mut count = 0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            let c = v[k];
            let hxx = (v[k + 1] - 2.0 * c + v[k - 1]) / (hx * hx);
            let hyy = (v[k + n] - 2.0 * c + v[k - n]) / (hy * hy);
            let hxy = (v[k + n + 1] - v[k - n + 1] - v[k + n - 1] + v[k - n - 1]) / (4.0 * hx * hy);
            if !is_positive_definite(&SymMatrix2::new(hxx, hxy, hyy), det_floor) {
                count += 1;
            }
        }
    }
    count
}

/// `min (u − exact)` over all nodes.
pub fn monotonicity_margin(u: &ScalarField, exact: &ScalarField) -> Result<f64> {
    if !u.same_grid(exact) {
        return Err(Error::GridMismatch);
    }
    Ok(u
        .values()
        .iter()
        .zip(exact.values())
        .fold(f64::INFINITY, |m, (a, b)| m.min(a - b)))
}
