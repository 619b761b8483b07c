//! Narrow-stencil second-order finite differences.
//!
//! Stencils at interior node `(i, j)`:
//!
//! ```text
//! D²xx u = (u[i+1,j] − 2u[i,j] + u[i−1,j]) / hx²
//! D²yy u = (u[i,j+1] − 2u[i,j] + u[i,j−1]) / hy²
//! D²xy u = (u[i+1,j+1] − u[i+1,j−1] − u[i−1,j+1] + u[i−1,j−1]) / (4 hx hy)
//! ```
//!
//! All three are exact on quadratic polynomials. Nodes next to the boundary
//! read the Dirichlet values stored in the field, so no one-sided stencils
//! are needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::bellman_core::{BellmanField, SymMatrix2};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::par;

/// Discrete Hessian over the interior of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianField {
    grid: GridSpec,
    entries: Vec<SymMatrix2>,
}

impl HessianField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Entries in lexicographic interior order (`i` fastest).
    pub fn entries(&self) -> &[SymMatrix2] {
        &self.entries
    }

    /// Hessian at interior grid point `(i, j)`; boundary indices are rejected.
    pub fn at(&self, i: usize, j: usize) -> Result<SymMatrix2> {
        let m = self.grid.interior_n();
        if i == 0 || j == 0 || i > m || j > m {
            return Err(Error::IndexOutOfRange {
                i,
                j,
                n: self.grid.n(),
            });
        }
        Ok(self.entries[(j - 1) * m + (i - 1)])
    }
}

#[inline]
fn hessian_at(u: &ScalarField, i: usize, j: usize) -> SymMatrix2 {
    let g = u.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let c = u.at(i, j);
    let hxx = (u.at(i + 1, j) - 2.0 * c + u.at(i - 1, j)) / (hx * hx);
    let hyy = (u.at(i, j + 1) - 2.0 * c + u.at(i, j - 1)) / (hy * hy);
    let hxy = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1)
        + u.at(i - 1, j - 1))
        / (4.0 * hx * hy);
    SymMatrix2::new(hxx, hxy, hyy)
}

pub fn hessian(u: &ScalarField) -> HessianField {
    let grid = *u.grid();
    let m = grid.interior_n();
    let mut entries = vec![SymMatrix2::IDENTITY; m * m];
    par::for_each_row(&mut entries, m, |q, row| {
        for (p, e) in row.iter_mut().enumerate() {
            *e = hessian_at(u, p + 1, q + 1);
        }
    });
    HessianField { grid, entries }
}

fn interior_map(u: &ScalarField, f: impl Fn(SymMatrix2) -> f64) -> ScalarField {
    let h = hessian(u);
    let grid = *u.grid();
    let mut out = ScalarField::zeros(grid);
    let m = grid.interior_n();
    let values = out.values_mut();
    for (k, e) in h.entries.iter().enumerate() {
        let (i, j) = (k % m + 1, k / m + 1);
        values[grid.index(i, j)] = f(*e);
    }
    out
}

/// Five-point Laplacian at interior nodes; boundary entries are zero.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let grid = *u.grid();
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut out = ScalarField::zeros(grid);
    let values = out.values_mut();
    for (i, j) in grid.interior_points() {
        let c = u.at(i, j);
        values[grid.index(i, j)] = (u.at(i + 1, j) + u.at(i - 1, j) - 2.0 * c) / (hx * hx)
            + (u.at(i, j + 1) + u.at(i, j - 1) - 2.0 * c) / (hy * hy);
    }
    out
}

/// `D²xx u · D²yy u − (D²xy u)²` at interior nodes; boundary entries are zero.
pub fn ma_determinant(u: &ScalarField) -> ScalarField {
    interior_map(u, |h| h.det())
}

/// Sparse linear system over the interior unknowns of a grid.
///
/// Unknown `k` is interior node `(k % mx + 1, k / mx + 1)` when the system
/// carries a grid layout (lexicographic, `i` fastest). Entries are kept as
/// `(row, col, value)` triplets with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    dimension: usize,
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    layout: Option<(usize, usize)>,
}

impl LinearSystem {
    /// General system from triplets; duplicates are summed.
    pub fn from_triplets(
        dimension: usize,
        entries: Vec<(usize, usize, f64)>,
        rhs: Vec<f64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InconsistentDimensions("system dimension must be positive"));
        }
        if rhs.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: rhs.len(),
            });
        }
        if entries.iter().any(|&(r, c, _)| r >= dimension || c >= dimension) {
            return Err(Error::InconsistentDimensions("entry index out of range"));
        }
        let mut entries = entries;
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(LinearSystem {
            dimension,
            entries: merged,
            rhs,
            layout: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Interior points per direction when the unknowns come from a grid.
    pub fn layout(&self) -> Option<(usize, usize)> {
        self.layout
    }

    /// Same matrix, different right-hand side.
    pub fn with_rhs(&self, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: rhs.len(),
            });
        }
        Ok(LinearSystem {
            dimension: self.dimension,
            entries: self.entries.clone(),
            rhs,
            layout: self.layout,
        })
    }

    pub fn max_row_nonzeros(&self) -> usize {
        let mut counts = vec![0usize; self.dimension];
        for &(r, _, _) in &self.entries {
            counts[r] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        let mut y = vec![0.0; self.dimension];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }
}

/// Discretises `tr(B D²u) = rhs` at the interior nodes with `u` fixed to the
/// values of `boundary` on boundary nodes:
///
/// ```text
/// b11 D²xx u + b22 D²yy u + 2 b12 D²xy u = rhs
/// ```
///
/// Known boundary contributions are moved to the right-hand side. Interior
/// values of `boundary` and boundary values of `rhs_interior` are ignored.
pub fn assemble_trace_system(
    b: &BellmanField,
    rhs_interior: &ScalarField,
    boundary: &ScalarField,
) -> Result<LinearSystem> {
    let grid = *b.grid();
    if *rhs_interior.grid() != grid || *boundary.grid() != grid {
        return Err(Error::InconsistentDimensions(
            "coefficients, right-hand side and boundary data must share a grid",
        ));
    }
    let n = grid.n();
    let m = grid.interior_n();
    let (hx, hy) = (grid.hx(), grid.hy());
    let (cx, cy, cxy) = (1.0 / (hx * hx), 1.0 / (hy * hy), 1.0 / (4.0 * hx * hy));

    let mut entries = Vec::with_capacity(9 * m * m);
    let mut rhs = vec![0.0; m * m];
    for (row, (i, j)) in grid.interior_points().enumerate() {
        let bm = b.matrices()[row];
        let ex = bm.a11 * cx;
        let ey = bm.a22 * cy;
        let exy = 2.0 * bm.a12 * cxy;
        let stencil = [
            (0isize, 0isize, -2.0 * ex - 2.0 * ey),
            (-1, 0, ex),
            (1, 0, ex),
            (0, -1, ey),
            (0, 1, ey),
            (1, 1, exy),
            (-1, -1, exy),
            (1, -1, -exy),
            (-1, 1, -exy),
        ];
        let mut r = rhs_interior.at(i, j);
        for (di, dj, w) in stencil {
            if w == 0.0 {
                continue;
            }
            let (ni, nj) = ((i as isize + di) as usize, (j as isize + dj) as usize);
            if ni == 0 || nj == 0 || ni == n - 1 || nj == n - 1 {
                r -= w * boundary.at(ni, nj);
            } else {
                entries.push((row, (nj - 1) * m + (ni - 1), w));
            }
        }
        rhs[row] = r;
    }
    entries.sort_by_key(|e| (e.0, e.1));
    Ok(LinearSystem {
        dimension: m * m,
        entries,
        rhs,
        layout: Some((m, m)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve;

    fn sample(n: usize, lo: f64, hi: f64, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField::sample(GridSpec::square(lo, hi, n).unwrap(), f).unwrap()
    }

    #[test]
    fn hessian_of_quadratics() {
        let u = sample(9, -1.0, 1.0, |x, y| x * x + y * y);
        for e in hessian(&u).entries() {
            assert!((e.a11 - 2.0).abs() < 1e-12 && (e.a22 - 2.0).abs() < 1e-12);
            assert!(e.a12.abs() < 1e-12);
        }
        let u = sample(9, -1.0, 1.0, |x, y| x * y);
        for e in hessian(&u).entries() {
            assert!((e.a12 - 1.0).abs() < 1e-12);
            assert!(e.a11.abs() < 1e-12 && e.a22.abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_of_gaussian_bump_near_origin() {
        // analytic u_xx = (1 + x²) e^{(x²+y²)/2} = 1 at the origin
        let u = sample(201, -1.0, 1.0, |x, y| libm::exp(0.5 * (x * x + y * y)));
        let h = hessian(&u).at(100, 100).unwrap();
        assert!((h.a11 - 1.0).abs() < 1e-4, "{}", h.a11);
    }

    #[test]
    fn hessian_rejects_boundary_index() {
        let u = sample(5, 0.0, 1.0, |x, _| x);
        assert!(hessian(&u).at(0, 1).is_err());
        assert!(hessian(&u).at(1, 4).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let u = sample(7, -1.0, 1.0, |x, y| x * x + y * y);
        let g = *u.grid();
        let l = laplacian(&u);
        for (i, j) in g.interior_points() {
            assert!((l.at(i, j) - 4.0).abs() < 1e-12);
        }
        for (i, j) in g.boundary_points() {
            assert_eq!(l.at(i, j), 0.0);
        }
        let l = laplacian(&sample(7, -1.0, 1.0, |x, _| x));
        assert!(g.interior_points().all(|(i, j)| l.at(i, j).abs() < 1e-12));
    }

    #[test]
    fn laplacian_of_quartic_carries_2h2_bias() {
        // (x+h)⁴ + (x−h)⁴ − 2x⁴ = 12x²h² + 2h⁴  ⇒  stencil = 12x² + 2h²
        let u = sample(11, 0.0, 1.0, |x, _| x * x * x * x);
        let l = laplacian(&u);
        assert!((l.at(5, 5) - 3.02).abs() < 1e-10, "{}", l.at(5, 5));
    }

    #[test]
    fn determinant_examples() {
        let u = sample(9, -1.0, 1.0, |x, y| x * x + y * y);
        let g = *u.grid();
        let d = ma_determinant(&u);
        assert!(g.interior_points().all(|(i, j)| (d.at(i, j) - 4.0).abs() < 1e-10));
        let d = ma_determinant(&sample(9, -1.0, 1.0, |x, y| x * y));
        assert!(g.interior_points().all(|(i, j)| (d.at(i, j) + 1.0).abs() < 1e-10));

        let u = sample(201, -1.0, 1.0, |x, y| libm::exp(0.5 * (x * x + y * y)));
        let d = ma_determinant(&u);
        assert!((d.at(100, 100) - 1.0).abs() < 1e-3);
    }

    fn poisson_5pt(grid: GridSpec, rhs: &ScalarField, bnd: &ScalarField) -> LinearSystem {
        // hand-built 5-point Δ with the Dirichlet data moved to the right-hand side
        let m = grid.interior_n();
        let h2 = grid.hx() * grid.hx();
        let mut t = Vec::new();
        let mut b = vec![0.0; m * m];
        for (row, (i, j)) in grid.interior_points().enumerate() {
            t.push((row, row, -4.0 / h2));
            let mut r = rhs.at(i, j);
            for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if grid.is_boundary(ni, nj).unwrap() {
                    r -= bnd.at(ni, nj) / h2;
                } else {
                    t.push((row, (nj - 1) * m + ni - 1, 1.0 / h2));
                }
            }
            b[row] = r;
        }
        LinearSystem::from_triplets(m * m, t, b).unwrap()
    }

    #[test]
    fn identity_coefficients_give_poisson_system() {
        let g = GridSpec::square(-1.0, 1.0, 8).unwrap();
        let rhs = ScalarField::sample(g, |x, y| 1.0 + x - y).unwrap();
        let bnd = ScalarField::sample(g, |x, y| x * y + 2.0).unwrap();
        let sys = assemble_trace_system(&BellmanField::identity(g), &rhs, &bnd).unwrap();
        let reference = poisson_5pt(g, &rhs, &bnd);
        assert_eq!(sys.entries().len(), reference.entries().len());
        for (a, b) in sys.entries().iter().zip(reference.entries()) {
            assert_eq!((a.0, a.1), (b.0, b.1));
            assert!((a.2 - b.2).abs() <= 1e-12 * b.2.abs());
        }
        for (a, b) in sys.rhs().iter().zip(reference.rhs()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn identity_system_is_symmetric() {
        let g = GridSpec::square(0.0, 1.0, 9).unwrap();
        let z = ScalarField::zeros(g);
        let sys = assemble_trace_system(&BellmanField::identity(g), &z, &z).unwrap();
        for &(r, c, v) in sys.entries() {
            assert!(sys
                .entries()
                .iter()
                .any(|&(r2, c2, v2)| r2 == c && c2 == r && v2 == v));
        }
        assert!(sys.max_row_nonzeros() <= 9);
    }

    #[test]
    fn harmonic_linear_data_is_reproduced() {
        let g = GridSpec::square(-1.0, 1.0, 9).unwrap();
        let bnd = ScalarField::sample(g, |x, _| x).unwrap();
        let sys = assemble_trace_system(&BellmanField::identity(g), &ScalarField::zeros(g), &bnd)
            .unwrap();
        let x = linsolve::solve(&sys).unwrap();
        for (k, (i, j)) in g.interior_points().enumerate() {
            assert!((x[k] - g.coordinate(i, j).0).abs() < 1e-13);
        }
    }

    #[test]
    fn anisotropic_coefficients_on_quadratic() {
        let g = GridSpec::square(-1.0, 1.0, 13).unwrap();
        let exact = ScalarField::sample(g, |x, y| x * x + y * y).unwrap();
        let rhs = ScalarField::sample(g, |_, _| 5.0).unwrap();
        let b = BellmanField::constant(g, SymMatrix2::diag(2.0, 0.5));
        let sys = assemble_trace_system(&b, &rhs, &exact).unwrap();
        let truth = exact.interior_vector();
        let r = linsolve::residual(&sys, &truth).unwrap();
        assert!(r < 1e-10, "residual of exact solution {r}");
        let x = linsolve::solve(&sys).unwrap();
        for (a, b) in x.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_coefficient_system_exact_on_quadratic() {
        let g = GridSpec::square(0.0, 2.0, 11).unwrap();
        let q = |x: f64, y: f64| 1.5 * x * x - 0.7 * x * y + 0.9 * y * y + x - 3.0;
        let exact = ScalarField::sample(g, q).unwrap();
        let bm = SymMatrix2::new(1.3, 0.4, 1.0);
        let bm = bm.scale(1.0 / libm::sqrt(bm.det()));
        // tr(B H) with H = [[3, −0.7], [−0.7, 1.8]]
        let h = SymMatrix2::new(3.0, -0.7, 1.8);
        let rhs = ScalarField::sample(g, |_, _| bm.trace_product(&h)).unwrap();
        let sys = assemble_trace_system(&BellmanField::constant(g, bm), &rhs, &exact).unwrap();
        let x = linsolve::solve(&sys).unwrap();
        let truth = exact.interior_vector();
        assert!(x.iter().zip(&truth).all(|(a, b)| (a - b).abs() < 1e-11));
    }

    #[test]
    fn assembly_is_linear_in_rhs() {
        let g = GridSpec::square(0.0, 1.0, 8).unwrap();
        let bnd = ScalarField::sample(g, |x, y| libm::sin(x + 2.0 * y)).unwrap();
        let zero = ScalarField::zeros(g);
        let r1 = ScalarField::sample(g, |x, y| x * y).unwrap();
        let r2 = ScalarField::sample(g, |x, _| 3.0 - x).unwrap();
        let r12 = ScalarField::sample(g, |x, y| x * y + 3.0 - x).unwrap();
        let b = BellmanField::constant(g, SymMatrix2::new(1.25, 0.75, 1.25));
        let s1 = assemble_trace_system(&b, &r1, &bnd).unwrap();
        let s2 = assemble_trace_system(&b, &r2, &zero).unwrap();
        let s12 = assemble_trace_system(&b, &r12, &bnd).unwrap();
        assert_eq!(s1.entries(), s12.entries());
        for k in 0..s12.dimension() {
            assert!((s12.rhs()[k] - s1.rhs()[k] - s2.rhs()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn assembly_rejects_mismatched_grids() {
        let g = GridSpec::square(0.0, 1.0, 8).unwrap();
        let g2 = GridSpec::square(0.0, 1.0, 9).unwrap();
        let r = assemble_trace_system(
            &BellmanField::identity(g),
            &ScalarField::zeros(g2),
            &ScalarField::zeros(g),
        );
        assert!(matches!(r, Err(Error::InconsistentDimensions(_))));
    }
}
