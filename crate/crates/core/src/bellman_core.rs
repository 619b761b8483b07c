//! Pointwise algebra of Bellman matrices for `n = 2`.
//!
//! For a symmetric positive semi-definite `M`,
//!
//! ```text
//! √det M = ½ · inf { tr(B M) : B symmetric positive definite, det B = 1 },
//! ```
//!
//! and for positive definite `M` the infimum is attained at
//! `B = √(det M) · M⁻¹`. Diagonalising `M = T Λ Tᵀ` and forming
//! `T (√det Λ · Λ⁻¹) Tᵀ` gives the same matrix; in two dimensions it is
//! `adj(M) / √det M`, which is what [`bellman_matrix`] evaluates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Tolerance on `det B = 1` for matrices accepted as Bellman matrices.
pub const DET_ONE_TOL: f64 = 1e-8;

/// Slack in the Bellman lower bound `tr(BM)/2 ≥ √det M`.
pub const LOWER_BOUND_SLACK: f64 = 1e-9;

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        SymMatrix2 { a11, a12, a22 }
    }

    pub const fn diag(a11: f64, a22: f64) -> Self {
        SymMatrix2 { a11, a12: 0.0, a22 }
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// `tr(self · other)` without forming the product.
    #[inline]
    pub fn trace_product(&self, other: &SymMatrix2) -> f64 {
        self.a11 * other.a11 + 2.0 * self.a12 * other.a12 + self.a22 * other.a22
    }

    pub fn scale(&self, s: f64) -> SymMatrix2 {
        SymMatrix2::new(s * self.a11, s * self.a12, s * self.a22)
    }

    pub fn add(&self, other: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a22 + other.a22,
        )
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * self.trace();
        let half_gap = libm::hypot(0.5 * (self.a11 - self.a22), self.a12);
        (mean - half_gap, mean + half_gap)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }
}

/// Sylvester test with a floor on the determinant: `a11 > 0` and
/// `det > det_floor`.
#[inline]
pub fn is_positive_definite(m: &SymMatrix2, det_floor: f64) -> bool {
    m.a11 > 0.0 && m.det() > det_floor
}

/// `B = √(det h) · h⁻¹ = adj(h) / √det h`, the det-one matrix minimising
/// `tr(B h)`.
pub fn bellman_matrix(h: &SymMatrix2) -> Result<SymMatrix2> {
    if !is_positive_definite(h, 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let inv_root = 1.0 / libm::sqrt(h.det());
    let b = SymMatrix2::new(h.a22 * inv_root, -h.a12 * inv_root, h.a11 * inv_root);
    if !b.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(b)
}

/// Checks `tr(b·m)/2 ≥ √det m − 1e−9` for positive semi-definite `m` and a
/// det-one positive definite `b`.
pub fn bellman_lower_bound_check(m: &SymMatrix2, b: &SymMatrix2) -> Result<bool> {
    let psd = m.a11 >= 0.0 && m.a22 >= 0.0 && m.det() >= -1e-12 * (1.0 + m.trace() * m.trace());
    if !psd {
        return Err(Error::InvalidArguments("m must be positive semi-definite"));
    }
    if !is_positive_definite(b, 0.0) || (b.det() - 1.0).abs() > DET_ONE_TOL {
        return Err(Error::InvalidArguments(
            "b must be positive definite with unit determinant",
        ));
    }
    let root_det = libm::sqrt(m.det().max(0.0));
    Ok(0.5 * b.trace_product(m) >= root_det - LOWER_BOUND_SLACK)
}

/// Per-point coefficient matrices over the interior of a grid, together with
/// the mask of points whose Hessian failed the positive-definiteness test.
///
/// Interior point `(i, j)` (grid indices, `1 ≤ i, j ≤ n − 2`) is stored at
/// `(j − 1)·m + (i − 1)` with `m = n − 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanField {
    grid: GridSpec,
    matrices: Vec<SymMatrix2>,
    marked: Vec<bool>,
}

impl BellmanField {
    /// Identity everywhere, nothing marked.
    pub fn identity(grid: GridSpec) -> Self {
        let m = grid.interior_n();
        BellmanField {
            grid,
            matrices: vec![SymMatrix2::IDENTITY; m * m],
            marked: vec![false; m * m],
        }
    }

    pub fn from_parts(grid: GridSpec, matrices: Vec<SymMatrix2>, marked: Vec<bool>) -> Result<Self> {
        let m = grid.interior_n();
        if matrices.len() != m * m || marked.len() != m * m {
            return Err(Error::InconsistentDimensions(
                "bellman field arrays must cover the interior",
            ));
        }
        Ok(BellmanField {
            grid,
            matrices,
            marked,
        })
    }

    /// Same matrix at every interior point.
    pub fn constant(grid: GridSpec, b: SymMatrix2) -> Self {
        let m = grid.interior_n();
        BellmanField {
            grid,
            matrices: vec![b; m * m],
            marked: vec![false; m * m],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrices(&self) -> &[SymMatrix2] {
        &self.matrices
    }

    pub fn marked(&self) -> &[bool] {
        &self.marked
    }

    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Result<usize> {
        let m = self.grid.interior_n();
        if i == 0 || j == 0 || i > m || j > m {
            return Err(Error::IndexOutOfRange {
                i,
                j,
                n: self.grid.n(),
            });
        }
        Ok((j - 1) * m + (i - 1))
    }

    /// Matrix at interior grid point `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> Result<SymMatrix2> {
        Ok(self.matrices[self.slot(i, j)?])
    }

    pub fn is_marked(&self, i: usize, j: usize) -> Result<bool> {
        Ok(self.marked[self.slot(i, j)?])
    }

    pub fn set(&mut self, i: usize, j: usize, b: SymMatrix2, marked: bool) -> Result<()> {
        let k = self.slot(i, j)?;
        self.matrices[k] = b;
        self.marked[k] = marked;
        Ok(())
    }
}

/// Replaces the matrix at every marked point by the determinant-normalised
/// convex combination of the nearest unmarked matrices found by scanning
/// left, right, down and up along the point's row and column. Weights are
/// proportional to the inverse distance in grid steps. A marked point that
/// sees no unmarked point in any direction gets the identity.
///
/// Sources are always taken from the input mask, so the result does not
/// depend on the order in which marked points are visited. The returned
/// field keeps the input mask.
pub fn interpolate_marked(field: &BellmanField) -> BellmanField {
    let m = field.grid.interior_n();
    let mut out = field.clone();
    let src = &field.matrices;
    let marked = &field.marked;

    for q in 0..m {
        for p in 0..m {
            let k = q * m + p;
            if !marked[k] {
                continue;
            }
            let mut acc = SymMatrix2::new(0.0, 0.0, 0.0);
            let mut weight = 0.0;
            let mut take = |idx: usize, dist: usize| {
                let w = 1.0 / dist as f64;
                acc = acc.add(&src[idx].scale(w));
                weight += w;
            };
            if let Some(pp) = (0..p).rev().find(|&pp| !marked[q * m + pp]) {
                take(q * m + pp, p - pp);
            }
            if let Some(pp) = (p + 1..m).find(|&pp| !marked[q * m + pp]) {
                take(q * m + pp, pp - p);
            }
            if let Some(qq) = (0..q).rev().find(|&qq| !marked[qq * m + p]) {
                take(qq * m + p, q - qq);
            }
            if let Some(qq) = (q + 1..m).find(|&qq| !marked[qq * m + p]) {
                take(qq * m + p, qq - q);
            }
            out.matrices[k] = if weight > 0.0 {
                let combo = acc.scale(1.0 / weight);
                let det = combo.det();
                // Minkowski: a convex combination of det-one SPD matrices has det ≥ 1.
                debug_assert!(det >= 1.0 - 1e-12, "interpolated det {det} < 1");
                combo.scale(1.0 / libm::sqrt(det))
            } else {
                SymMatrix2::IDENTITY
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_spd(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SymMatrix2 {
        // eigenvalues log-uniform in [lo, hi], random rotation
        let l1 = libm::exp(rng.gen_range(libm::log(lo)..libm::log(hi)));
        let l2 = libm::exp(rng.gen_range(libm::log(lo)..libm::log(hi)));
        let t: f64 = rng.gen_range(0.0..core::f64::consts::PI);
        let (s, c) = libm::sincos(t);
        SymMatrix2::new(
            c * c * l1 + s * s * l2,
            c * s * (l1 - l2),
            s * s * l1 + c * c * l2,
        )
    }

    #[test]
    fn positive_definite_examples() {
        assert!(is_positive_definite(&SymMatrix2::IDENTITY, 0.0));
        assert!(!is_positive_definite(&SymMatrix2::diag(1.0, -1.0), 0.0));
        assert!(!is_positive_definite(&SymMatrix2::diag(1.0, 1e-12), 1e-10));
        assert!(!is_positive_definite(&SymMatrix2::diag(-1.0, -1.0), 0.0));
    }

    #[test]
    fn bellman_matrix_examples() {
        assert_eq!(bellman_matrix(&SymMatrix2::IDENTITY).unwrap(), SymMatrix2::IDENTITY);

        let b = bellman_matrix(&SymMatrix2::diag(4.0, 1.0)).unwrap();
        assert_eq!(b, SymMatrix2::diag(0.5, 2.0));
        assert_eq!(b.det(), 1.0);

        let h = SymMatrix2::new(2.0, 1.0, 2.0);
        let b = bellman_matrix(&h).unwrap();
        let r = 1.0 / libm::sqrt(3.0);
        assert!(close(b.a11, 2.0 * r, 1e-15));
        assert!(close(b.a12, -r, 1e-15));
        assert!(close(b.a22, 2.0 * r, 1e-15));
        assert!(close(b.trace_product(&h), 2.0 * libm::sqrt(3.0), 1e-14));

        assert_eq!(
            bellman_matrix(&SymMatrix2::diag(1.0, -1.0)),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn closed_form_matches_eigendecomposition() {
        // B = T diag(√detΛ / λ₁, √detΛ / λ₂) Tᵀ built by hand
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let l1 = rng.gen_range(0.01..50.0);
            let l2 = rng.gen_range(0.01..50.0);
            let t: f64 = rng.gen_range(0.0..3.0);
            let (s, c) = libm::sincos(t);
            let h = SymMatrix2::new(
                c * c * l1 + s * s * l2,
                c * s * (l1 - l2),
                s * s * l1 + c * c * l2,
            );
            let root = libm::sqrt(l1 * l2);
            let (a1, a2) = (root / l1, root / l2);
            let expect = SymMatrix2::new(
                c * c * a1 + s * s * a2,
                c * s * (a1 - a2),
                s * s * a1 + c * c * a2,
            );
            let b = bellman_matrix(&h).unwrap();
            let scale = 1.0 + a1.max(a2);
            assert!(close(b.a11, expect.a11, 1e-10 * scale));
            assert!(close(b.a12, expect.a12, 1e-10 * scale));
            assert!(close(b.a22, expect.a22, 1e-10 * scale));
        }
    }

    #[test]
    fn lower_bound_examples() {
        let i = SymMatrix2::IDENTITY;
        assert!(bellman_lower_bound_check(&i, &i).unwrap());

        let m = SymMatrix2::diag(4.0, 1.0);
        let b = bellman_matrix(&m).unwrap();
        assert!(bellman_lower_bound_check(&m, &b).unwrap());
        assert!(close(0.5 * b.trace_product(&m), 2.0, 1e-15));

        let b = SymMatrix2::diag(2.0, 0.5);
        assert_eq!(0.5 * b.trace_product(&m), 4.25);
        assert!(bellman_lower_bound_check(&m, &b).unwrap());

        assert!(bellman_lower_bound_check(&SymMatrix2::diag(-1.0, 1.0), &i).is_err());
        assert!(bellman_lower_bound_check(&m, &SymMatrix2::diag(2.0, 2.0)).is_err());
    }

    #[test]
    fn det_one_closure_and_attained_infimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..10_000 {
            let h = random_spd(&mut rng, 1e-3, 1e3);
            let b = bellman_matrix(&h).unwrap();
            assert!(close(b.det(), 1.0, 1e-9), "det {}", b.det());
            let root = libm::sqrt(h.det());
            assert!(close(b.trace_product(&h), 2.0 * root, 1e-9 * 2.0 * root));
        }
    }

    #[test]
    fn bellman_inequality_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..10_000 {
            let mut m = random_spd(&mut rng, 1e-3, 1e3);
            if k % 10 == 0 {
                // rank-deficient semi-definite
                let (s, c) = libm::sincos(rng.gen_range(0.0..3.0));
                let l = rng.gen_range(0.0..10.0);
                m = SymMatrix2::new(c * c * l, c * s * l, s * s * l);
            }
            let raw = random_spd(&mut rng, 1e-2, 1e2);
            let b = raw.scale(1.0 / libm::sqrt(raw.det()));
            assert!(bellman_lower_bound_check(&m, &b).unwrap());
        }
    }

    fn field_3x3_interior() -> BellmanField {
        // n = 5 → 3×3 interior
        BellmanField::identity(GridSpec::square(0.0, 1.0, 5).unwrap())
    }

    #[test]
    fn interpolation_symmetric_neighbours_normalise_to_identity() {
        let mut f = field_3x3_interior();
        f.set(1, 2, SymMatrix2::diag(2.0, 0.5), false).unwrap();
        f.set(3, 2, SymMatrix2::diag(0.5, 2.0), false).unwrap();
        f.set(2, 2, SymMatrix2::IDENTITY, true).unwrap();
        // block the vertical sources
        f.set(2, 1, SymMatrix2::IDENTITY, true).unwrap();
        f.set(2, 3, SymMatrix2::IDENTITY, true).unwrap();
        let out = interpolate_marked(&f);
        let b = out.at(2, 2).unwrap();
        assert!(close(b.a11, 1.0, 1e-15) && close(b.a22, 1.0, 1e-15) && b.a12 == 0.0);
    }

    #[test]
    fn interpolation_single_source() {
        let mut f = field_3x3_interior();
        for (i, j) in [(2, 1), (3, 1), (1, 2), (2, 2), (3, 2), (2, 3), (3, 3)] {
            f.set(i, j, SymMatrix2::IDENTITY, true).unwrap();
        }
        f.set(1, 1, SymMatrix2::diag(2.0, 0.5), false).unwrap();
        f.set(1, 3, SymMatrix2::diag(3.0, 1.0 / 3.0), true).unwrap();
        // (3,1): left scan hits (1,1) at distance 2; right, down: nothing; up: (3,2),(3,3) marked
        let out = interpolate_marked(&f);
        let b = out.at(3, 1).unwrap();
        assert!(close(b.a11, 2.0, 1e-15) && close(b.a22, 0.5, 1e-15));
    }

    #[test]
    fn interpolation_inverse_distance_weights() {
        let g = GridSpec::square(0.0, 1.0, 7).unwrap(); // 5×5 interior
        let mut f = BellmanField::identity(g);
        for i in 1..=5 {
            for j in 1..=5 {
                f.set(i, j, SymMatrix2::IDENTITY, true).unwrap();
            }
        }
        let left = SymMatrix2::diag(4.0, 0.25);
        let right = SymMatrix2::diag(0.25, 4.0);
        f.set(1, 3, left, false).unwrap();
        f.set(5, 3, right, false).unwrap();
        // (2,3): left at distance 1 (w 1), right at distance 3 (w 1/3)
        let out = interpolate_marked(&f);
        let combo = left.scale(0.75).add(&right.scale(0.25));
        let expect = combo.scale(1.0 / libm::sqrt(combo.det()));
        let b = out.at(2, 3).unwrap();
        assert!(close(b.a11, expect.a11, 1e-14) && close(b.a22, expect.a22, 1e-14));
        assert!(close(b.det(), 1.0, 1e-12));
    }

    #[test]
    fn interpolation_all_marked_falls_back_to_identity() {
        let g = GridSpec::square(0.0, 1.0, 6).unwrap();
        let m = g.interior_n();
        let f = BellmanField::from_parts(
            g,
            vec![SymMatrix2::diag(5.0, 0.2); m * m],
            vec![true; m * m],
        )
        .unwrap();
        let out = interpolate_marked(&f);
        assert!(out.matrices().iter().all(|b| *b == SymMatrix2::IDENTITY));
        assert_eq!(out.marked_count(), m * m);
    }

    #[test]
    fn interpolation_is_identity_on_unmarked_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::square(0.0, 1.0, 8).unwrap();
        let m = g.interior_n();
        let mats = (0..m * m)
            .map(|_| {
                let h = random_spd(&mut rng, 0.1, 10.0);
                bellman_matrix(&h).unwrap()
            })
            .collect();
        let f = BellmanField::from_parts(g, mats, vec![false; m * m]).unwrap();
        assert_eq!(interpolate_marked(&f), f);
    }

    #[test]
    fn interpolation_output_is_det_one_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let g = GridSpec::square(0.0, 1.0, 12).unwrap();
        let m = g.interior_n();
        for _ in 0..20 {
            let mats: Vec<_> = (0..m * m)
                .map(|_| bellman_matrix(&random_spd(&mut rng, 1e-2, 1e2)).unwrap())
                .collect();
            let marked: Vec<_> = (0..m * m).map(|_| rng.gen_bool(0.6)).collect();
            let f = BellmanField::from_parts(g, mats, marked).unwrap();
            for b in interpolate_marked(&f).matrices() {
                assert!(is_positive_definite(b, 0.0));
                assert!((b.det() - 1.0).abs() <= DET_ONE_TOL);
            }
        }
    }

    #[test]
    fn field_rejects_boundary_access() {
        let f = field_3x3_interior();
        assert!(f.at(0, 2).is_err());
        assert!(f.at(4, 2).is_err());
        assert!(f.at(2, 2).is_ok());
    }
}
