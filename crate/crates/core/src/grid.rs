//! Uniform node-centred grids over a rectangle and scalar fields on them.
//!
//! Index convention: `(i, j)` is x-index `i`, y-index `j`. Values are stored
//! with `i` fastest, i.e. `values[j * n + i]`, so each stored row is a line of
//! constant `y`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    n: usize,
    hx: f64,
    hy: f64,
}

impl GridSpec {
    /// Builds an `n × n` grid over `[x_min, x_max] × [y_min, y_max]`.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidBounds("need at least 3 points per side"));
        }
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidBounds("bounds must be finite"));
        }
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidBounds("max bound must exceed min bound"));
        }
        let steps = (n - 1) as f64;
        Ok(GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            n,
            hx: (x_max - x_min) / steps,
            hy: (y_max - y_min) / steps,
        })
    }

    /// Square grid over `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, lo, hi, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Interior points per side, `n − 2`.
    pub fn interior_n(&self) -> usize {
        self.n - 2
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing when both directions agree to rounding, `None` otherwise.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let scale = self.hx.abs().max(self.hy.abs());
        ((self.hx - self.hy).abs() <= 1e-12 * scale).then_some(self.hx)
    }

    pub fn coordinate(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + i as f64 * self.hx,
            self.y_min + j as f64 * self.hy,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> Result<bool> {
        self.check(i, j)?;
        Ok(i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1)
    }

    pub(crate) fn check(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange { i, j, n: self.n });
        }
        Ok(())
    }

    /// All boundary nodes, counter-clockwise from `(0, 0)`.
    pub fn boundary_points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let last = self.n - 1;
        let bottom = (0..last).map(move |i| (i, 0));
        let right = (0..last).map(move |j| (last, j));
        let top = (1..=last).rev().map(move |i| (i, last));
        let left = (1..=last).rev().map(move |j| (0, j));
        bottom.chain(right).chain(top).chain(left)
    }

    /// Interior nodes in lexicographic order, `i` fastest.
    pub fn interior_points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let last = self.n - 1;
        (1..last).flat_map(move |j| (1..last).map(move |i| (i, j)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                i: k % grid.n(),
                j: k / grid.n(),
            });
        }
        Ok(ScalarField { grid, values })
    }

    /// Tabulates `f` at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let (x, y) = grid.coordinate(i, j);
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { i, j });
                }
                values.push(v);
            }
        }
        Ok(ScalarField { grid, values })
    }

    /// Like [`sample`](Self::sample) but leaves boundary nodes at zero and
    /// never evaluates `f` there.
    pub fn sample_interior<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let mut field = ScalarField::zeros(grid);
        for (i, j) in grid.interior_points() {
            let (x, y) = grid.coordinate(i, j);
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { i, j });
            }
            field.values[grid.index(i, j)] = v;
        }
        Ok(field)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.grid.check(i, j)?;
        Ok(self.at(i, j))
    }

    /// Writes one node; rejects non-finite values.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.grid.check(i, j)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { i, j });
        }
        let k = self.grid.index(i, j);
        self.values[k] = value;
        Ok(())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.grid == other.grid
    }

    /// `max |self − other|` over all nodes.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Gathers interior values in lexicographic order, `i` fastest.
    pub fn interior_vector(&self) -> Vec<f64> {
        self.grid.interior_points().map(|(i, j)| self.at(i, j)).collect()
    }

    /// Copy of `self` whose interior is replaced by `interior`
    /// (lexicographic order). Boundary nodes are kept bit-exactly.
    pub fn with_interior(&self, interior: &[f64]) -> Result<Self> {
        let m = self.grid.interior_n();
        if interior.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                actual: interior.len(),
            });
        }
        let mut out = self.clone();
        for (k, (i, j)) in self.grid.interior_points().enumerate() {
            let v = interior[k];
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { i, j });
            }
            out.values[self.grid.index(i, j)] = v;
        }
        Ok(out)
    }
}
