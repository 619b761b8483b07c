//! Catalog of test problems: domain, right-hand side `f ≥ 0`, Dirichlet data
//! `φ` and, where known, the exact solution.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::fdops::ma_determinant;
use crate::grid::{GridSpec, ScalarField};

/// Names accepted by [`catalog`].
pub const PROBLEM_NAMES: [&str; 9] = [
    "standard",
    "reg_degenerate",
    "trigonometric",
    "degenerate",
    "constant_ma",
    "circular",
    "unbounded",
    "unbounded_trimmed",
    "abs_x",
];

pub type PointFn = fn(f64, f64) -> f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn square(lo: f64, hi: f64) -> Self {
        Rect {
            x_min: lo,
            x_max: hi,
            y_min: lo,
            y_max: hi,
        }
    }

    pub fn grid(&self, n: usize) -> Result<GridSpec> {
        GridSpec::new(self.x_min, self.x_max, self.y_min, self.y_max, n)
    }
}

#[derive(Debug, Clone, Copy)]
enum Formula {
    /// u = e^{(x²+y²)/2}
    Standard,
    /// u = ½(x − ½)⁴ + εx² + y²
    Quartic { eps: f64 },
    /// u = −cos(πx/2) − cos(πy/2)
    Trigonometric,
    /// det D²u = 1, u = 1 on the boundary
    ConstantMa,
    /// u = ½ ((r − 0.2)⁺)², r = |(x, y) − (½, ½)|
    Circular,
    /// u = −√(2 − x² − y²)
    Unbounded,
    /// f = 0, u = |x|
    AbsX,
    Custom {
        rhs: PointFn,
        boundary: PointFn,
        exact: Option<PointFn>,
    },
}

/// A Dirichlet problem `det D²u = f` in the domain, `u = φ` on its boundary.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    name: String,
    domain: Rect,
    formula: Formula,
}

impl ProblemSpec {
    /// Problem defined by plain functions. `exact`, when given, should agree
    /// with `boundary` on the boundary.
    pub fn custom(
        name: &str,
        domain: Rect,
        rhs: PointFn,
        boundary: PointFn,
        exact: Option<PointFn>,
    ) -> Self {
        ProblemSpec {
            name: name.to_owned(),
            domain,
            formula: Formula::Custom {
                rhs,
                boundary,
                exact,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn with_domain(mut self, domain: Rect) -> Self {
        self.domain = domain;
        self
    }

    /// Named real parameters of the problem.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.formula {
            Formula::Quartic { eps } => vec![("eps", eps)],
            _ => Vec::new(),
        }
    }

    pub fn grid(&self, n: usize) -> Result<GridSpec> {
        self.domain.grid(n)
    }

    pub fn rhs(&self, x: f64, y: f64) -> f64 {
        match self.formula {
            Formula::Standard => {
                let r2 = x * x + y * y;
                (1.0 + r2) * libm::exp(r2)
            }
            Formula::Quartic { eps } => {
                let d = x - 0.5;
                12.0 * d * d + 4.0 * eps
            }
            Formula::Trigonometric => {
                let c = FRAC_PI_2 * FRAC_PI_2;
                c * c * libm::cos(FRAC_PI_2 * x) * libm::cos(FRAC_PI_2 * y)
            }
            Formula::ConstantMa => 1.0,
            Formula::Circular => {
                let r = libm::hypot(x - 0.5, y - 0.5);
                if r <= 0.2 {
                    0.0
                } else {
                    (r - 0.2) / r
                }
            }
            Formula::Unbounded => {
                let d = 2.0 - x * x - y * y;
                2.0 / (d * d)
            }
            Formula::AbsX => 0.0,
            Formula::Custom { rhs, .. } => rhs(x, y),
        }
    }

    pub fn exact(&self, x: f64, y: f64) -> Option<f64> {
        let v = match self.formula {
            Formula::Standard => libm::exp(0.5 * (x * x + y * y)),
            Formula::Quartic { eps } => {
                let d = x - 0.5;
                0.5 * d * d * d * d + eps * x * x + y * y
            }
            Formula::Trigonometric => -libm::cos(FRAC_PI_2 * x) - libm::cos(FRAC_PI_2 * y),
            Formula::ConstantMa => return None,
            Formula::Circular => {
                let t = (libm::hypot(x - 0.5, y - 0.5) - 0.2).max(0.0);
                0.5 * t * t
            }
            Formula::Unbounded => -libm::sqrt(2.0 - x * x - y * y),
            Formula::AbsX => x.abs(),
            Formula::Custom { exact, .. } => return exact.map(|e| e(x, y)),
        };
        Some(v)
    }

    pub fn has_exact(&self) -> bool {
        match self.formula {
            Formula::ConstantMa => false,
            Formula::Custom { exact, .. } => exact.is_some(),
            _ => true,
        }
    }

    pub fn boundary(&self, x: f64, y: f64) -> f64 {
        match self.formula {
            Formula::ConstantMa => 1.0,
            Formula::Custom { boundary, .. } => boundary(x, y),
            _ => self.exact(x, y).expect("catalog problems with an exact solution"),
        }
    }

    /// `f` at interior nodes (boundary nodes stay zero and are never
    /// evaluated). Fails on negative or non-finite values.
    pub fn sample_rhs(&self, grid: GridSpec) -> Result<ScalarField> {
        let f = ScalarField::sample_interior(grid, |x, y| self.rhs(x, y))?;
        for (i, j) in grid.interior_points() {
            let value = f.at(i, j);
            if value < 0.0 {
                return Err(Error::NegativeRhs { i, j, value });
            }
        }
        Ok(f)
    }

    /// `φ` on boundary nodes, zero inside.
    pub fn sample_boundary(&self, grid: GridSpec) -> Result<ScalarField> {
        let mut out = ScalarField::zeros(grid);
        for (i, j) in grid.boundary_points() {
            let (x, y) = grid.coordinate(i, j);
            out.set(i, j, self.boundary(x, y))?;
        }
        Ok(out)
    }

    pub fn sample_exact(&self, grid: GridSpec) -> Result<ScalarField> {
        if !self.has_exact() {
            return Err(Error::NoExactSolution(self.name.clone()));
        }
        ScalarField::sample(grid, |x, y| self.exact(x, y).unwrap_or(f64::NAN))
    }
}

fn take_param(overrides: &[(&str, f64)], key: &str) -> Option<f64> {
    overrides.iter().rev().find(|(k, _)| *k == key).map(|&(_, v)| v)
}

/// Looks up a catalog problem. Recognised overrides: `eps` for
/// `reg_degenerate`, and `x_min`, `x_max`, `y_min`, `y_max` for every entry.
pub fn catalog(name: &str, overrides: &[(&str, f64)]) -> Result<ProblemSpec> {
    const DOMAIN_KEYS: [&str; 4] = ["x_min", "x_max", "y_min", "y_max"];
    let allows_eps = name == "reg_degenerate";
    for (k, v) in overrides {
        let known = DOMAIN_KEYS.contains(k) || (allows_eps && *k == "eps");
        if !known {
            return Err(Error::InvalidParams(format!(
                "parameter `{k}` is not accepted by problem `{name}`"
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParams(format!("parameter `{k}` must be finite")));
        }
    }
    let unit = Rect::square(0.0, 1.0);
    let centered = Rect::square(-1.0, 1.0);
    let (formula, domain) = match name {
        "standard" => (Formula::Standard, centered),
        "reg_degenerate" => {
            let eps = take_param(overrides, "eps").unwrap_or(0.1);
            if eps < 0.0 {
                return Err(Error::InvalidParams(format!("eps must be ≥ 0, got {eps}")));
            }
            (Formula::Quartic { eps }, centered)
        }
        "trigonometric" => (Formula::Trigonometric, unit),
        "degenerate" => (Formula::Quartic { eps: 0.0 }, centered),
        "constant_ma" => (Formula::ConstantMa, centered),
        "circular" => (Formula::Circular, unit),
        "unbounded" => (Formula::Unbounded, unit),
        "unbounded_trimmed" => (Formula::Unbounded, Rect::square(0.0, 0.99)),
        "abs_x" => (Formula::AbsX, centered),
        _ => return Err(Error::UnknownProblem(name.to_owned())),
    };
    let domain = Rect {
        x_min: take_param(overrides, "x_min").unwrap_or(domain.x_min),
        x_max: take_param(overrides, "x_max").unwrap_or(domain.x_max),
        y_min: take_param(overrides, "y_min").unwrap_or(domain.y_min),
        y_max: take_param(overrides, "y_max").unwrap_or(domain.y_max),
    };
    if !(domain.x_max > domain.x_min && domain.y_max > domain.y_min) {
        return Err(Error::InvalidParams("domain bounds are inverted".to_owned()));
    }
    Ok(ProblemSpec {
        name: name.to_owned(),
        domain,
        formula,
    })
}

/// `max |det D²ũ − f|` over interior nodes, where `ũ` is the exact solution
/// sampled on `grid`.
pub fn verify_consistency(spec: &ProblemSpec, grid: GridSpec) -> Result<f64> {
    let exact = spec.sample_exact(grid)?;
    let det = ma_determinant(&exact);
    let f = spec.sample_rhs(grid)?;
    Ok(grid
        .interior_points()
        .fold(0.0_f64, |m, (i, j)| m.max((det.at(i, j) - f.at(i, j)).abs())))
}
