//! Manufactured solutions and the boundary configurations they are run with.
//!
//! Each solution carries hand-derived first and second derivatives; the
//! source is `f = -(a : ∇²u + (∇·a)·∇u)` assembled from those closed forms
//! and the tensor. [`validate_case`] checks the algebra against central
//! differences of `a∇u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::CaseError;
use crate::fem::TensorField;
use crate::field::{FluxFn, ScalarFn, VectorFn};
use crate::mesh::{BoundaryConfig, Point, Side};
use crate::system::LoadData;

/// What the convergence table for a case is expected to look like.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The exact solution lies in the discrete space; errors at round-off.
    MachineAccuracy,
    /// Dirichlet and Neumann data on disjoint sides.
    MixedBoundary,
    /// Overlapping Cauchy data on part of the boundary.
    Cauchy,
    /// Cauchy data where only the primal error is tabulated. With data on
    /// every side, `ℒλ = 0` has nontrivial solutions satisfying the
    /// multiplier's boundary conditions, so `λ_h` is not expected to vanish.
    CauchyPrimal,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::MachineAccuracy => "machine-accuracy",
            Regime::MixedBoundary => "mixed",
            Regime::Cauchy => "cauchy",
            Regime::CauchyPrimal => "cauchy-primal",
        })
    }
}

pub type HessianFn = Arc<dyn Fn(&Point) -> Matrix2<f64> + Send + Sync>;

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    /// Human-readable formula for `u`.
    pub formula: &'static str,
    pub u: ScalarFn,
    pub grad_u: VectorFn,
    pub hess_u: HessianFn,
    pub a: TensorField,
    pub f: ScalarFn,
    pub bc: BoundaryConfig,
    /// Ordinal of the published table this case reproduces.
    pub table: u32,
    pub regime: Regime,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("formula", &self.formula)
            .field("bc", &self.bc)
            .field("table", &self.table)
            .field("regime", &self.regime)
            .finish()
    }
}

impl ManufacturedCase {
    /// `f`, `g₁ = u` and `g₂ = a∇u·n`.
    pub fn load_data(&self) -> LoadData {
        let g1 = self.u.clone();
        let (grad, a) = (self.grad_u.clone(), self.a.clone());
        let g2: FluxFn = Arc::new(move |p, n| (a.at(p) * grad(p)).dot(n));
        LoadData { f: self.f.clone(), g1, g2 }
    }

    /// `a∇u` at `p`.
    pub fn flux(&self, p: &Point) -> Point {
        self.a.at(p) * (self.grad_u)(p)
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.a.is_constant()
    }
}

struct Solution {
    formula: &'static str,
    u: fn(f64, f64) -> f64,
    grad: fn(f64, f64) -> [f64; 2],
    /// `[u_xx, u_xy, u_yy]`
    hess: fn(f64, f64) -> [f64; 3],
}

const ONE: Solution = Solution { formula: "1", u: |_, _| 1.0, grad: |_, _| [0.0, 0.0], hess: |_, _| [0.0; 3] };

const SIN_SIN: Solution = Solution {
    formula: "sin(x) sin(y)",
    u: |x, y| x.sin() * y.sin(),
    grad: |x, y| [x.cos() * y.sin(), x.sin() * y.cos()],
    hess: |x, y| [-x.sin() * y.sin(), x.cos() * y.cos(), -x.sin() * y.sin()],
};

const SIN_COS: Solution = Solution {
    formula: "sin(x) cos(y)",
    u: |x, y| x.sin() * y.cos(),
    grad: |x, y| [x.cos() * y.cos(), -x.sin() * y.sin()],
    hess: |x, y| [-x.sin() * y.cos(), -x.cos() * y.sin(), -x.sin() * y.cos()],
};

const COS_COS: Solution = Solution {
    formula: "cos(x) cos(y)",
    u: |x, y| x.cos() * y.cos(),
    grad: |x, y| [-x.sin() * y.cos(), -x.cos() * y.sin()],
    hess: |x, y| [-x.cos() * y.cos(), x.sin() * y.sin(), -x.cos() * y.cos()],
};

const SINPI_COSPI: Solution = Solution {
    formula: "sin(pi x) cos(pi y)",
    u: |x, y| (PI * x).sin() * (PI * y).cos(),
    grad: |x, y| [PI * (PI * x).cos() * (PI * y).cos(), -PI * (PI * x).sin() * (PI * y).sin()],
    hess: |x, y| {
        let p2 = PI * PI;
        [
            -p2 * (PI * x).sin() * (PI * y).cos(),
            -p2 * (PI * x).cos() * (PI * y).sin(),
            -p2 * (PI * x).sin() * (PI * y).cos(),
        ]
    },
};

const SINPI_SINPI: Solution = Solution {
    formula: "sin(pi x) sin(pi y)",
    u: |x, y| (PI * x).sin() * (PI * y).sin(),
    grad: |x, y| [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()],
    hess: |x, y| {
        let p2 = PI * PI;
        [
            -p2 * (PI * x).sin() * (PI * y).sin(),
            p2 * (PI * x).cos() * (PI * y).cos(),
            -p2 * (PI * x).sin() * (PI * y).sin(),
        ]
    },
};

const BUBBLE: Solution = Solution {
    formula: "x y (1-x) (1-y)",
    u: |x, y| x * y * (1.0 - x) * (1.0 - y),
    grad: |x, y| [(1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y)],
    hess: |x, y| [-2.0 * (y - y * y), (1.0 - 2.0 * x) * (1.0 - 2.0 * y), -2.0 * (x - x * x)],
};

const EXP_XY: Solution = Solution {
    formula: "exp(x y)",
    u: |x, y| (x * y).exp(),
    grad: |x, y| {
        let e = (x * y).exp();
        [y * e, x * e]
    },
    hess: |x, y| {
        let e = (x * y).exp();
        [y * y * e, (1.0 + x * y) * e, x * x * e]
    },
};

#[derive(Clone, Copy)]
enum Coef {
    Identity,
    Variable,
}

fn build(
    name: &'static str,
    sol: &Solution,
    coef: Coef,
    bc: BoundaryConfig,
    table: u32,
    regime: Regime,
) -> ManufacturedCase {
    let a = match coef {
        Coef::Identity => TensorField::identity(),
        Coef::Variable => TensorField::quadratic_anisotropic(),
    };
    let (uf, gf, hf) = (sol.u, sol.grad, sol.hess);
    let u: ScalarFn = Arc::new(move |p| uf(p.x, p.y));
    let grad_u: VectorFn = Arc::new(move |p| {
        let g = gf(p.x, p.y);
        Point::new(g[0], g[1])
    });
    let hess_u: HessianFn = Arc::new(move |p| {
        let h = hf(p.x, p.y);
        Matrix2::new(h[0], h[1], h[1], h[2])
    });
    let f: ScalarFn = {
        let (a, grad_u, hess_u) = (a.clone(), grad_u.clone(), hess_u.clone());
        Arc::new(move |p| -(a.at(p).component_mul(&hess_u(p)).sum() + a.divergence(p).dot(&grad_u(p))))
    };
    ManufacturedCase { name, formula: sol.formula, u, grad_u, hess_u, a, f, bc, table, regime }
}

fn bc(d: &[Side], n: &[Side]) -> BoundaryConfig {
    BoundaryConfig::new(d, n)
}

fn catalog() -> Vec<ManufacturedCase> {
    use Coef::*;
    use Regime::*;
    use Side::*;

    let bottom = bc(&[Bottom], &[Bottom]);
    let left = bc(&[Left], &[Left]);
    let mixed = bc(&[Bottom, Top], &[Left, Right]);
    let tb_d_left = bc(&[Bottom, Top, Left], &[Bottom, Top]);
    let tb = bc(&[Bottom, Top], &[Bottom, Top]);
    let tb_n_left = bc(&[Bottom, Top], &[Bottom, Top, Left]);
    let four_sides = bc(&[Bottom, Top, Left], &[Bottom, Top, Right]);

    vec![
        build("constant_one", &ONE, Identity, bottom, 1, MachineAccuracy),
        build("constant_one_left", &ONE, Identity, left, 2, MachineAccuracy),
        build("sin_sin_varcoef", &SIN_SIN, Variable, mixed.clone(), 3, MixedBoundary),
        build("sinpi_cospi_varcoef", &SINPI_COSPI, Variable, mixed.clone(), 4, MixedBoundary),
        build("bubble_varcoef", &BUBBLE, Variable, mixed.clone(), 5, MixedBoundary),
        build("exp_xy_varcoef", &EXP_XY, Variable, mixed, 6, MixedBoundary),
        build("sin_sin_cauchy", &SIN_SIN, Identity, tb_d_left.clone(), 7, Cauchy),
        build("cos_cos_cauchy", &COS_COS, Identity, tb_d_left.clone(), 8, Cauchy),
        build("bubble_cauchy", &BUBBLE, Identity, tb_d_left.clone(), 9, Cauchy),
        build("exp_xy_cauchy", &EXP_XY, Identity, tb_d_left.clone(), 10, Cauchy),
        build("sinpi_sinpi_cauchy", &SINPI_SINPI, Identity, tb.clone(), 11, Cauchy),
        build("bubble_cauchy_tb", &BUBBLE, Identity, tb.clone(), 12, Cauchy),
        build("exp_xy_varcoef_tb", &EXP_XY, Variable, tb, 13, Cauchy),
        build("sin_cos_varcoef_nleft", &SIN_COS, Variable, tb_n_left.clone(), 14, Cauchy),
        build("exp_xy_varcoef_nleft", &EXP_XY, Variable, tb_n_left, 15, Cauchy),
        build("bubble_case8", &BUBBLE, Identity, tb_d_left.clone(), 16, Cauchy),
        build("exp_xy_case8", &EXP_XY, Identity, tb_d_left, 17, Cauchy),
        build("suite_sin_cos", &SIN_COS, Variable, four_sides.clone(), 18, CauchyPrimal),
        build("suite_sinpi_sinpi", &SINPI_SINPI, Variable, four_sides.clone(), 18, CauchyPrimal),
        build("suite_sin_sin", &SIN_SIN, Variable, four_sides.clone(), 18, CauchyPrimal),
        build("suite_exp_xy", &EXP_XY, Variable, four_sides, 18, CauchyPrimal),
    ]
}

/// Every catalog case, in table order.
pub fn list_cases() -> Vec<ManufacturedCase> {
    catalog()
}

pub fn case_names() -> Vec<&'static str> {
    catalog().iter().map(|c| c.name).collect()
}

pub fn get_case(name: &str) -> Result<ManufacturedCase, CaseError> {
    catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| CaseError::Unknown { name: name.to_string(), available: case_names().join(", ") })
}

/// Finite-difference step used by [`validate_case`].
pub const FD_STEP: f64 = 1e-5;
/// Largest tolerated deviation between `f` (or `g₂`) and its oracle.
pub const FD_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: &'static str,
    /// `max |f + ∇·(a∇u)|` with the divergence by central differences.
    pub source_deviation: f64,
    /// `max |∇u - ∇_FD u|` over interior samples.
    pub gradient_deviation: f64,
    /// `max |g₂ - a∇_FD u·n|` over boundary samples on the Neumann sides.
    pub flux_deviation: f64,
    pub samples: usize,
}

impl ValidationReport {
    pub fn max_deviation(&self) -> f64 {
        self.source_deviation.max(self.gradient_deviation).max(self.flux_deviation)
    }
}

/// A deterministic low-discrepancy point set in `(δ, 1-δ)²`.
fn sample_points(n: usize) -> Vec<Point> {
    let g = 1.324_717_957_244_746; // plastic number
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    let margin = 0.05;
    (1..=n)
        .map(|i| {
            let s = (0.5 + a1 * i as f64).fract();
            let t = (0.5 + a2 * i as f64).fract();
            Point::new(margin + (1.0 - 2.0 * margin) * s, margin + (1.0 - 2.0 * margin) * t)
        })
        .collect()
}

fn side_point(side: Side, s: f64) -> Point {
    match side {
        Side::Bottom => Point::new(s, 0.0),
        Side::Right => Point::new(1.0, s),
        Side::Top => Point::new(s, 1.0),
        Side::Left => Point::new(0.0, s),
    }
}

/// Check `f`, `∇u` and `g₂` against central differences at 20 interior
/// points and 5 points on each Neumann side.
pub fn validate_case(case: &ManufacturedCase) -> Result<ValidationReport, CaseError> {
    let h = FD_STEP;
    let dx = Point::new(h, 0.0);
    let dy = Point::new(0.0, h);
    let fd_grad = |p: &Point| {
        Point::new(
            ((case.u)(&(p + dx)) - (case.u)(&(p - dx))) / (2.0 * h),
            ((case.u)(&(p + dy)) - (case.u)(&(p - dy))) / (2.0 * h),
        )
    };
    let points = sample_points(20);
    let mut source_deviation = 0.0_f64;
    let mut gradient_deviation = 0.0_f64;
    for p in &points {
        let div = (case.flux(&(p + dx)).x - case.flux(&(p - dx)).x) / (2.0 * h)
            + (case.flux(&(p + dy)).y - case.flux(&(p - dy)).y) / (2.0 * h);
        source_deviation = source_deviation.max(((case.f)(p) + div).abs());
        gradient_deviation = gradient_deviation.max(((case.grad_u)(p) - fd_grad(p)).abs().max());
    }
    let load = case.load_data();
    let mut flux_deviation = 0.0_f64;
    let mut samples = points.len();
    for &side in &case.bc.neumann {
        let n = side.outward_normal();
        for i in 0..5 {
            let p = side_point(side, (i as f64 + 0.5) / 5.0);
            // One-sided at the boundary: step inward along the normal only.
            let t = Point::new(n.y, -n.x);
            let dn = ((case.u)(&p) - (case.u)(&(p - n * h))) / h;
            let dn2 = ((case.u)(&p) - (case.u)(&(p - n * (2.0 * h)))) / (2.0 * h);
            let normal_derivative = 2.0 * dn - dn2;
            let tangential = ((case.u)(&(p + t * h)) - (case.u)(&(p - t * h))) / (2.0 * h);
            let g = normal_derivative * n + tangential * t;
            let oracle = (case.a.at(&p) * g).dot(&n);
            flux_deviation = flux_deviation.max(((load.g2)(&p, &n) - oracle).abs());
            samples += 1;
        }
    }
    let report = ValidationReport { name: case.name, source_deviation, gradient_deviation, flux_deviation, samples };
    if report.max_deviation() > FD_TOLERANCE {
        return Err(CaseError::Inconsistent {
            name: case.name.to_string(),
            deviation: report.max_deviation(),
            tolerance: FD_TOLERANCE,
        });
    }
    Ok(report)
}
