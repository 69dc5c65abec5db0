//! Local L² projections onto polynomial spaces.

use nalgebra::{DMatrix, DVector};

use super::basis::{EdgeBasis, TriBasis, TriGeom};
use super::quadrature::QuadRule;
use crate::error::FemError;
use crate::mesh::Point;

/// Mass matrix `(φ_i, φ_j)_T`.
pub fn tri_mass(basis: &TriBasis, geom: &TriGeom, rule: &QuadRule) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (p, w) in rule.map_triangle(&geom.points) {
        let v = DVector::from_vec(basis.values(&p));
        m.ger(w, &v, &v, 1.0);
    }
    m
}

/// Mass matrix `<ψ_i, ψ_j>_e`.
pub fn edge_mass(basis: &EdgeBasis, a: Point, b: Point, rule: &QuadRule) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (p, w) in rule.map_segment(a, b) {
        let v = DVector::from_vec(basis.values(&p));
        m.ger(w, &v, &v, 1.0);
    }
    m
}

pub(crate) fn solve_spd(m: DMatrix<f64>, rhs: DVector<f64>, degree: usize) -> Result<Vec<f64>, FemError> {
    let chol = m.cholesky().ok_or(FemError::SingularMass { degree })?;
    Ok(chol.solve(&rhs).as_slice().to_vec())
}

/// Coefficients of the L² projection of `f` onto `P_degree(T)` in the
/// scaled monomial basis of `T`.
pub fn project_tri(
    f: impl Fn(&Point) -> f64,
    geom: &TriGeom,
    degree: usize,
    rule: &QuadRule,
) -> Result<Vec<f64>, FemError> {
    let basis = TriBasis::new(geom, degree);
    let mut load = DVector::zeros(basis.len());
    for (p, w) in rule.map_triangle(&geom.points) {
        let fv = f(&p);
        for (l, v) in load.iter_mut().zip(basis.values(&p)) {
            *l += w * fv * v;
        }
    }
    solve_spd(tri_mass(&basis, geom, rule), load, degree)
}

/// Coefficients of the L² projection of `f` onto `P_degree(e)` for the edge
/// `a → b`, in the edge's scaled monomial basis.
pub fn project_edge(
    f: impl Fn(&Point) -> f64,
    a: Point,
    b: Point,
    degree: usize,
    rule: &QuadRule,
) -> Result<Vec<f64>, FemError> {
    let basis = EdgeBasis::new(a, b, degree);
    let mut load = DVector::zeros(basis.len());
    for (p, w) in rule.map_segment(a, b) {
        let fv = f(&p);
        for (l, v) in load.iter_mut().zip(basis.values(&p)) {
            *l += w * fv * v;
        }
    }
    solve_spd(edge_mass(&basis, a, b, rule), load, degree)
}
