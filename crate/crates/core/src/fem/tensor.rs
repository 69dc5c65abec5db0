//! Diffusion tensors `a(x)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::error::FemError;
use crate::mesh::Point;

type MatrixFn = dyn Fn(&Point) -> Matrix2<f64> + Send + Sync;
type VectorFn = dyn Fn(&Point) -> Point + Send + Sync;

/// Symmetric, uniformly positive definite coefficient tensor together with
/// its row divergences `(∂x a11 + ∂y a12, ∂x a21 + ∂y a22)`.
#[derive(Clone)]
pub struct TensorField {
    value: Arc<MatrixFn>,
    divergence: Arc<VectorFn>,
    constant: bool,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField").field("constant", &self.constant).finish_non_exhaustive()
    }
}

impl TensorField {
    pub fn new(
        value: impl Fn(&Point) -> Matrix2<f64> + Send + Sync + 'static,
        divergence: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), divergence: Arc::new(divergence), constant: false }
    }

    pub fn constant(m: Matrix2<f64>) -> Self {
        Self { value: Arc::new(move |_| m), divergence: Arc::new(|_| Point::zeros()), constant: true }
    }

    pub fn identity() -> Self {
        Self::constant(Matrix2::identity())
    }

    /// `[1+x², xy/4; xy/4, 1+y²]`.
    pub fn quadratic_anisotropic() -> Self {
        Self::new(
            |p| {
                let off = 0.25 * p.x * p.y;
                Matrix2::new(1.0 + p.x * p.x, off, off, 1.0 + p.y * p.y)
            },
            // ∂x(1+x²) + ∂y(xy/4), ∂x(xy/4) + ∂y(1+y²)
            |p| Point::new(2.25 * p.x, 2.25 * p.y),
        )
    }

    pub fn at(&self, p: &Point) -> Matrix2<f64> {
        (self.value)(p)
    }

    pub fn divergence(&self, p: &Point) -> Point {
        (self.divergence)(p)
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// Check symmetry and positive definiteness at the given points.
    pub fn check_spd<'a>(&self, points: impl IntoIterator<Item = &'a Point>) -> Result<(), FemError> {
        for p in points {
            let m = self.at(p);
            let eig = SymmetricEigen::new(m).eigenvalues.min();
            if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-14 * m.norm() || eig <= 0.0 {
                return Err(FemError::NotPositiveDefinite { x: p.x, y: p.y, eigenvalue: eig });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anisotropic_tensor_is_spd_on_square() {
        let a = TensorField::quadratic_anisotropic();
        let pts: Vec<Point> =
            (0..=10).flat_map(|i| (0..=10).map(move |j| Point::new(i as f64 / 10.0, j as f64 / 10.0))).collect();
        a.check_spd(&pts).unwrap();
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let a = TensorField::quadratic_anisotropic();
        let p = Point::new(0.3, 0.8);
        let h = 1e-6;
        let dx = (a.at(&(p + Point::new(h, 0.0))) - a.at(&(p - Point::new(h, 0.0)))) / (2.0 * h);
        let dy = (a.at(&(p + Point::new(0.0, h))) - a.at(&(p - Point::new(0.0, h)))) / (2.0 * h);
        let fd = Point::new(dx[(0, 0)] + dy[(0, 1)], dx[(1, 0)] + dy[(1, 1)]);
        assert!((fd - a.divergence(&p)).norm() < 1e-8);
    }

    #[test]
    fn indefinite_tensor_rejected() {
        let a = TensorField::constant(Matrix2::new(1.0, 2.0, 2.0, 1.0));
        assert!(a.check_spd(&[Point::new(0.5, 0.5)]).is_err());
    }
}
