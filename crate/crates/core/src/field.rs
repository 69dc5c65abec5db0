//! Shared callback types for scalar and vector fields on the plane.

use std::sync::Arc;

use crate::mesh::Point;

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
/// Boundary data depending on the point and the outward unit normal there.
pub type FluxFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;
