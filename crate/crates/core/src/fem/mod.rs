//! Polynomial bases, quadrature, local projections and coefficient tensors.

pub mod basis;
pub mod projection;
pub mod quadrature;
pub mod tensor;

pub use basis::{dim_p2, exponents, EdgeBasis, TriBasis, TriGeom};
pub use projection::{edge_mass, project_edge, project_tri, tri_mass};
pub use quadrature::{edge_quadrature, tri_quadrature, QuadRule};
pub use tensor::TensorField;
