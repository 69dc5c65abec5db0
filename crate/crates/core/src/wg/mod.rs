//! The weak Galerkin spaces, the discrete weak operator and the stabilizer.

pub mod local;
pub mod projection;
pub mod space;

pub use local::{
    apply_operator, local_stabilizer, local_weak_moments, local_weak_operator, operator_value, stabilizer_energy,
    ElementView, LocalLayout, LocalWeakOp, Quadrature,
};
pub use projection::{apply_weak_operator, project_mh, project_qh};
pub use space::{DofKind, PrimalSpace, PrimalVec, SpaceError, WeakFunctionVec, WgSpace};
