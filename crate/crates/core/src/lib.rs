//! Primal-dual weak Galerkin finite elements for the elliptic Cauchy problem
//!
//! ```text
//! -∇·(a∇u) = f   in Ω = (0,1)²
//!        u = g₁  on Γ_D
//!   a∇u·n = g₂  on Γ_N
//! ```
//!
//! The scheme seeks `(u_h, λ_h) ∈ M_h × W_h^0` from the symmetric saddle-point
//! system `s(λ_h, σ) + b(u_h, σ) = -(f,σ₀) - <g₂,σ_b>_Γ_N + <g₁,σ_n>_Γ_D` and
//! `b(v, λ_h) = 0`, where `λ_h` is a Lagrange multiplier that tends to zero.
//!
//! Modules, bottom-up: [`mesh`], [`fem`], [`wg`], [`system`], [`problems`],
//! [`analysis`], [`study`].

pub mod analysis;
pub mod error;
pub mod fem;
pub mod field;
pub mod mesh;
pub mod problems;
pub mod study;
pub mod system;
pub mod wg;

pub use analysis::{ConvergenceReport, ErrorRow};
pub use error::{AnalysisError, CaseError, ConfigError, FemError, MeshError, SystemError};
pub use fem::TensorField;
pub use mesh::{BoundaryConfig, Point, Side, TriMesh};
pub use problems::{get_case, list_cases, ManufacturedCase};
pub use system::{assemble, solve, LoadData, SaddleSystem, Solution};
pub use wg::{PrimalSpace, PrimalVec, WeakFunctionVec, WgSpace};
