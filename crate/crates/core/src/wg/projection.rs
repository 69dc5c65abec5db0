//! Global projections `Q_h` onto `W_h` and `𝒬_h^{k-2}` onto `M_h`.

use super::local::{local_weak_operator, ElementView, Quadrature};
use super::space::{PrimalSpace, PrimalVec, WeakFunctionVec, WgSpace};
use crate::error::FemError;
use crate::fem::{project_edge, project_tri, TensorField, TriGeom};
use crate::mesh::{Point, TriMesh};

/// `Q_h w = {Q₀w, Q_b w, Q_n(a∇w·n_e)}` with the flux taken against each
/// edge's stored normal. Constrained DOFs of `space` are left at zero.
pub fn project_qh(
    w: impl Fn(&Point) -> f64,
    grad_w: impl Fn(&Point) -> Point,
    a: &TensorField,
    mesh: &TriMesh,
    space: &WgSpace,
    quad: &Quadrature,
) -> Result<WeakFunctionVec, FemError> {
    let k = space.k();
    let mut v = space.zeros();
    for t in 0..mesh.num_triangles() {
        let c = project_tri(&w, &TriGeom::of(mesh, t), k, &quad.volume)?;
        let o = space.interior_offset(t);
        v.0[o..o + c.len()].copy_from_slice(&c);
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [p0, p1] = mesh.edge_points(e);
        let b = project_edge(&w, p0, p1, k, &quad.edge)?;
        let o = space.trace_offset(e);
        v.0[o..o + b.len()].copy_from_slice(&b);
        let n = project_edge(|p| (a.at(p) * grad_w(p)).dot(&edge.normal), p0, p1, k - 1, &quad.edge)?;
        let o = space.flux_offset(e);
        v.0[o..o + n.len()].copy_from_slice(&n);
    }
    space.apply_constraints(&mut v);
    Ok(v)
}

/// Elementwise L² projection onto `P_{k-2}(T)`.
pub fn project_mh(
    w: impl Fn(&Point) -> f64,
    mesh: &TriMesh,
    space: &PrimalSpace,
    quad: &Quadrature,
) -> Result<PrimalVec, FemError> {
    let mut v = space.zeros();
    for t in 0..mesh.num_triangles() {
        let c = project_tri(&w, &TriGeom::of(mesh, t), space.degree(), &quad.volume)?;
        let o = space.offset(t);
        v.0[o..o + c.len()].copy_from_slice(&c);
    }
    Ok(v)
}

/// `ℒ_w σ` on every element, as a member of `M_h`.
pub fn apply_weak_operator(
    sigma: &WeakFunctionVec,
    a: &TensorField,
    mesh: &TriMesh,
    space: &WgSpace,
    primal: &PrimalSpace,
    quad: &Quadrature,
) -> Result<PrimalVec, FemError> {
    let mut out = primal.zeros();
    for t in 0..mesh.num_triangles() {
        let op = local_weak_operator(&ElementView::of(mesh, t), a, space.k(), quad)?;
        let c = op.apply(&sigma.local(space, mesh, t));
        let o = primal.offset(t);
        out.0[o..o + c.len()].copy_from_slice(&c);
    }
    Ok(out)
}
