//! Degree-of-freedom layouts for the weak space `W_h` (with its constrained
//! subspace `W_h^0`) and the primal space `M_h`.
//!
//! Global layout of a weak function: all interior blocks `σ₀` (triangle
//! major), then all trace blocks `σ_b` (edge major), then all flux blocks
//! `σ_n` (edge major). `σ_n` is stored against the edge's fixed normal.

use crate::error::{FemError, MeshError};
use crate::fem::dim_p2;
use crate::mesh::{classify_edges, BoundaryConfig, EdgeClass, TriMesh};

#[derive(Clone, Debug)]
pub struct WgSpace {
    k: usize,
    num_triangles: usize,
    num_edges: usize,
    /// Full index → index among free (unconstrained) DOFs.
    free: Vec<Option<usize>>,
    free_to_full: Vec<usize>,
    classes: Vec<EdgeClass>,
}

/// Error building a space.
#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

impl WgSpace {
    /// `W_h^0` for the given boundary configuration: `σ_b = 0` on `Γ_N^c`,
    /// `σ_n = 0` on `Γ_D^c`.
    pub fn new(mesh: &TriMesh, k: usize, bc: &BoundaryConfig) -> Result<Self, SpaceError> {
        if k < 2 {
            return Err(FemError::UnsupportedDegree(k).into());
        }
        let classes = classify_edges(mesh, bc)?;
        Ok(Self::with_mask(mesh, k, classes, true))
    }

    /// The full space `W_h` with no constrained DOFs.
    pub fn unconstrained(mesh: &TriMesh, k: usize) -> Result<Self, SpaceError> {
        if k < 2 {
            return Err(FemError::UnsupportedDegree(k).into());
        }
        let classes = (0..mesh.num_edges())
            .map(|e| EdgeClass { boundary: mesh.is_boundary_edge(e), dirichlet: true, neumann: true })
            .collect();
        Ok(Self::with_mask(mesh, k, classes, false))
    }

    fn with_mask(mesh: &TriMesh, k: usize, classes: Vec<EdgeClass>, constrain: bool) -> Self {
        let mut space = Self {
            k,
            num_triangles: mesh.num_triangles(),
            num_edges: mesh.num_edges(),
            free: Vec::new(),
            free_to_full: Vec::new(),
            classes,
        };
        let mut free = vec![None; space.dim()];
        let mut next = 0;
        for (i, slot) in free.iter_mut().enumerate() {
            if !(constrain && space.is_constrained(i)) {
                *slot = Some(next);
                space.free_to_full.push(i);
                next += 1;
            }
        }
        space.free = free;
        space
    }

    fn is_constrained(&self, full: usize) -> bool {
        match self.locate(full) {
            DofKind::Interior { .. } => false,
            DofKind::Trace { edge, .. } => self.classes[edge].in_neumann_complement(),
            DofKind::Flux { edge, .. } => self.classes[edge].in_dirichlet_complement(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn interior_dim(&self) -> usize {
        dim_p2(self.k)
    }

    pub fn trace_dim(&self) -> usize {
        self.k + 1
    }

    pub fn flux_dim(&self) -> usize {
        self.k
    }

    /// Number of DOFs of the full space `W_h`.
    pub fn dim(&self) -> usize {
        self.num_triangles * self.interior_dim() + self.num_edges * (self.trace_dim() + self.flux_dim())
    }

    /// Number of unconstrained DOFs.
    pub fn num_free(&self) -> usize {
        self.free_to_full.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.num_triangles
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn edge_class(&self, e: usize) -> EdgeClass {
        self.classes[e]
    }

    pub fn interior_offset(&self, t: usize) -> usize {
        t * self.interior_dim()
    }

    pub fn trace_offset(&self, e: usize) -> usize {
        self.num_triangles * self.interior_dim() + e * self.trace_dim()
    }

    pub fn flux_offset(&self, e: usize) -> usize {
        self.num_triangles * self.interior_dim() + self.num_edges * self.trace_dim() + e * self.flux_dim()
    }

    pub fn free_index(&self, full: usize) -> Option<usize> {
        self.free[full]
    }

    pub fn full_index(&self, free: usize) -> usize {
        self.free_to_full[free]
    }

    pub fn locate(&self, full: usize) -> DofKind {
        let n0 = self.num_triangles * self.interior_dim();
        let nb = self.num_edges * self.trace_dim();
        if full < n0 {
            DofKind::Interior { triangle: full / self.interior_dim(), local: full % self.interior_dim() }
        } else if full < n0 + nb {
            let r = full - n0;
            DofKind::Trace { edge: r / self.trace_dim(), local: r % self.trace_dim() }
        } else {
            let r = full - n0 - nb;
            DofKind::Flux { edge: r / self.flux_dim(), local: r % self.flux_dim() }
        }
    }

    /// Full indices of triangle `t`'s local DOFs in element order: `σ₀`,
    /// then `σ_b` on local edges 0..3, then `σ_n` on local edges 0..3.
    pub fn local_dofs(&self, mesh: &TriMesh, t: usize) -> Vec<usize> {
        let mut dofs: Vec<usize> = (0..self.interior_dim()).map(|i| self.interior_offset(t) + i).collect();
        for le in mesh.triangle_edges(t) {
            dofs.extend((0..self.trace_dim()).map(|j| self.trace_offset(le.edge) + j));
        }
        for le in mesh.triangle_edges(t) {
            dofs.extend((0..self.flux_dim()).map(|j| self.flux_offset(le.edge) + j));
        }
        dofs
    }

    pub fn local_dim(&self) -> usize {
        self.interior_dim() + 3 * (self.trace_dim() + self.flux_dim())
    }

    /// Zero every constrained entry of a full vector.
    pub fn apply_constraints(&self, v: &mut WeakFunctionVec) {
        for (x, slot) in v.0.iter_mut().zip(&self.free) {
            if slot.is_none() {
                *x = 0.0;
            }
        }
    }

    pub fn restrict(&self, v: &WeakFunctionVec) -> Vec<f64> {
        self.free_to_full.iter().map(|&i| v.0[i]).collect()
    }

    pub fn extend(&self, free_values: &[f64]) -> WeakFunctionVec {
        let mut v = vec![0.0; self.dim()];
        for (&i, &x) in self.free_to_full.iter().zip(free_values) {
            v[i] = x;
        }
        WeakFunctionVec(v)
    }

    pub fn zeros(&self) -> WeakFunctionVec {
        WeakFunctionVec(vec![0.0; self.dim()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    Interior { triangle: usize, local: usize },
    Trace { edge: usize, local: usize },
    Flux { edge: usize, local: usize },
}

/// Piecewise `P_{k-2}` on each triangle.
#[derive(Clone, Debug)]
pub struct PrimalSpace {
    k: usize,
    num_triangles: usize,
}

impl PrimalSpace {
    pub fn new(mesh: &TriMesh, k: usize) -> Result<Self, FemError> {
        if k < 2 {
            return Err(FemError::UnsupportedDegree(k));
        }
        Ok(Self { k, num_triangles: mesh.num_triangles() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.k - 2
    }

    pub fn block_dim(&self) -> usize {
        dim_p2(self.k - 2)
    }

    pub fn dim(&self) -> usize {
        self.num_triangles * self.block_dim()
    }

    pub fn offset(&self, t: usize) -> usize {
        t * self.block_dim()
    }

    pub fn zeros(&self) -> PrimalVec {
        PrimalVec(vec![0.0; self.dim()])
    }
}

/// Coefficients of a weak function over the full layout of a [`WgSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeakFunctionVec(pub Vec<f64>);

impl WeakFunctionVec {
    pub fn interior<'a>(&'a self, space: &WgSpace, t: usize) -> &'a [f64] {
        let o = space.interior_offset(t);
        &self.0[o..o + space.interior_dim()]
    }

    pub fn trace<'a>(&'a self, space: &WgSpace, e: usize) -> &'a [f64] {
        let o = space.trace_offset(e);
        &self.0[o..o + space.trace_dim()]
    }

    pub fn flux<'a>(&'a self, space: &WgSpace, e: usize) -> &'a [f64] {
        let o = space.flux_offset(e);
        &self.0[o..o + space.flux_dim()]
    }

    pub fn local(&self, space: &WgSpace, mesh: &TriMesh, t: usize) -> Vec<f64> {
        space.local_dofs(mesh, t).into_iter().map(|i| self.0[i]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| c * x).collect())
    }
}

/// Coefficients of a function in `M_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalVec(pub Vec<f64>);

impl PrimalVec {
    pub fn block<'a>(&'a self, space: &PrimalSpace, t: usize) -> &'a [f64] {
        let o = space.offset(t);
        &self.0[o..o + space.block_dim()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square_at_level, Side};

    #[test]
    fn k2_dimensions() {
        let m = unit_square_at_level(2);
        let s = WgSpace::unconstrained(&m, 2).unwrap();
        assert_eq!(s.dim(), 6 * m.num_triangles() + 3 * m.num_edges() + 2 * m.num_edges());
        assert_eq!(s.num_free(), s.dim());
        assert_eq!(PrimalSpace::new(&m, 2).unwrap().dim(), m.num_triangles());
        assert_eq!(PrimalSpace::new(&m, 4).unwrap().dim(), 6 * m.num_triangles());
    }

    #[test]
    fn degree_below_two_rejected() {
        let m = unit_square_at_level(0);
        assert!(WgSpace::unconstrained(&m, 1).is_err());
        assert!(PrimalSpace::new(&m, 1).is_err());
    }

    #[test]
    fn constraints_only_on_boundary() {
        let m = unit_square_at_level(2);
        let bc = BoundaryConfig::new(&[Side::Bottom, Side::Left], &[Side::Bottom]);
        let s = WgSpace::new(&m, 3, &bc).unwrap();
        let mut constrained = 0;
        for i in 0..s.dim() {
            if s.free_index(i).is_none() {
                constrained += 1;
                let edge = match s.locate(i) {
                    DofKind::Trace { edge, .. } => {
                        assert!(s.edge_class(edge).in_neumann_complement());
                        edge
                    }
                    DofKind::Flux { edge, .. } => {
                        assert!(s.edge_class(edge).in_dirichlet_complement());
                        edge
                    }
                    DofKind::Interior { .. } => panic!("interior DOF constrained"),
                };
                assert!(m.is_boundary_edge(edge));
            }
        }
        // Γ_N^c: right, top, left (12 edges × 4); Γ_D^c: right, top (8 edges × 3)
        assert_eq!(constrained, 12 * 4 + 8 * 3);
        assert_eq!(s.num_free() + constrained, s.dim());
    }

    #[test]
    fn extend_restrict_and_mask() {
        let m = unit_square_at_level(1);
        let bc = BoundaryConfig::new(&[Side::Bottom], &[Side::Bottom]);
        let s = WgSpace::new(&m, 2, &bc).unwrap();
        let mut v = WeakFunctionVec((0..s.dim()).map(|i| i as f64 + 1.0).collect());
        s.apply_constraints(&mut v);
        for e in 0..m.num_edges() {
            let c = s.edge_class(e);
            if c.in_neumann_complement() {
                assert!(v.trace(&s, e).iter().all(|&x| x == 0.0));
            }
            if c.in_dirichlet_complement() {
                assert!(v.flux(&s, e).iter().all(|&x| x == 0.0));
            }
        }
        assert_eq!(s.extend(&s.restrict(&v)), v);
    }

    #[test]
    fn each_edge_block_shared_by_at_most_two_elements() {
        let m = unit_square_at_level(2);
        let s = WgSpace::unconstrained(&m, 2).unwrap();
        let mut count = vec![0usize; s.dim()];
        for t in 0..m.num_triangles() {
            for i in s.local_dofs(&m, t) {
                count[i] += 1;
            }
        }
        for (i, &c) in count.iter().enumerate() {
            match s.locate(i) {
                DofKind::Interior { .. } => assert_eq!(c, 1),
                _ => assert!(c == 1 || c == 2),
            }
        }
    }
}
