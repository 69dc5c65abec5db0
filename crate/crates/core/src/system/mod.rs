//! Global saddle-point system
//!
//! ```text
//! [ S  Bᵀ ] [ λ ]   [ F ]
//! [ B  0  ] [ u ] = [ 0 ]
//! ```
//!
//! with `S` the stabilizer on the free DOFs of `W_h^0`, `B` the coupling
//! `b(v, σ) = Σ_T (v, ℒ_w σ)_T`, and
//! `F(σ) = -(f, σ₀) - <g₂, σ_b>_Γ_N + <g₁, σ_n>_Γ_D`.

mod sparse;

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

pub use sparse::SparseMatrix;

use crate::analysis::{edge_jumps, edge_scale, mh_norm_terms};
use crate::error::SystemError;
use crate::fem::{project_edge, project_tri, TensorField, TriBasis, TriGeom};
use crate::field::{FluxFn, ScalarFn};
use crate::mesh::{BoundaryConfig, Point, TriMesh};
use crate::wg::{
    local_stabilizer, local_weak_moments, operator_value, ElementView, LocalLayout, PrimalSpace, PrimalVec, Quadrature,
    WeakFunctionVec, WgSpace,
};

/// Source term and Cauchy data.
#[derive(Clone)]
pub struct LoadData {
    pub f: ScalarFn,
    /// Dirichlet data on `Γ_D`.
    pub g1: ScalarFn,
    /// Neumann data `a∇u·n` on `Γ_N`, given the outward normal.
    pub g2: FluxFn,
}

impl LoadData {
    pub fn zero() -> Self {
        Self { f: std::sync::Arc::new(|_| 0.0), g1: std::sync::Arc::new(|_| 0.0), g2: std::sync::Arc::new(|_, _| 0.0) }
    }
}

#[derive(Clone, Debug)]
pub struct SaddleSystem {
    /// `n_λ × n_λ`, free DOFs of `W_h^0`.
    pub stabilizer: SparseMatrix,
    /// `n_u × n_λ`.
    pub coupling: SparseMatrix,
    /// Length `n_λ`.
    pub rhs: Vec<f64>,
    pub space: WgSpace,
    pub primal: PrimalSpace,
    /// Non-fatal configuration problems found during assembly.
    pub warnings: Vec<String>,
}

/// Solution of the saddle-point system.
#[derive(Clone, Debug)]
pub struct Solution {
    pub lambda: WeakFunctionVec,
    pub u: PrimalVec,
    /// `‖Ax - b‖ / ‖b‖`, or `‖Ax‖` when `b = 0`.
    pub residual: f64,
}

impl SaddleSystem {
    pub fn n_lambda(&self) -> usize {
        self.stabilizer.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_lambda() + self.n_u()
    }

    /// The symmetric block matrix `[S Bᵀ; B 0]`.
    pub fn full_matrix(&self) -> SparseMatrix {
        let nl = self.n_lambda();
        let mut t: Vec<(usize, usize, f64)> = self.stabilizer.iter().collect();
        for (i, j, v) in self.coupling.iter() {
            t.push((nl + i, j, v));
            t.push((j, nl + i, v));
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), t)
    }

    /// `[F; 0]`.
    pub fn full_rhs(&self) -> Vec<f64> {
        let mut b = self.rhs.clone();
        b.resize(self.dim(), 0.0);
        b
    }

    pub fn factorize(&self) -> Result<FactorizedSystem, SystemError> {
        FactorizedSystem::new(self.full_matrix())
    }

    /// Split a vector over `[λ_free; u]` into full-layout components.
    pub fn split(&self, x: &[f64]) -> (WeakFunctionVec, PrimalVec) {
        let nl = self.n_lambda();
        (self.space.extend(&x[..nl]), PrimalVec(x[nl..].to_vec()))
    }
}

/// Sparse LU factors (partial pivoting) of the full saddle-point matrix.
pub struct FactorizedSystem {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl FactorizedSystem {
    pub fn new(matrix: SparseMatrix) -> Result<Self, SystemError> {
        let triplets: Vec<Triplet<usize, usize, f64>> = matrix.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(matrix.nrows(), matrix.ncols(), &triplets)
            .map_err(|e| SystemError::Factorization(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| SystemError::Factorization(format!("{e:?}")))?;
        Ok(Self { matrix, lu })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Solve `A x = b`, returning `x` and the relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64), SystemError> {
        use faer::prelude::Solve;
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let sol = self.lu.solve(&rhs);
        let x: Vec<f64> = (0..b.len()).map(|i| sol[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SystemError::NonFinite);
        }
        let ax = self.matrix.mul_vec(&x);
        let r = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((x, if nb > 0.0 { r / nb } else { r }))
    }
}

/// Assemble the saddle-point system for `space` (which carries the `W_h^0`
/// constraints of `bc`).
pub fn assemble(
    space: &WgSpace,
    primal: &PrimalSpace,
    mesh: &TriMesh,
    a: &TensorField,
    load: &LoadData,
    bc: &BoundaryConfig,
    quad: &Quadrature,
) -> Result<SaddleSystem, SystemError> {
    if space.num_triangles() != mesh.num_triangles()
        || space.num_edges() != mesh.num_edges()
        || primal.dim() != mesh.num_triangles() * primal.block_dim()
    {
        return Err(SystemError::DimensionMismatch(format!(
            "space built for {} triangles / {} edges, mesh has {} / {}",
            space.num_triangles(),
            space.num_edges(),
            mesh.num_triangles(),
            mesh.num_edges()
        )));
    }
    if space.k() != primal.k() {
        return Err(SystemError::DimensionMismatch(format!(
            "weak space degree {} but primal degree {}",
            space.k(),
            primal.k()
        )));
    }
    let k = space.k();
    let layout = LocalLayout { k };
    let mut warnings = Vec::new();
    if bc.is_empty() {
        let probe = [Point::new(0.5, 0.0), Point::new(1.0, 0.5), Point::new(0.5, 1.0), Point::new(0.0, 0.5)];
        let nonzero = probe
            .iter()
            .zip(crate::mesh::Side::ALL)
            .any(|(p, s)| (load.g1)(p) != 0.0 || (load.g2)(p, &s.outward_normal()) != 0.0);
        if nonzero {
            warnings.push("no Dirichlet or Neumann sides configured; boundary data is ignored".to_string());
        }
    }

    let mut s_trip = Vec::new();
    let mut b_trip = Vec::new();
    let mut rhs = vec![0.0; space.num_free()];

    for t in 0..mesh.num_triangles() {
        let elem = ElementView::of(mesh, t);
        let free: Vec<Option<usize>> = space.local_dofs(mesh, t).into_iter().map(|i| space.free_index(i)).collect();
        let s_loc = local_stabilizer(&elem, a, k, quad);
        for (i, fi) in free.iter().enumerate() {
            let Some(fi) = *fi else { continue };
            for (j, fj) in free.iter().enumerate() {
                if let Some(fj) = *fj {
                    let v = s_loc[(i, j)];
                    if v != 0.0 {
                        s_trip.push((fi, fj, v));
                    }
                }
            }
        }
        let moments = local_weak_moments(&elem, a, k, quad);
        for r in 0..moments.nrows() {
            let row = primal.offset(t) + r;
            for (j, fj) in free.iter().enumerate() {
                if let Some(fj) = *fj {
                    let v = moments[(r, j)];
                    if v != 0.0 {
                        b_trip.push((row, fj, v));
                    }
                }
            }
        }

        let basis = TriBasis::new(&elem.geom, k);
        for (p, w) in quad.volume.map_triangle(&elem.geom.points) {
            let fv = (load.f)(&p);
            for (j, phi) in basis.values(&p).iter().enumerate() {
                if let Some(fj) = free[j] {
                    rhs[fj] -= w * fv * phi;
                }
            }
        }

        for (li, (le, view)) in mesh.triangle_edges(t).iter().zip(&elem.edges).enumerate() {
            if !mesh.is_boundary_edge(le.edge) {
                continue;
            }
            let class = space.edge_class(le.edge);
            let (bb, bn) = (view.basis(k), view.basis(k - 1));
            for (p, w) in quad.edge.map_segment(view.endpoints[0], view.endpoints[1]) {
                if class.neumann {
                    let g2 = (load.g2)(&p, &view.normal);
                    for (j, v) in bb.values(&p).iter().enumerate() {
                        if let Some(fj) = free[layout.trace_offset(li) + j] {
                            rhs[fj] -= w * g2 * v;
                        }
                    }
                }
                if class.dirichlet {
                    let g1 = (load.g1)(&p);
                    for (j, v) in bn.values(&p).iter().enumerate() {
                        if let Some(fj) = free[layout.flux_offset(li) + j] {
                            rhs[fj] += w * g1 * view.sign * v;
                        }
                    }
                }
            }
        }
    }

    let nl = space.num_free();
    Ok(SaddleSystem {
        stabilizer: SparseMatrix::from_triplets(nl, nl, s_trip),
        coupling: SparseMatrix::from_triplets(primal.dim(), nl, b_trip),
        rhs,
        space: space.clone(),
        primal: primal.clone(),
        warnings,
    })
}

/// Factorize and solve the assembled system.
pub fn solve(sys: &SaddleSystem) -> Result<Solution, SystemError> {
    let fact = sys.factorize()?;
    let (x, residual) = fact.solve(&sys.full_rhs())?;
    let (lambda, u) = sys.split(&x);
    Ok(Solution { lambda, u, residual })
}

/// Constructive inf-sup witness for `v ∈ M_h`.
#[derive(Clone, Debug)]
pub struct Witness {
    /// `ρ_v ∈ W_h^0`.
    pub rho: WeakFunctionVec,
    /// `b(v, ρ_v)`.
    pub lhs: f64,
    /// `|||v|||₁²` restricted to the terms whose witness component survives
    /// the `W_h^0` constraints.
    pub rhs: f64,
    /// Unrestricted `|||v|||₁²`.
    pub norm_squared: f64,
}

/// Build `ρ = {h_T² ℒv, -h [[a∇v·n]], h⁻¹ [[v]]}` (each component
/// L²-projected onto its polynomial space), zero the constrained DOFs and
/// evaluate `b(v, ρ)`.
///
/// The edge scale `h` is [`edge_scale`], the same one used by `|||·|||₁`.
pub fn inf_sup_witness(
    v: &PrimalVec,
    space: &WgSpace,
    primal: &PrimalSpace,
    mesh: &TriMesh,
    a: &TensorField,
    quad: &Quadrature,
) -> Result<Witness, SystemError> {
    let k = space.k();
    let mut rho = space.zeros();
    for t in 0..mesh.num_triangles() {
        if primal.degree() == 0 {
            break;
        }
        let g = TriGeom::of(mesh, t);
        let basis = TriBasis::new(&g, primal.degree());
        let c = v.block(primal, t);
        let h2 = g.diameter * g.diameter;
        let proj = project_tri(|p| h2 * operator_value(&basis, a, c, p), &g, k, &quad.volume)?;
        let o = space.interior_offset(t);
        rho.0[o..o + proj.len()].copy_from_slice(&proj);
    }
    for e in 0..mesh.num_edges() {
        let h = edge_scale(mesh, e);
        let [p0, p1] = mesh.edge_points(e);
        let b = project_edge(|p| -h * edge_jumps(v, mesh, primal, a, e, p).1, p0, p1, k, &quad.edge)?;
        let n = project_edge(|p| edge_jumps(v, mesh, primal, a, e, p).0 / h, p0, p1, k - 1, &quad.edge)?;
        let (ob, on) = (space.trace_offset(e), space.flux_offset(e));
        rho.0[ob..ob + b.len()].copy_from_slice(&b);
        rho.0[on..on + n.len()].copy_from_slice(&n);
    }
    space.apply_constraints(&mut rho);

    let mut lhs = 0.0;
    for t in 0..mesh.num_triangles() {
        let moments = local_weak_moments(&ElementView::of(mesh, t), a, k, quad);
        let local = rho.local(space, mesh, t);
        let vt = v.block(primal, t);
        for (r, vr) in vt.iter().enumerate() {
            lhs += vr * (0..local.len()).map(|j| moments[(r, j)] * local[j]).sum::<f64>();
        }
    }

    let terms = mh_norm_terms(v, mesh, primal, a, quad);
    let norm_squared = terms.total();
    let mut rhs: f64 = terms.element.iter().sum();
    for e in 0..mesh.num_edges() {
        let class = space.edge_class(e);
        if !class.in_neumann_complement() {
            rhs += terms.flux_jump[e];
        }
        if !class.in_dirichlet_complement() {
            rhs += terms.value_jump[e];
        }
    }
    Ok(Witness { rho, lhs, rhs, norm_squared })
}
