//! Element-level operators: the discrete weak operator `ℒ_{w,k-2,T}` and the
//! stabilizer `s_T`.

use nalgebra::{DMatrix, DVector};

use crate::error::FemError;
use crate::fem::{
    dim_p2, edge_quadrature, tri_mass, tri_quadrature, EdgeBasis, QuadRule, TensorField, TriBasis, TriGeom,
};
use crate::mesh::{Point, TriMesh};

/// Volume and edge rules sharing one exactness.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub volume: QuadRule,
    pub edge: QuadRule,
}

impl Quadrature {
    pub fn with_exactness(exactness: usize) -> Result<Self, FemError> {
        Ok(Self { volume: tri_quadrature(exactness)?, edge: edge_quadrature(exactness)? })
    }

    /// Default exactness `2k + 4`.
    pub fn for_degree(k: usize) -> Result<Self, FemError> {
        Self::with_exactness(2 * k + 4)
    }
}

/// One edge of an element as seen from that element.
#[derive(Clone, Debug)]
pub struct EdgeView {
    /// Endpoints in the edge's global parameter order.
    pub endpoints: [Point; 2],
    /// Element-outward unit normal.
    pub normal: Point,
    /// `+1` if `normal` equals the edge's stored normal.
    pub sign: f64,
}

impl EdgeView {
    pub fn length(&self) -> f64 {
        (self.endpoints[1] - self.endpoints[0]).norm()
    }

    pub fn basis(&self, degree: usize) -> EdgeBasis {
        EdgeBasis::new(self.endpoints[0], self.endpoints[1], degree)
    }
}

#[derive(Clone, Debug)]
pub struct ElementView {
    pub geom: TriGeom,
    pub edges: [EdgeView; 3],
}

impl ElementView {
    pub fn of(mesh: &TriMesh, t: usize) -> Self {
        let geom = TriGeom::of(mesh, t);
        let les = mesh.triangle_edges(t);
        let edges = std::array::from_fn(|i| EdgeView {
            endpoints: mesh.edge_points(les[i].edge),
            normal: mesh.outward_normal(t, i),
            sign: les[i].sign,
        });
        Self { geom, edges }
    }

    /// An isolated triangle whose edges are parameterised along the local
    /// vertex order and whose flux unknowns use the outward normal.
    pub fn standalone(points: [Point; 3]) -> Self {
        let geom = TriGeom::new(points);
        let edges = std::array::from_fn(|i| {
            let [a, b] = geom.local_edge(i);
            let d = b - a;
            let mut normal = Point::new(d.y, -d.x) / d.norm();
            if normal.dot(&((a + b) * 0.5 - geom.centroid)) < 0.0 {
                normal = -normal;
            }
            EdgeView { endpoints: [a, b], normal, sign: 1.0 }
        });
        Self { geom, edges }
    }
}

/// Sizes of the local blocks for degree `k`.
#[derive(Clone, Copy, Debug)]
pub struct LocalLayout {
    pub k: usize,
}

impl LocalLayout {
    pub fn interior(&self) -> usize {
        dim_p2(self.k)
    }

    pub fn trace_offset(&self, local_edge: usize) -> usize {
        self.interior() + local_edge * (self.k + 1)
    }

    pub fn flux_offset(&self, local_edge: usize) -> usize {
        self.interior() + 3 * (self.k + 1) + local_edge * self.k
    }

    pub fn len(&self) -> usize {
        self.interior() + 3 * (2 * self.k + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn test_dim(&self) -> usize {
        dim_p2(self.k - 2)
    }
}

/// `ℒ φ = ∇·(a∇φ) = a : ∇²φ + (∇·a)·∇φ` for every basis function at `p`.
pub fn apply_operator(basis: &TriBasis, a: &TensorField, p: &Point) -> Vec<f64> {
    if basis.degree() == 0 {
        return vec![0.0];
    }
    let am = a.at(p);
    let da = a.divergence(p);
    basis.hessians(p).iter().zip(basis.gradients(p)).map(|(h, g)| am.component_mul(h).sum() + da.dot(&g)).collect()
}

/// `ℒ(Σ c_i φ_i)` at `p`.
pub fn operator_value(basis: &TriBasis, a: &TensorField, coeffs: &[f64], p: &Point) -> f64 {
    apply_operator(basis, a, p).iter().zip(coeffs).map(|(l, c)| l * c).sum()
}

/// Right-hand-side moments of the weak operator: row `i` holds the linear
/// functional `σ ↦ (σ₀, ℒψ_i)_T - <σ_b, a∇ψ_i·n>_∂T + <σ_n, ψ_i>_∂T` for
/// the `i`-th basis function `ψ_i` of `P_{k-2}(T)`.
///
/// Since `b(v, σ) = Σ_T (v, ℒ_w σ)_T`, this is also the local block of `b`.
pub fn local_weak_moments(elem: &ElementView, a: &TensorField, k: usize, quad: &Quadrature) -> DMatrix<f64> {
    let layout = LocalLayout { k };
    let test = TriBasis::new(&elem.geom, k - 2);
    let trial = TriBasis::new(&elem.geom, k);
    let mut r = DMatrix::zeros(test.len(), layout.len());

    if k > 2 {
        for (p, w) in quad.volume.map_triangle(&elem.geom.points) {
            let l_test = apply_operator(&test, a, &p);
            let phi = trial.values(&p);
            for (i, lt) in l_test.iter().enumerate() {
                for (j, ph) in phi.iter().enumerate() {
                    r[(i, j)] += w * ph * lt;
                }
            }
        }
    }

    for (li, edge) in elem.edges.iter().enumerate() {
        let bb = edge.basis(k);
        let bn = edge.basis(k - 1);
        let (ob, on) = (layout.trace_offset(li), layout.flux_offset(li));
        for (p, w) in quad.edge.map_segment(edge.endpoints[0], edge.endpoints[1]) {
            let psi = test.values(&p);
            let vb = bb.values(&p);
            let vn = bn.values(&p);
            let flux: Vec<f64> = if k > 2 {
                let an = a.at(&p) * edge.normal;
                test.gradients(&p).iter().map(|g| g.dot(&an)).collect()
            } else {
                vec![0.0]
            };
            for i in 0..test.len() {
                for (j, b) in vb.iter().enumerate() {
                    r[(i, ob + j)] -= w * b * flux[i];
                }
                for (j, n) in vn.iter().enumerate() {
                    r[(i, on + j)] += w * edge.sign * n * psi[i];
                }
            }
        }
    }
    r
}

/// Dense map from local weak-function DOFs to the coefficients of
/// `ℒ_{w,k-2,T} σ` in the scaled monomial basis of `P_{k-2}(T)`.
#[derive(Clone, Debug)]
pub struct LocalWeakOp {
    pub matrix: DMatrix<f64>,
}

impl LocalWeakOp {
    pub fn apply(&self, local: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(local)).as_slice().to_vec()
    }
}

pub fn local_weak_operator(
    elem: &ElementView,
    a: &TensorField,
    k: usize,
    quad: &Quadrature,
) -> Result<LocalWeakOp, FemError> {
    let moments = local_weak_moments(elem, a, k, quad);
    let test = TriBasis::new(&elem.geom, k - 2);
    let chol = tri_mass(&test, &elem.geom, &quad.volume).cholesky().ok_or(FemError::SingularMass { degree: k - 2 })?;
    Ok(LocalWeakOp { matrix: chol.solve(&moments) })
}

/// Local stabilizer matrix realising
/// `s_T(λ,σ) = h_T⁻¹<λ₀-λ_b, σ₀-σ_b>_∂T + h_T<a∇λ₀·n-λ_n, a∇σ₀·n-σ_n>_∂T`.
pub fn local_stabilizer(elem: &ElementView, a: &TensorField, k: usize, quad: &Quadrature) -> DMatrix<f64> {
    let layout = LocalLayout { k };
    let n = layout.len();
    let h = elem.geom.diameter;
    let trial = TriBasis::new(&elem.geom, k);
    let mut s = DMatrix::zeros(n, n);
    let mut r_val = DVector::zeros(n);
    let mut r_flux = DVector::zeros(n);
    for (li, edge) in elem.edges.iter().enumerate() {
        let bb = edge.basis(k);
        let bn = edge.basis(k - 1);
        let (ob, on) = (layout.trace_offset(li), layout.flux_offset(li));
        for (p, w) in quad.edge.map_segment(edge.endpoints[0], edge.endpoints[1]) {
            r_val.fill(0.0);
            r_flux.fill(0.0);
            let an = a.at(&p) * edge.normal;
            for (j, (v, g)) in trial.values(&p).iter().zip(trial.gradients(&p)).enumerate() {
                r_val[j] = *v;
                r_flux[j] = g.dot(&an);
            }
            for (j, b) in bb.values(&p).iter().enumerate() {
                r_val[ob + j] = -b;
            }
            for (j, v) in bn.values(&p).iter().enumerate() {
                r_flux[on + j] = -edge.sign * v;
            }
            s.ger(w / h, &r_val, &r_val, 1.0);
            s.ger(w * h, &r_flux, &r_flux, 1.0);
        }
    }
    s
}

/// `s_T(σ, σ)` evaluated as a weighted sum of squared pointwise residuals.
///
/// Agrees with `xᵀ S_T x` from [`local_stabilizer`] but avoids the
/// cancellation of the quadratic form, so it stays non-negative and resolves
/// values far below `ε·‖S_T‖·‖x‖²`.
pub fn stabilizer_energy(elem: &ElementView, a: &TensorField, k: usize, quad: &Quadrature, local: &[f64]) -> f64 {
    let layout = LocalLayout { k };
    let h = elem.geom.diameter;
    let trial = TriBasis::new(&elem.geom, k);
    let c0 = &local[..layout.interior()];
    let mut sum = 0.0;
    for (li, edge) in elem.edges.iter().enumerate() {
        let bb = edge.basis(k);
        let bn = edge.basis(k - 1);
        let cb = &local[layout.trace_offset(li)..][..k + 1];
        let cn = &local[layout.flux_offset(li)..][..k];
        for (p, w) in quad.edge.map_segment(edge.endpoints[0], edge.endpoints[1]) {
            let an = a.at(&p) * edge.normal;
            let grad: Point = trial.gradients(&p).iter().zip(c0).map(|(g, c)| g * *c).sum();
            let r_val = trial.eval(c0, &p) - bb.eval(cb, &p);
            let r_flux = grad.dot(&an) - edge.sign * bn.eval(cn, &p);
            sum += w / h * r_val * r_val + w * h * r_flux * r_flux;
        }
    }
    sum
}
