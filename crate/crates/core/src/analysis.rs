//! Error norms, discrete semi-norms and observed convergence orders.

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, FemError};
use crate::fem::{TensorField, TriBasis, TriGeom};
use crate::mesh::{BoundaryConfig, Point, TriMesh};
use crate::wg::{
    apply_weak_operator, operator_value, project_mh, project_qh, stabilizer_energy, ElementView, PrimalSpace,
    PrimalVec, Quadrature, WeakFunctionVec, WgSpace,
};

/// Below this value an error is treated as round-off and no order is reported.
pub const MACHINE_ACCURACY: f64 = 1e-12;

/// Observed orders against the previous (coarser) row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub eh: Option<f64>,
    pub l0: Option<f64>,
    pub lb: Option<f64>,
    pub ln: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub inv_h: usize,
    pub eh: f64,
    pub l0: f64,
    pub lb: f64,
    pub ln: f64,
    pub orders: Option<Orders>,
}

impl ErrorRow {
    pub fn new(inv_h: usize, eh: f64, lambda: LambdaNorms) -> Self {
        Self { inv_h, eh, l0: lambda.l0, lb: lambda.lb, ln: lambda.ln, orders: None }
    }

    pub fn max_norm(&self) -> f64 {
        self.eh.max(self.l0).max(self.lb).max(self.ln)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub bc: BoundaryConfig,
    pub k: usize,
    pub rows: Vec<ErrorRow>,
    /// Relative residual of the linear solve at each level.
    pub residuals: Vec<f64>,
}

/// `‖λ₀‖₀`, `‖λ_b‖₀`, `‖λ_n‖₀` with the `h_T`-weighted boundary sums taken
/// element by element, so interior edges count from both sides.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LambdaNorms {
    pub l0: f64,
    pub lb: f64,
    pub ln: f64,
}

/// Discrete L² error of the primal variable.
///
/// For `k = 2` this is `(Σ_T |T| (u_h|_T - u(x_T))²)^{1/2}` with `x_T` the
/// centroid; for `k > 2` it is `‖u_h - 𝒬_h^{k-2} u‖`.
pub fn error_eh(
    u_h: &PrimalVec,
    u: impl Fn(&Point) -> f64,
    mesh: &TriMesh,
    primal: &PrimalSpace,
    quad: &Quadrature,
) -> Result<f64, FemError> {
    if primal.degree() == 0 {
        let sum: f64 =
            (0..mesh.num_triangles()).map(|t| mesh.area(t) * (u_h.0[t] - u(&mesh.centroid(t))).powi(2)).sum();
        return Ok(sum.sqrt());
    }
    let qu = project_mh(u, mesh, primal, quad)?;
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let g = TriGeom::of(mesh, t);
        let basis = TriBasis::new(&g, primal.degree());
        let diff: Vec<f64> = u_h.block(primal, t).iter().zip(qu.block(primal, t)).map(|(a, b)| a - b).collect();
        sum += quad.volume.map_triangle(&g.points).map(|(p, w)| w * basis.eval(&diff, &p).powi(2)).sum::<f64>();
    }
    Ok(sum.sqrt())
}

pub fn error_lambda(lambda: &WeakFunctionVec, mesh: &TriMesh, space: &WgSpace, quad: &Quadrature) -> LambdaNorms {
    let k = space.k();
    let (mut s0, mut sb, mut sn) = (0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let elem = ElementView::of(mesh, t);
        let basis = TriBasis::new(&elem.geom, k);
        let c0 = lambda.interior(space, t);
        s0 += quad.volume.map_triangle(&elem.geom.points).map(|(p, w)| w * basis.eval(c0, &p).powi(2)).sum::<f64>();
        let h = elem.geom.diameter;
        for (le, view) in mesh.triangle_edges(t).iter().zip(&elem.edges) {
            let (bb, bn) = (view.basis(k), view.basis(k - 1));
            let (cb, cn) = (lambda.trace(space, le.edge), lambda.flux(space, le.edge));
            for (p, w) in quad.edge.map_segment(view.endpoints[0], view.endpoints[1]) {
                sb += h * w * bb.eval(cb, &p).powi(2);
                sn += h * w * bn.eval(cn, &p).powi(2);
            }
        }
    }
    LambdaNorms { l0: s0.sqrt(), lb: sb.sqrt(), ln: sn.sqrt() }
}

/// `|||λ||| = s(λ,λ)^{1/2}`.
pub fn triple_bar(
    lambda: &WeakFunctionVec,
    mesh: &TriMesh,
    space: &WgSpace,
    a: &TensorField,
    quad: &Quadrature,
) -> f64 {
    let k = space.k();
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        sum += stabilizer_energy(&ElementView::of(mesh, t), a, k, quad, &lambda.local(space, mesh, t));
    }
    sum.sqrt()
}

/// Scale used on edge terms of `|||·|||₁` and the inf-sup witness: the
/// diameter `h_T` of the adjacent element (the larger one if they differ).
pub fn edge_scale(mesh: &TriMesh, e: usize) -> f64 {
    mesh.edge_triangles(e).iter().map(|&t| mesh.diameter(t)).fold(0.0, f64::max)
}

/// Jumps of `v ∈ M_h` across edge `e` at point `p`: `([[v]], [[a∇v·n]])`.
///
/// `[[v]] = Σ_T (n_T·n_e) v|_T`, i.e. the value on the side the stored
/// normal points away from minus the other; on the boundary `[[v]] = v`.
/// `[[a∇v·n]] = Σ_T a∇v|_T · n_T` (sum of element-outward fluxes).
pub(crate) fn edge_jumps(
    v: &PrimalVec,
    mesh: &TriMesh,
    primal: &PrimalSpace,
    a: &TensorField,
    e: usize,
    p: &Point,
) -> (f64, f64) {
    let (mut jv, mut jf) = (0.0, 0.0);
    for &t in mesh.edge_triangles(e) {
        let i = mesh.triangle_edges(t).iter().position(|le| le.edge == e).expect("edge adjacency");
        let sign = mesh.triangle_edges(t)[i].sign;
        let n = mesh.outward_normal(t, i);
        let basis = TriBasis::new(&TriGeom::of(mesh, t), primal.degree());
        let c = v.block(primal, t);
        jv += sign * basis.eval(c, p);
        if primal.degree() > 0 {
            let g: Point = basis.gradients(p).iter().zip(c).map(|(g, ci)| g * *ci).sum();
            jf += (a.at(p) * g).dot(&n);
        }
    }
    (jv, jf)
}

/// Individual contributions to `|||v|||₁²`.
#[derive(Clone, Debug)]
pub struct MhNormTerms {
    /// `h_T² ‖ℒv‖²_T` per triangle.
    pub element: Vec<f64>,
    /// `h ‖[[a∇v·n]]‖²_e` per edge.
    pub flux_jump: Vec<f64>,
    /// `h⁻¹ ‖[[v]]‖²_e` per edge.
    pub value_jump: Vec<f64>,
}

impl MhNormTerms {
    pub fn total(&self) -> f64 {
        self.element.iter().chain(&self.flux_jump).chain(&self.value_jump).sum()
    }
}

pub fn mh_norm_terms(
    v: &PrimalVec,
    mesh: &TriMesh,
    primal: &PrimalSpace,
    a: &TensorField,
    quad: &Quadrature,
) -> MhNormTerms {
    let element = (0..mesh.num_triangles())
        .map(|t| {
            if primal.degree() == 0 {
                return 0.0;
            }
            let g = TriGeom::of(mesh, t);
            let basis = TriBasis::new(&g, primal.degree());
            let c = v.block(primal, t);
            let l2: f64 =
                quad.volume.map_triangle(&g.points).map(|(p, w)| w * operator_value(&basis, a, c, &p).powi(2)).sum();
            g.diameter * g.diameter * l2
        })
        .collect();
    let mut flux_jump = vec![0.0; mesh.num_edges()];
    let mut value_jump = vec![0.0; mesh.num_edges()];
    for e in 0..mesh.num_edges() {
        let h = edge_scale(mesh, e);
        let [p0, p1] = mesh.edge_points(e);
        for (p, w) in quad.edge.map_segment(p0, p1) {
            let (jv, jf) = edge_jumps(v, mesh, primal, a, e, &p);
            flux_jump[e] += h * w * jf * jf;
            value_jump[e] += w * jv * jv / h;
        }
    }
    MhNormTerms { element, flux_jump, value_jump }
}

/// `|||v|||₁`.
pub fn triple_bar_1(v: &PrimalVec, mesh: &TriMesh, primal: &PrimalSpace, a: &TensorField, quad: &Quadrature) -> f64 {
    mh_norm_terms(v, mesh, primal, a, quad).total().sqrt()
}

/// `‖ℒ_w(Q_h w) - 𝒬_h^{k-2}(ℒw)‖_T` for every element.
///
/// `space` should be unconstrained: zeroing boundary DOFs of `Q_h w` breaks
/// the identity on boundary elements.
#[allow(clippy::too_many_arguments)]
pub fn commuting_residuals(
    w: impl Fn(&Point) -> f64,
    grad_w: impl Fn(&Point) -> Point,
    lw: impl Fn(&Point) -> f64,
    a: &TensorField,
    mesh: &TriMesh,
    space: &WgSpace,
    primal: &PrimalSpace,
    quad: &Quadrature,
) -> Result<Vec<f64>, FemError> {
    let qh = project_qh(w, grad_w, a, mesh, space, quad)?;
    let lhs = apply_weak_operator(&qh, a, mesh, space, primal, quad)?;
    let rhs = project_mh(lw, mesh, primal, quad)?;
    Ok((0..mesh.num_triangles())
        .map(|t| {
            let g = TriGeom::of(mesh, t);
            let basis = TriBasis::new(&g, primal.degree());
            let diff: Vec<f64> = lhs.block(primal, t).iter().zip(rhs.block(primal, t)).map(|(a, b)| a - b).collect();
            quad.volume.map_triangle(&g.points).map(|(p, w)| w * basis.eval(&diff, &p).powi(2)).sum::<f64>().sqrt()
        })
        .collect())
}

pub(crate) fn order(coarse: f64, fine: f64) -> Option<f64> {
    (coarse >= MACHINE_ACCURACY && fine > 0.0).then(|| (coarse / fine).log2())
}

/// Fill in `log₂(e(h)/e(h/2))` between consecutive rows.
pub fn convergence_orders(rows: &[ErrorRow]) -> Result<Vec<ErrorRow>, AnalysisError> {
    if rows.len() < 2 {
        return Err(AnalysisError::TooFewRows(rows.len()));
    }
    let mut out = rows.to_vec();
    out[0].orders = None;
    for i in 1..rows.len() {
        let (c, f) = (&rows[i - 1], &rows[i]);
        if f.inv_h != 2 * c.inv_h {
            return Err(AnalysisError::NonDoubling { prev: c.inv_h, next: f.inv_h });
        }
        out[i].orders =
            Some(Orders { eh: order(c.eh, f.eh), l0: order(c.l0, f.l0), lb: order(c.lb, f.lb), ln: order(c.ln, f.ln) });
    }
    Ok(out)
}
