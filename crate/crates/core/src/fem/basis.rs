//! Scaled monomial bases on triangles and edges.

use nalgebra::Matrix2;

use crate::mesh::{Point, TriMesh};

/// Geometry of one triangle as seen by the element routines.
#[derive(Clone, Debug)]
pub struct TriGeom {
    pub points: [Point; 3],
    pub area: f64,
    pub centroid: Point,
    /// `h_T`, the longest edge.
    pub diameter: f64,
}

impl TriGeom {
    pub fn new(points: [Point; 3]) -> Self {
        let e1 = points[1] - points[0];
        let e2 = points[2] - points[0];
        let area = 0.5 * (e1.x * e2.y - e1.y * e2.x).abs();
        let centroid = (points[0] + points[1] + points[2]) / 3.0;
        let diameter = (0..3).map(|i| (points[(i + 1) % 3] - points[i]).norm()).fold(0.0, f64::max);
        Self { points, area, centroid, diameter }
    }

    pub fn of(mesh: &TriMesh, t: usize) -> Self {
        Self::new(mesh.triangle_points(t))
    }

    /// Endpoints of local edge `i` (vertices `i` and `i+1`).
    pub fn local_edge(&self, i: usize) -> [Point; 2] {
        [self.points[i], self.points[(i + 1) % 3]]
    }
}

/// Number of polynomials of total degree `<= k` in two variables.
pub const fn dim_p2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Monomial exponents in graded order: `(0,0), (1,0), (0,1), (2,0), (1,1), ...`.
///
/// The basis of `P_r` is a prefix of the basis of `P_k` for `r <= k`.
pub fn exponents(k: usize) -> Vec<(u32, u32)> {
    (0..=k as u32).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect()
}

/// `((x - x_T)/h_T)^a ((y - y_T)/h_T)^b` for `a + b <= degree`.
#[derive(Clone, Debug)]
pub struct TriBasis {
    degree: usize,
    center: Point,
    scale: f64,
    exps: Vec<(u32, u32)>,
}

fn ipow(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

/// `d/dx x^n` evaluated as `n x^(n-1)`, zero for `n = 0`.
fn dpow(x: f64, n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * ipow(x, n - 1)
    }
}

fn ddpow(x: f64, n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        (n * (n - 1)) as f64 * ipow(x, n - 2)
    }
}

impl TriBasis {
    pub fn new(geom: &TriGeom, degree: usize) -> Self {
        Self { degree, center: geom.centroid, scale: geom.diameter, exps: exponents(degree) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exps
    }

    fn local(&self, p: &Point) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }

    pub fn values(&self, p: &Point) -> Vec<f64> {
        let (s, t) = self.local(p);
        self.exps.iter().map(|&(a, b)| ipow(s, a) * ipow(t, b)).collect()
    }

    pub fn gradients(&self, p: &Point) -> Vec<Point> {
        let (s, t) = self.local(p);
        let h = self.scale;
        self.exps.iter().map(|&(a, b)| Point::new(dpow(s, a) * ipow(t, b) / h, ipow(s, a) * dpow(t, b) / h)).collect()
    }

    /// Hessians `[[∂xx, ∂xy], [∂xy, ∂yy]]`.
    pub fn hessians(&self, p: &Point) -> Vec<Matrix2<f64>> {
        let (s, t) = self.local(p);
        let h2 = self.scale * self.scale;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let xx = ddpow(s, a) * ipow(t, b) / h2;
                let xy = dpow(s, a) * dpow(t, b) / h2;
                let yy = ipow(s, a) * ddpow(t, b) / h2;
                Matrix2::new(xx, xy, xy, yy)
            })
            .collect()
    }

    /// Evaluate `Σ c_i φ_i(p)`.
    pub fn eval(&self, coeffs: &[f64], p: &Point) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}

/// `((x - m)·τ / h_e)^j` on an edge with midpoint `m`, unit tangent `τ`
/// pointing from the edge's first to second vertex, and length `h_e`.
#[derive(Clone, Debug)]
pub struct EdgeBasis {
    degree: usize,
    midpoint: Point,
    tangent: Point,
    length: f64,
}

impl EdgeBasis {
    pub fn new(a: Point, b: Point, degree: usize) -> Self {
        let d = b - a;
        let length = d.norm();
        Self { degree, midpoint: (a + b) * 0.5, tangent: d / length, length }
    }

    pub fn of(mesh: &TriMesh, e: usize, degree: usize) -> Self {
        let [a, b] = mesh.edge_points(e);
        Self::new(a, b, degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Scaled arc-length coordinate in `[-1/2, 1/2]`.
    pub fn param(&self, p: &Point) -> f64 {
        (p - self.midpoint).dot(&self.tangent) / self.length
    }

    pub fn values(&self, p: &Point) -> Vec<f64> {
        let t = self.param(p);
        (0..=self.degree).map(|j| ipow(t, j as u32)).collect()
    }

    pub fn eval(&self, coeffs: &[f64], p: &Point) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}
