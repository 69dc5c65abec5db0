//! Gauss–Legendre rules on segments and collapsed (Duffy) product rules on
//! triangles. All weights are positive.

use crate::error::FemError;
use crate::mesh::Point;

/// Highest polynomial exactness either rule family will produce.
pub const MAX_EXACTNESS: usize = 40;

/// A quadrature rule on a reference domain.
///
/// Segment rules live on `[0,1]` (points use only the first coordinate);
/// triangle rules live on the triangle `(0,0),(1,0),(0,1)` of area `1/2`.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of weights, i.e. the measure of the reference domain.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Physical points and weights on the triangle `p`.
    pub fn map_triangle<'a>(&'a self, p: &'a [Point; 3]) -> impl Iterator<Item = (Point, f64)> + 'a {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        self.points.iter().zip(&self.weights).map(move |(q, &w)| (p[0] + e1 * q[0] + e2 * q[1], w * jac))
    }

    /// Physical points and weights on the segment `a → b`.
    pub fn map_segment(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
        let d = b - a;
        let len = d.norm();
        self.points.iter().zip(&self.weights).map(move |(q, &w)| (a + d * q[0], w * len))
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule on `[0,1]` exact through degree `exactness`.
pub fn edge_quadrature(exactness: usize) -> Result<QuadRule, FemError> {
    if exactness > MAX_EXACTNESS {
        return Err(FemError::UnsupportedOrder { requested: exactness, max: MAX_EXACTNESS });
    }
    let n = exactness / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(QuadRule {
        points: x.iter().map(|&t| [0.5 * (t + 1.0), 0.0]).collect(),
        weights: w.iter().map(|&w| 0.5 * w).collect(),
        exactness,
    })
}

/// Collapsed Gauss rule on the reference triangle exact through degree `exactness`.
///
/// The square `(u,v) ∈ [0,1]²` maps to `(u, v(1-u))` with Jacobian `1-u`,
/// which raises the degree in `u` by one.
pub fn tri_quadrature(exactness: usize) -> Result<QuadRule, FemError> {
    if exactness > MAX_EXACTNESS {
        return Err(FemError::UnsupportedOrder { requested: exactness, max: MAX_EXACTNESS });
    }
    let nu = exactness.div_ceil(2) + 1;
    let nv = exactness / 2 + 1;
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&a, &wa) in xu.iter().zip(&wu) {
        let u = 0.5 * (a + 1.0);
        for (&b, &wb) in xv.iter().zip(&wv) {
            let v = 0.5 * (b + 1.0);
            points.push([u, v * (1.0 - u)]);
            weights.push(0.25 * wa * wb * (1.0 - u));
        }
    }
    Ok(QuadRule { points, weights, exactness })
}
