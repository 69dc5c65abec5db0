//! Structured triangulations of the unit square.
//!
//! Meshes start from the two-triangle split of `[0,1]²` along the diagonal
//! `(0,0)–(1,1)` and are refined by midpoint subdivision. After `level`
//! refinements the mesh has `n = 2^level` cells per side, so `1/h = n`.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::MeshError;

/// A point (or vector) in the plane.
pub type Point = Vector2<f64>;

const SIDE_TOL: f64 = 1e-12;

/// One side of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }

    /// Outward unit normal of the square on this side.
    pub fn outward_normal(self) -> Point {
        match self {
            Side::Bottom => Point::new(0.0, -1.0),
            Side::Right => Point::new(1.0, 0.0),
            Side::Top => Point::new(0.0, 1.0),
            Side::Left => Point::new(-1.0, 0.0),
        }
    }

    fn contains(self, p: &Point) -> bool {
        match self {
            Side::Bottom => p.y.abs() < SIDE_TOL,
            Side::Right => (p.x - 1.0).abs() < SIDE_TOL,
            Side::Top => (p.y - 1.0).abs() < SIDE_TOL,
            Side::Left => p.x.abs() < SIDE_TOL,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bottom" => Ok(Side::Bottom),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "left" => Ok(Side::Left),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

/// Which sides carry Dirichlet data (`Γ_D`) and which carry Neumann data
/// (`Γ_N`). The two sets may overlap; a side in both carries Cauchy data.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub dirichlet: BTreeSet<Side>,
    pub neumann: BTreeSet<Side>,
}

impl BoundaryConfig {
    pub fn new(dirichlet: &[Side], neumann: &[Side]) -> Self {
        Self { dirichlet: dirichlet.iter().copied().collect(), neumann: neumann.iter().copied().collect() }
    }

    /// Sides with both Dirichlet and Neumann data.
    pub fn cauchy_sides(&self) -> BTreeSet<Side> {
        self.dirichlet.intersection(&self.neumann).copied().collect()
    }

    /// Sides with no data at all.
    pub fn free_sides(&self) -> BTreeSet<Side> {
        Side::ALL.into_iter().filter(|s| !self.dirichlet.contains(s) && !self.neumann.contains(s)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.dirichlet.is_empty() && self.neumann.is_empty()
    }

    /// Short human-readable form, e.g. `D={bottom,top} N={left}`.
    pub fn describe(&self) -> String {
        let fmt = |set: &BTreeSet<Side>| set.iter().map(|s| s.name()).collect::<Vec<_>>().join(",");
        format!("D={{{}}} N={{{}}}", fmt(&self.dirichlet), fmt(&self.neumann))
    }
}

/// A mesh edge. `vertices[0] < vertices[1]`; the parameter direction on the
/// edge runs from `vertices[0]` to `vertices[1]`.
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Fixed unit normal: outward on the boundary, and from the
    /// lower-indexed to the higher-indexed neighbour in the interior.
    pub normal: Point,
    pub length: f64,
    /// Square side for boundary edges, `None` for interior edges or for
    /// boundary edges that do not lie on the square (corrupt input).
    pub side: Option<Side>,
}

/// Local reference to an edge from one of its triangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEdge {
    pub edge: usize,
    /// `+1.0` if the element's outward normal equals the edge's stored normal.
    pub sign: f64,
}

/// Conforming triangulation with edge adjacency.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    edge_to_triangles: Vec<Vec<usize>>,
    triangle_to_edges: Vec<[LocalEdge; 3]>,
    level: u32,
}

/// Classification of one edge against a [`BoundaryConfig`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeClass {
    pub boundary: bool,
    pub dirichlet: bool,
    pub neumann: bool,
}

impl EdgeClass {
    /// Member of `Γ_N^c`: a boundary edge without Neumann data.
    pub fn in_neumann_complement(&self) -> bool {
        self.boundary && !self.neumann
    }

    /// Member of `Γ_D^c`: a boundary edge without Dirichlet data.
    pub fn in_dirichlet_complement(&self) -> bool {
        self.boundary && !self.dirichlet
    }
}

/// Level-0 mesh: the unit square split by the diagonal from `(0,0)` to `(1,1)`.
pub fn build_coarse_unit_square() -> TriMesh {
    let vertices = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
    let triangles = vec![[0, 1, 2], [0, 2, 3]];
    TriMesh::from_parts(vertices, triangles, 0).expect("coarse mesh is valid")
}

/// Split every triangle into four congruent children through its edge midpoints.
pub fn refine_uniform(mesh: &TriMesh) -> TriMesh {
    let mut vertices = mesh.vertices.clone();
    let midpoints: Vec<usize> = mesh
        .edges
        .iter()
        .map(|e| {
            vertices.push((mesh.vertices[e.vertices[0]] + mesh.vertices[e.vertices[1]]) * 0.5);
            vertices.len() - 1
        })
        .collect();

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        // local edge i joins tri[i] and tri[i+1]
        let m = |i: usize| midpoints[mesh.triangle_to_edges[t][i].edge];
        let (m01, m12, m20) = (m(0), m(1), m(2));
        triangles.push([tri[0], m01, m20]);
        triangles.push([m01, tri[1], m12]);
        triangles.push([m20, m12, tri[2]]);
        triangles.push([m01, m12, m20]);
    }
    TriMesh::from_parts(vertices, triangles, mesh.level + 1).expect("refinement preserves validity")
}

/// Mesh with `1/h = 2^level`.
pub fn unit_square_at_level(level: u32) -> TriMesh {
    (0..level).fold(build_coarse_unit_square(), |m, _| refine_uniform(&m))
}

/// Label every edge against the boundary configuration.
pub fn classify_edges(mesh: &TriMesh, bc: &BoundaryConfig) -> Result<Vec<EdgeClass>, MeshError> {
    mesh.edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if !mesh.is_boundary_edge(i) {
                return Ok(EdgeClass::default());
            }
            let side = e.side.ok_or(MeshError::OffBoundaryEdge { edge: i })?;
            Ok(EdgeClass {
                boundary: true,
                dirichlet: bc.dirichlet.contains(&side),
                neumann: bc.neumann.contains(&side),
            })
        })
        .collect()
}

impl TriMesh {
    /// Build adjacency for an arbitrary triangle list. Triangles are
    /// reoriented counter-clockwise.
    pub fn from_raw(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::from_parts(vertices, triangles, 0)
    }

    fn from_parts(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>, level: u32) -> Result<Self, MeshError> {
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange { triangle: t });
            }
            let a = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if a.abs() <= f64::EPSILON {
                return Err(MeshError::Degenerate { triangle: t });
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        let mut edge_to_triangles: Vec<Vec<usize>> = Vec::new();
        let mut local: Vec<[usize; 3]> = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut ids = [0; 3];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *lookup.entry(key).or_insert_with(|| {
                    edge_vertices.push([key.0, key.1]);
                    edge_to_triangles.push(Vec::new());
                    edge_vertices.len() - 1
                });
                edge_to_triangles[id].push(t);
                if edge_to_triangles[id].len() > 2 {
                    return Err(MeshError::NonManifoldEdge { edge: id });
                }
                ids[i] = id;
            }
            local.push(ids);
        }

        let centroid = |t: usize| {
            let tri = triangles[t];
            (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0
        };

        let edges: Vec<Edge> = edge_vertices
            .iter()
            .zip(&edge_to_triangles)
            .map(|(&[a, b], owners)| {
                let (pa, pb) = (vertices[a], vertices[b]);
                let d = pb - pa;
                let length = d.norm();
                let mut normal = Point::new(d.y, -d.x) / length;
                // orient away from the first (lowest-indexed) owner
                let mid = (pa + pb) * 0.5;
                if normal.dot(&(mid - centroid(owners[0]))) < 0.0 {
                    normal = -normal;
                }
                let side = if owners.len() == 1 {
                    Side::ALL.into_iter().find(|s| s.contains(&pa) && s.contains(&pb))
                } else {
                    None
                };
                Edge { vertices: [a, b], normal, length, side }
            })
            .collect();

        let triangle_to_edges = local
            .iter()
            .enumerate()
            .map(|(t, ids)| {
                ids.map(|id| LocalEdge { edge: id, sign: if edge_to_triangles[id][0] == t { 1.0 } else { -1.0 } })
            })
            .collect();

        Ok(Self { vertices, triangles, edges, edge_to_triangles, triangle_to_edges, level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cells per side, `1/h`.
    pub fn inv_h(&self) -> usize {
        1 << self.level
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Adjacent triangles of an edge, lowest index first.
    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_to_triangles[e]
    }

    /// Local edges of triangle `t`; local edge `i` joins vertices `i` and `i+1`.
    pub fn triangle_edges(&self, t: usize) -> &[LocalEdge; 3] {
        &self.triangle_to_edges[t]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_to_triangles[e].len() == 1
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(&a, &b, &c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        (a + b + c) / 3.0
    }

    /// Element diameter `h_T`: the longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        self.triangle_to_edges[t].iter().map(|le| self.edges[le.edge].length).fold(0.0, f64::max)
    }

    /// Endpoints of edge `e` in parameter order.
    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    /// Outward unit normal of triangle `t` on its local edge `i`.
    pub fn outward_normal(&self, t: usize, i: usize) -> Point {
        let le = self.triangle_to_edges[t][i];
        self.edges[le.edge].normal * le.sign
    }

    /// Plain-text dump with vertex, triangle and edge sections.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# level {}", self.level)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", p.x, p.y)?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "edges {}", self.edges.len())?;
        for (i, e) in self.edges.iter().enumerate() {
            let owners = &self.edge_to_triangles[i];
            let side = e.side.map_or("-", Side::name);
            let other = owners.get(1).map_or("-".to_string(), |t| t.to_string());
            writeln!(
                w,
                "{} {} {:.17e} {:.17e} {} {} {}",
                e.vertices[0], e.vertices[1], e.normal.x, e.normal.y, owners[0], other, side
            )?;
        }
        Ok(())
    }
}

fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_mesh_counts() {
        let m = build_coarse_unit_square();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.inv_h(), 1);
        for t in 0..2 {
            assert!((m.area(t) - 0.5).abs() < 1e-15);
            assert!((m.diameter(t) - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn euler_counts_through_level_five() {
        let mut m = build_coarse_unit_square();
        for level in 1..=5u32 {
            m = refine_uniform(&m);
            let n = 1usize << level;
            assert_eq!(m.level(), level);
            assert_eq!(m.vertices().len(), (n + 1) * (n + 1));
            assert_eq!(m.num_triangles(), 2 * n * n);
            assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
        }
        assert_eq!(m.num_triangles(), 2048);
    }

    #[test]
    fn first_refinement_matches_enumeration() {
        let m = refine_uniform(&build_coarse_unit_square());
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.num_edges(), 16);
        let boundary = (0..m.num_edges()).filter(|&e| m.is_boundary_edge(e)).count();
        assert_eq!(boundary, 8);
    }

    #[test]
    fn children_are_quarter_area_and_congruent() {
        let m0 = build_coarse_unit_square();
        let m1 = refine_uniform(&m0);
        let total: f64 = (0..m1.num_triangles()).map(|t| m1.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-15);
        for t in 0..m1.num_triangles() {
            assert!((m1.area(t) - m0.area(t / 4) / 4.0).abs() < 1e-15);
            let mut lens: Vec<f64> = m1.triangle_edges(t).iter().map(|le| m1.edges()[le.edge].length).collect();
            lens.sort_by(f64::total_cmp);
            assert!((lens[0] - 0.5).abs() < 1e-15 && (lens[1] - 0.5).abs() < 1e-15);
            assert!((lens[2] - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn signs_reconstruct_outward_normals() {
        let m = unit_square_at_level(3);
        for t in 0..m.num_triangles() {
            let c = m.centroid(t);
            for (i, le) in m.triangle_edges(t).iter().enumerate() {
                let [a, b] = m.edge_points(le.edge);
                let n = m.outward_normal(t, i);
                assert!((n.norm() - 1.0).abs() < 1e-14);
                assert!(n.dot(&((a + b) * 0.5 - c)) > 0.0);
                assert!(n.dot(&(b - a)).abs() < 1e-14);
            }
        }
        for e in 0..m.num_edges() {
            let owners = m.edge_triangles(e);
            if owners.len() == 2 {
                let sign_of = |t: usize| m.triangle_edges(t).iter().find(|le| le.edge == e).unwrap().sign;
                assert_eq!(sign_of(owners[0]), 1.0);
                assert_eq!(sign_of(owners[1]), -1.0);
            }
        }
    }

    #[test]
    fn refinement_keeps_boundary_sides() {
        let m = unit_square_at_level(2);
        for (e, edge) in m.edges().iter().enumerate() {
            if m.is_boundary_edge(e) {
                let side = edge.side.expect("boundary edge on a side");
                assert!((edge.normal - side.outward_normal()).norm() < 1e-14);
            } else {
                assert!(edge.side.is_none());
            }
        }
        let per_side = |s: Side| m.edges().iter().filter(|e| e.side == Some(s)).count();
        for s in Side::ALL {
            assert_eq!(per_side(s), 4);
        }
    }

    #[test]
    fn classification_of_catalog_configurations() {
        let m = unit_square_at_level(1);
        let bc = BoundaryConfig::new(&[Side::Bottom], &[Side::Bottom]);
        let classes = classify_edges(&m, &bc).unwrap();
        for (e, c) in classes.iter().enumerate() {
            match m.edges()[e].side {
                Some(Side::Bottom) => assert!(c.dirichlet && c.neumann),
                Some(_) => assert!(c.in_dirichlet_complement() && c.in_neumann_complement()),
                None => assert!(!c.boundary),
            }
        }

        let bc = BoundaryConfig::new(&[Side::Bottom, Side::Top], &[Side::Left, Side::Right]);
        let classes = classify_edges(&m, &bc).unwrap();
        assert!(classes.iter().all(|c| !(c.dirichlet && c.neumann)));

        let classes = classify_edges(&m, &BoundaryConfig::default()).unwrap();
        for (e, c) in classes.iter().enumerate() {
            assert_eq!(c.in_dirichlet_complement(), m.is_boundary_edge(e));
            assert_eq!(c.in_neumann_complement(), m.is_boundary_edge(e));
        }
    }

    #[test]
    fn off_square_boundary_is_structural_error() {
        let verts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let m = TriMesh::from_raw(verts, vec![[0, 1, 2]]).unwrap();
        let err = classify_edges(&m, &BoundaryConfig::default()).unwrap_err();
        assert!(matches!(err, MeshError::OffBoundaryEdge { .. }));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let verts = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        let m = TriMesh::from_raw(verts, vec![[0, 1, 2]]).unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn dump_has_sections() {
        let mut buf = Vec::new();
        build_coarse_unit_square().write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("vertices 4"));
        assert!(text.contains("triangles 2"));
        assert!(text.contains("edges 5"));
    }
}
