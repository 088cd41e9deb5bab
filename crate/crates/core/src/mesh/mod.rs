//! Primal/dual polygonal meshes with connectivity stencils and geometric
//! measures.
//!
//! Index conventions: `i` runs over primal cells (dual vertices), `e` over
//! edges (shared by both meshes) and `v` over primal vertices (dual cells).
//! Each cell stores its vertices and edges in counterclockwise ring order,
//! with `cell_edges[i][k]` joining `cell_vertices[i][k]` and
//! `cell_vertices[i][k + 1]`.
//!
//! Orientation: the edge normal points from the lower-indexed adjacent
//! cell to the higher-indexed one, so `n(e, edge_cells[e][0]) = +1`. The
//! tangent is the normal rotated by +90 degrees and points at
//! `edge_vertices[e][1]`, so `t(e, edge_vertices[e][1]) = +1`.
//!
//! Lengths: `le` is the length of the primal edge (vertex to vertex) and
//! `de` the distance between the two adjacent cell centers. The diagonal
//! Hodge star is `le / de`.

mod builder;
mod generators;
pub mod geometry;
mod io;
mod validate;

pub use generators::{
    build_hex_mesh, build_icosahedral_mesh, build_icosahedral_mesh_capped, build_square_mesh,
    build_voronoi_mesh, DEFAULT_ICOSAHEDRAL_LEVEL_CAP, LLOYD_ITERATIONS,
};
pub use geometry::V3;
pub use io::{read_mesh, write_mesh};
pub use validate::{validate_mesh, CheckResult, ValidationReport, ORTHOGONALITY_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Doubly periodic plane spanned by two period vectors.
    Periodic { period_a: [f64; 2], period_b: [f64; 2] },
    Sphere { radius: f64 },
}

impl Domain {
    pub fn area(&self) -> f64 {
        match self {
            Domain::Periodic { period_a, period_b } => {
                (period_a[0] * period_b[1] - period_a[1] * period_b[0]).abs()
            }
            Domain::Sphere { radius } => 4.0 * std::f64::consts::PI * radius * radius,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Domain::Sphere { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    /// Short description of how the mesh was generated.
    pub label: String,
    pub domain: Domain,

    pub cell_centers: Vec<V3>,
    pub vertex_positions: Vec<V3>,
    /// Intersection of each primal edge with its dual edge.
    pub edge_points: Vec<V3>,
    /// Unit normal at the edge point, pointing from `edge_cells[e][0]` to
    /// `edge_cells[e][1]`.
    pub edge_normals: Vec<V3>,

    pub cell_edges: Vec<Vec<usize>>,
    pub cell_vertices: Vec<Vec<usize>>,
    pub edge_cells: Vec<[usize; 2]>,
    pub edge_vertices: Vec<[usize; 2]>,
    /// Edges around each vertex, counterclockwise; `vertex_edges[v][k]`
    /// separates `vertex_cells[v][k]` from `vertex_cells[v][k + 1]`.
    pub vertex_edges: Vec<Vec<usize>>,
    pub vertex_cells: Vec<Vec<usize>>,
    /// `n(e, edge_cells[e][k])`.
    pub edge_cell_sign: Vec<[i8; 2]>,
    /// `t(e, edge_vertices[e][k])`.
    pub edge_vertex_sign: Vec<[i8; 2]>,

    pub cell_area: Vec<f64>,
    pub vertex_area: Vec<f64>,
    pub edge_le: Vec<f64>,
    pub edge_de: Vec<f64>,
    /// `A_ie`, aligned with `cell_edges[i]`.
    pub cell_edge_area: Vec<Vec<f64>>,
    /// `A_iv`, aligned with `cell_vertices[i]`.
    pub cell_vertex_area: Vec<Vec<f64>>,

    /// ECP(e): edges sharing a cell with `e`, excluding `e`; edges of
    /// `edge_cells[e][0]` come first, each in ring order starting after `e`.
    pub edge_neighbors: Vec<Vec<usize>>,
    /// Largest departure from a right angle between primal and dual edges,
    /// in radians.
    pub max_orthogonality_defect: f64,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cell_centers.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_positions.len()
    }

    pub fn total_area(&self) -> f64 {
        self.domain.area()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.max_orthogonality_defect <= ORTHOGONALITY_TOLERANCE
    }

    /// `n(e, i)`; zero when `i` is not adjacent to `e`.
    pub fn n(&self, e: usize, i: usize) -> i8 {
        let cells = &self.edge_cells[e];
        if cells[0] == i {
            self.edge_cell_sign[e][0]
        } else if cells[1] == i {
            self.edge_cell_sign[e][1]
        } else {
            0
        }
    }

    /// `t(e, v)`; zero when `v` is not an endpoint of `e`.
    pub fn t(&self, e: usize, v: usize) -> i8 {
        let verts = &self.edge_vertices[e];
        if verts[0] == v {
            self.edge_vertex_sign[e][0]
        } else if verts[1] == v {
            self.edge_vertex_sign[e][1]
        } else {
            0
        }
    }

    /// `A_e = A_ie(left) + A_ie(right)`.
    pub fn edge_area(&self, e: usize) -> f64 {
        self.edge_cells[e]
            .iter()
            .map(|&i| self.cell_edge_area_of(i, e))
            .sum()
    }

    pub fn cell_edge_area_of(&self, i: usize, e: usize) -> f64 {
        let k = self.edge_slot(i, e).expect("edge not in cell");
        self.cell_edge_area[i][k]
    }

    pub fn cell_vertex_area_of(&self, i: usize, v: usize) -> f64 {
        let k = self.vertex_slot(i, v).expect("vertex not in cell");
        self.cell_vertex_area[i][k]
    }

    pub fn edge_slot(&self, i: usize, e: usize) -> Option<usize> {
        self.cell_edges[i].iter().position(|&x| x == e)
    }

    pub fn vertex_slot(&self, i: usize, v: usize) -> Option<usize> {
        self.cell_vertices[i].iter().position(|&x| x == v)
    }

    /// The cell shared by two distinct edges, if any.
    pub fn shared_cell(&self, e: usize, f: usize) -> Option<usize> {
        let [a, b] = self.edge_cells[e];
        let [c, d] = self.edge_cells[f];
        if a == c || a == d {
            Some(a)
        } else if b == c || b == d {
            Some(b)
        } else {
            None
        }
    }

    /// CVE(e): union of the vertex sets of the two cells of `e`.
    pub fn cells_vertices_of_edge(&self, e: usize) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &i in &self.edge_cells[e] {
            for &v in &self.cell_vertices[i] {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// EVE(v, e, i) = EC(i) ∩ EV(v) − e.
    pub fn edges_at_vertex_in_cell(&self, v: usize, e: usize, i: usize) -> Vec<usize> {
        self.cell_edges[i]
            .iter()
            .copied()
            .filter(|&x| x != e && self.edge_vertices[x].contains(&v))
            .collect()
    }

    /// Maximum number of edges of any cell.
    pub fn max_cell_degree(&self) -> usize {
        self.cell_edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether every dual cell is a triangle.
    pub fn has_triangular_dual(&self) -> bool {
        self.vertex_cells.iter().all(|c| c.len() == 3)
    }

    /// Latitude of a point, for spherical meshes; zero on the plane.
    pub fn latitude(&self, p: &V3) -> f64 {
        match self.domain {
            Domain::Sphere { .. } => (p.z / p.norm()).clamp(-1.0, 1.0).asin(),
            Domain::Periodic { .. } => 0.0,
        }
    }
}
