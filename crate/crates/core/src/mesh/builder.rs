//! Generic mesh assembly from per-cell vertex rings.

use std::collections::HashMap;

use super::geometry::{
    great_circle_distance, great_circle_intersection, planar_line_intersection,
    planar_triangle_area, right_angle_defect, spherical_triangle_area, V3,
};
use super::{Domain, Mesh};
use crate::error::{Error, Result};

/// Connectivity input for [`assemble`].
///
/// On the plane, ring positions are unwrapped copies of the canonical
/// vertex positions lying next to the (canonical) cell center; they differ
/// from the canonical positions by integer combinations of the periods. On
/// the sphere all positions are unit vectors and ring positions equal the
/// canonical ones.
pub(crate) struct RawMesh {
    pub label: String,
    pub domain: Domain,
    pub cell_centers: Vec<V3>,
    pub vertex_positions: Vec<V3>,
    /// Counterclockwise ring of `(vertex id, unwrapped position)` per cell.
    pub rings: Vec<Vec<(usize, V3)>>,
}

struct Lattice {
    inv: [[f64; 2]; 2],
}

impl Lattice {
    fn new(domain: &Domain) -> Option<Self> {
        match domain {
            Domain::Periodic { period_a, period_b } => {
                let det = period_a[0] * period_b[1] - period_a[1] * period_b[0];
                Some(Lattice {
                    inv: [
                        [period_b[1] / det, -period_b[0] / det],
                        [-period_a[1] / det, period_a[0] / det],
                    ],
                })
            }
            Domain::Sphere { .. } => None,
        }
    }

    fn shift_of(&self, d: &V3) -> (i64, i64) {
        let ka = self.inv[0][0] * d.x + self.inv[0][1] * d.y;
        let kb = self.inv[1][0] * d.x + self.inv[1][1] * d.y;
        (ka.round() as i64, kb.round() as i64)
    }
}

struct Measure {
    sphere: bool,
    radius: f64,
}

impl Measure {
    fn tri(&self, a: &V3, b: &V3, c: &V3) -> f64 {
        if self.sphere {
            self.radius * self.radius * spherical_triangle_area(a, b, c)
        } else {
            planar_triangle_area(a, b, c)
        }
    }

    fn dist(&self, a: &V3, b: &V3) -> f64 {
        if self.sphere {
            self.radius * great_circle_distance(a, b)
        } else {
            (b - a).norm()
        }
    }
}

pub(crate) fn assemble(raw: RawMesh) -> Result<Mesh> {
    let RawMesh {
        label,
        domain,
        cell_centers,
        vertex_positions,
        rings,
    } = raw;
    let n_cells = cell_centers.len();
    let n_vertices = vertex_positions.len();
    if rings.len() != n_cells {
        return Err(Error::DegenerateMesh("ring count differs from cell count".into()));
    }
    let lattice = Lattice::new(&domain);
    let (sphere, radius) = match domain {
        Domain::Sphere { radius } => (true, radius),
        Domain::Periodic { .. } => (false, 1.0),
    };
    let measure = Measure { sphere, radius };

    for (i, ring) in rings.iter().enumerate() {
        if ring.len() < 3 {
            return Err(Error::DegenerateMesh(format!(
                "cell {i} has {} vertices",
                ring.len()
            )));
        }
        for (k, &(v, _)) in ring.iter().enumerate() {
            if v >= n_vertices {
                return Err(Error::DegenerateMesh(format!("cell {i} references vertex {v}")));
            }
            if ring[..k].iter().any(|&(w, _)| w == v) {
                return Err(Error::DegenerateMesh(format!(
                    "cell {i} visits vertex {v} twice"
                )));
            }
        }
    }

    let shift = |v: usize, p: &V3| -> (i64, i64) {
        match &lattice {
            Some(l) => l.shift_of(&(p - vertex_positions[v])),
            None => (0, 0),
        }
    };

    // Edge discovery.
    let mut keys: HashMap<(usize, usize, i64, i64), usize> = HashMap::new();
    let mut incidences: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut cell_edges: Vec<Vec<usize>> = Vec::with_capacity(n_cells);
    for (i, ring) in rings.iter().enumerate() {
        let m = ring.len();
        let mut edges = Vec::with_capacity(m);
        for k in 0..m {
            let (va, pa) = &ring[k];
            let (vb, pb) = &ring[(k + 1) % m];
            let sa = shift(*va, pa);
            let sb = shift(*vb, pb);
            let rel = (sb.0 - sa.0, sb.1 - sa.1);
            let key = if va < vb {
                (*va, *vb, rel.0, rel.1)
            } else {
                (*vb, *va, -rel.0, -rel.1)
            };
            let next = incidences.len();
            let e = *keys.entry(key).or_insert(next);
            if e == next {
                incidences.push(Vec::new());
            }
            incidences[e].push((i, k));
            edges.push(e);
        }
        cell_edges.push(edges);
    }
    let n_edges = incidences.len();

    let mut edge_cells = Vec::with_capacity(n_edges);
    let mut edge_slots = Vec::with_capacity(n_edges);
    for (e, inc) in incidences.iter().enumerate() {
        if inc.len() != 2 {
            return Err(Error::DegenerateMesh(format!(
                "edge {e} has {} adjacent cells",
                inc.len()
            )));
        }
        let (mut lo, mut hi) = (inc[0], inc[1]);
        if lo.0 == hi.0 {
            return Err(Error::DegenerateMesh(format!(
                "edge {e} has cell {} on both sides",
                lo.0
            )));
        }
        if hi.0 < lo.0 {
            std::mem::swap(&mut lo, &mut hi);
        }
        edge_cells.push([lo.0, hi.0]);
        edge_slots.push([lo.1, hi.1]);
    }

    let ring_vertex = |i: usize, k: usize| -> &(usize, V3) {
        let ring = &rings[i];
        &ring[k % ring.len()]
    };

    let mut edge_vertices = Vec::with_capacity(n_edges);
    for e in 0..n_edges {
        let [lo, hi] = edge_cells[e];
        let [klo, khi] = edge_slots[e];
        let a = ring_vertex(lo, klo).0;
        let b = ring_vertex(lo, klo + 1).0;
        let ha = ring_vertex(hi, khi).0;
        let hb = ring_vertex(hi, khi + 1).0;
        if ha != b || hb != a {
            return Err(Error::DegenerateMesh(format!(
                "cells {lo} and {hi} traverse edge {e} in the same direction"
            )));
        }
        edge_vertices.push([a, b]);
    }
    let edge_cell_sign = vec![[1i8, -1i8]; n_edges];
    let edge_vertex_sign = vec![[-1i8, 1i8]; n_edges];

    let cell_vertices: Vec<Vec<usize>> = rings
        .iter()
        .map(|r| r.iter().map(|&(v, _)| v).collect())
        .collect();

    // Vertex stencils by walking counterclockwise across incoming edges.
    let mut vertex_incidence: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
    for (i, verts) in cell_vertices.iter().enumerate() {
        for (k, &v) in verts.iter().enumerate() {
            vertex_incidence[v].push((i, k));
        }
    }
    let mut vertex_cells = Vec::with_capacity(n_vertices);
    let mut vertex_edges = Vec::with_capacity(n_vertices);
    for (v, inc) in vertex_incidence.iter().enumerate() {
        if inc.len() < 3 {
            return Err(Error::DegenerateMesh(format!(
                "vertex {v} touches {} cells",
                inc.len()
            )));
        }
        let mut cells = Vec::with_capacity(inc.len());
        let mut edges = Vec::with_capacity(inc.len());
        let (mut i, mut k) = inc[0];
        for _ in 0..inc.len() {
            let m = cell_edges[i].len();
            let incoming = cell_edges[i][(k + m - 1) % m];
            cells.push(i);
            edges.push(incoming);
            let [a, b] = edge_cells[incoming];
            let j = if a == i { b } else { a };
            let Some(&(_, kj)) = inc.iter().find(|&&(c, _)| c == j) else {
                return Err(Error::DegenerateMesh(format!(
                    "vertex {v} ring is not closed"
                )));
            };
            i = j;
            k = kj;
        }
        if (i, k) != inc[0] {
            return Err(Error::DegenerateMesh(format!("vertex {v} ring is not closed")));
        }
        let mut sorted = cells.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cells.len() {
            return Err(Error::DegenerateMesh(format!(
                "vertex {v} meets a cell twice"
            )));
        }
        vertex_cells.push(cells);
        vertex_edges.push(edges);
    }

    // Edge geometry in the frame of the lower cell.
    let frame_offset = |i: usize, k: usize, v: usize, p_ref: &V3| -> V3 {
        // Offset that maps positions in the reference frame into cell i's frame.
        let ring = &rings[i];
        let m = ring.len();
        let (w, p) = &ring[k % m];
        debug_assert_eq!(*w, v);
        p - p_ref
    };

    let mut edge_points = Vec::with_capacity(n_edges);
    let mut edge_normals = Vec::with_capacity(n_edges);
    let mut edge_le = Vec::with_capacity(n_edges);
    let mut edge_de = Vec::with_capacity(n_edges);
    let mut max_defect: f64 = 0.0;
    for e in 0..n_edges {
        let [lo, hi] = edge_cells[e];
        let [klo, khi] = edge_slots[e];
        let pa = ring_vertex(lo, klo).1;
        let pb = ring_vertex(lo, klo + 1).1;
        let xlo = cell_centers[lo];
        // Vertex b is at slot khi of the high cell.
        let off = frame_offset(hi, khi, edge_vertices[e][1], &pb);
        let xhi = cell_centers[hi] - off;
        let (c, normal, defect) = if sphere {
            let c = great_circle_intersection(&pa, &pb, &xlo, &xhi);
            let n = xlo.cross(&xhi).cross(&c).normalize();
            let defect = right_angle_defect(&pa.cross(&pb), &xlo.cross(&xhi));
            (c, n, defect)
        } else {
            let c = planar_line_intersection(&pa, &pb, &xlo, &xhi);
            let n = (xhi - xlo).normalize();
            (c, n, right_angle_defect(&(pb - pa), &(xhi - xlo)))
        };
        max_defect = max_defect.max(defect);
        edge_le.push(measure.dist(&pa, &pb));
        edge_de.push(measure.dist(&xlo, &xhi));
        edge_points.push(c);
        edge_normals.push(normal);
    }

    // Edge point of edge e seen from cell i, ring slot k.
    let edge_point_in = |i: usize, k: usize, e: usize| -> V3 {
        let [lo, _] = edge_cells[e];
        if lo == i || sphere {
            return edge_points[e];
        }
        let klo = edge_slots[e][0];
        let a = edge_vertices[e][0];
        // In the high cell the edge runs b -> a, so a sits at slot k + 1.
        let pa_lo = ring_vertex(lo, klo).1;
        edge_points[e] + frame_offset(i, k + 1, a, &pa_lo)
    };

    let mut cell_area = Vec::with_capacity(n_cells);
    let mut cell_edge_area = Vec::with_capacity(n_cells);
    let mut cell_vertex_area = Vec::with_capacity(n_cells);
    for i in 0..n_cells {
        let ring = &rings[i];
        let m = ring.len();
        let x = cell_centers[i];
        let points: Vec<V3> = (0..m)
            .map(|k| edge_point_in(i, k, cell_edges[i][k]))
            .collect();
        let aie: Vec<f64> = (0..m)
            .map(|k| measure.tri(&x, &ring[k].1, &ring[(k + 1) % m].1))
            .collect();
        let aiv: Vec<f64> = (0..m)
            .map(|k| {
                let prev = &points[(k + m - 1) % m];
                let next = &points[k];
                let p = &ring[k].1;
                measure.tri(&x, prev, p) + measure.tri(&x, p, next)
            })
            .collect();
        cell_area.push(aie.iter().sum());
        cell_edge_area.push(aie);
        cell_vertex_area.push(aiv);
    }

    let mut vertex_area = Vec::with_capacity(n_vertices);
    for v in 0..n_vertices {
        let p = vertex_positions[v];
        let centers: Vec<V3> = vertex_cells[v]
            .iter()
            .map(|&i| {
                let k = cell_vertices[i].iter().position(|&w| w == v).unwrap();
                cell_centers[i] - (rings[i][k].1 - p)
            })
            .collect();
        let m = centers.len();
        let area = (0..m)
            .map(|k| measure.tri(&p, &centers[k], &centers[(k + 1) % m]))
            .sum();
        vertex_area.push(area);
    }

    let edge_neighbors = (0..n_edges)
        .map(|e| {
            let mut out = Vec::new();
            for s in 0..2 {
                let i = edge_cells[e][s];
                let k = edge_slots[e][s];
                let edges = &cell_edges[i];
                let m = edges.len();
                out.extend((1..m).map(|d| edges[(k + d) % m]));
            }
            out
        })
        .collect();

    let scale = if sphere { radius } else { 1.0 };
    let scale_all = |v: Vec<V3>| -> Vec<V3> { v.into_iter().map(|p| p * scale).collect() };

    Ok(Mesh {
        label,
        domain,
        cell_centers: scale_all(cell_centers),
        vertex_positions: scale_all(vertex_positions),
        edge_points: scale_all(edge_points),
        edge_normals,
        cell_edges,
        cell_vertices,
        edge_cells,
        edge_vertices,
        vertex_edges,
        vertex_cells,
        edge_cell_sign,
        edge_vertex_sign,
        cell_area,
        vertex_area,
        edge_le,
        edge_de,
        cell_edge_area,
        cell_vertex_area,
        edge_neighbors,
        max_orthogonality_defect: max_defect,
    })
}
