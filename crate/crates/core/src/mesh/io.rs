//! Mesh interchange file.
//!
//! ```text
//! swcons-mesh 1
//! label <free text>
//! domain periodic <ax> <ay> <bx> <by>   |   domain sphere <radius>
//! counts <cells> <edges> <vertices>
//! orthogonality_defect <radians>
//! section cell_centers <cells>          x y z
//! section vertex_positions <vertices>   x y z
//! section edge_points <edges>           x y z
//! section edge_normals <edges>          x y z
//! section cell_edges <cells>            k e_0 .. e_k-1
//! section cell_vertices <cells>         k v_0 .. v_k-1
//! section vertex_edges <vertices>       k e_0 .. e_k-1
//! section vertex_cells <vertices>       k i_0 .. i_k-1
//! section edge_cells <edges>            i_0 i_1 n(e,i_0) n(e,i_1)
//! section edge_vertices <edges>         v_0 v_1 t(e,v_0) t(e,v_1)
//! section edge_neighbors <edges>        k e_0 .. e_k-1
//! section cell_area <cells>             A_i
//! section vertex_area <vertices>        A_v
//! section edge_le <edges>               le
//! section edge_de <edges>               de
//! section cell_edge_area <cells>        k A_ie aligned with cell_edges
//! section cell_vertex_area <cells>      k A_iv aligned with cell_vertices
//! ```

use std::path::Path;

use super::geometry::V3;
use super::{Domain, Mesh};
use crate::error::Result;
use crate::textio::{ragged_row, real, real_row, TableReader, TableWriter};

const KIND: &str = "swcons-mesh";

fn point_row(p: &V3) -> String {
    format!("{} {} {}", real(p.x), real(p.y), real(p.z))
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut w = TableWriter::new(KIND, 1);
    w.header("label", &mesh.label);
    match &mesh.domain {
        Domain::Periodic { period_a, period_b } => w.header(
            "domain",
            &format!(
                "periodic {} {} {} {}",
                real(period_a[0]),
                real(period_a[1]),
                real(period_b[0]),
                real(period_b[1])
            ),
        ),
        Domain::Sphere { radius } => w.header("domain", &format!("sphere {}", real(*radius))),
    }
    w.header(
        "counts",
        &format!("{} {} {}", mesh.n_cells(), mesh.n_edges(), mesh.n_vertices()),
    );
    w.header("orthogonality_defect", &real(mesh.max_orthogonality_defect));
    w.section("cell_centers", mesh.cell_centers.iter().map(point_row));
    w.section("vertex_positions", mesh.vertex_positions.iter().map(point_row));
    w.section("edge_points", mesh.edge_points.iter().map(point_row));
    w.section("edge_normals", mesh.edge_normals.iter().map(point_row));
    w.section("cell_edges", mesh.cell_edges.iter().map(|r| ragged_row(r)));
    w.section("cell_vertices", mesh.cell_vertices.iter().map(|r| ragged_row(r)));
    w.section("vertex_edges", mesh.vertex_edges.iter().map(|r| ragged_row(r)));
    w.section("vertex_cells", mesh.vertex_cells.iter().map(|r| ragged_row(r)));
    w.section(
        "edge_cells",
        (0..mesh.n_edges()).map(|e| {
            let [a, b] = mesh.edge_cells[e];
            let [s, t] = mesh.edge_cell_sign[e];
            format!("{a} {b} {s} {t}")
        }),
    );
    w.section(
        "edge_vertices",
        (0..mesh.n_edges()).map(|e| {
            let [a, b] = mesh.edge_vertices[e];
            let [s, t] = mesh.edge_vertex_sign[e];
            format!("{a} {b} {s} {t}")
        }),
    );
    w.section("edge_neighbors", mesh.edge_neighbors.iter().map(|r| ragged_row(r)));
    w.reals("cell_area", &mesh.cell_area);
    w.reals("vertex_area", &mesh.vertex_area);
    w.reals("edge_le", &mesh.edge_le);
    w.reals("edge_de", &mesh.edge_de);
    w.section("cell_edge_area", mesh.cell_edge_area.iter().map(|r| real_row(r)));
    w.section("cell_vertex_area", mesh.cell_vertex_area.iter().map(|r| real_row(r)));
    w.save(path)
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let r = TableReader::open(path, KIND)?;
    let label = r.header("label")?.join(" ");
    let dom = r.header("domain")?;
    let domain = match dom.first().map(String::as_str) {
        Some("periodic") if dom.len() == 5 => {
            let v: Vec<f64> = dom[1..]
                .iter()
                .map(|t| r.parse_token(0, t))
                .collect::<Result<_>>()?;
            Domain::Periodic {
                period_a: [v[0], v[1]],
                period_b: [v[2], v[3]],
            }
        }
        Some("sphere") if dom.len() == 2 => Domain::Sphere {
            radius: r.parse_token(0, &dom[1])?,
        },
        _ => return Err(r.error(0, "malformed domain header")),
    };
    let counts: Vec<usize> = r
        .header("counts")?
        .iter()
        .map(|t| r.parse_token(0, t))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(r.error(0, "malformed counts header"));
    }
    let defect = r.parse_token(0, &r.header("orthogonality_defect")?.join(""))?;

    let points = |name: &str| -> Result<Vec<V3>> {
        Ok(r.fixed::<f64>(name, 3)?
            .into_iter()
            .map(|p| V3::new(p[0], p[1], p[2]))
            .collect())
    };
    let pairs = |name: &str| -> Result<(Vec<[usize; 2]>, Vec<[i8; 2]>)> {
        let rows = r.fixed::<i64>(name, 4)?;
        let mut ids = Vec::with_capacity(rows.len());
        let mut signs = Vec::with_capacity(rows.len());
        for row in rows {
            if row[0] < 0 || row[1] < 0 {
                return Err(r.error(r.section(name)?.line, "negative index"));
            }
            ids.push([row[0] as usize, row[1] as usize]);
            signs.push([row[2] as i8, row[3] as i8]);
        }
        Ok((ids, signs))
    };
    let (edge_cells, edge_cell_sign) = pairs("edge_cells")?;
    let (edge_vertices, edge_vertex_sign) = pairs("edge_vertices")?;
    let mesh = Mesh {
        label,
        domain,
        cell_centers: points("cell_centers")?,
        vertex_positions: points("vertex_positions")?,
        edge_points: points("edge_points")?,
        edge_normals: points("edge_normals")?,
        cell_edges: r.ragged("cell_edges")?,
        cell_vertices: r.ragged("cell_vertices")?,
        edge_cells,
        edge_vertices,
        vertex_edges: r.ragged("vertex_edges")?,
        vertex_cells: r.ragged("vertex_cells")?,
        edge_cell_sign,
        edge_vertex_sign,
        cell_area: r.reals("cell_area")?,
        vertex_area: r.reals("vertex_area")?,
        edge_le: r.reals("edge_le")?,
        edge_de: r.reals("edge_de")?,
        cell_edge_area: r.ragged("cell_edge_area")?,
        cell_vertex_area: r.ragged("cell_vertex_area")?,
        edge_neighbors: r.ragged("edge_neighbors")?,
        max_orthogonality_defect: defect,
    };
    let sizes = [
        (mesh.n_cells(), counts[0], "cells"),
        (mesh.n_edges(), counts[1], "edges"),
        (mesh.n_vertices(), counts[2], "vertices"),
        (mesh.cell_edges.len(), counts[0], "cell_edges"),
        (mesh.cell_area.len(), counts[0], "cell_area"),
        (mesh.vertex_cells.len(), counts[2], "vertex_cells"),
        (mesh.vertex_area.len(), counts[2], "vertex_area"),
        (mesh.edge_le.len(), counts[1], "edge_le"),
        (mesh.edge_neighbors.len(), counts[1], "edge_neighbors"),
    ];
    for (got, want, what) in sizes {
        if got != want {
            return Err(r.error(0, format!("{what} has {got} rows, expected {want}")));
        }
    }
    let bounds = mesh.cell_edges.iter().flatten().all(|&e| e < counts[1])
        && mesh.cell_vertices.iter().flatten().all(|&v| v < counts[2])
        && mesh.edge_cells.iter().flatten().all(|&i| i < counts[0])
        && mesh.edge_vertices.iter().flatten().all(|&v| v < counts[2])
        && mesh.vertex_edges.iter().flatten().all(|&e| e < counts[1])
        && mesh.vertex_cells.iter().flatten().all(|&i| i < counts[0])
        && mesh.edge_neighbors.iter().flatten().all(|&e| e < counts[1]);
    if !bounds {
        return Err(r.error(0, "index out of range"));
    }
    Ok(mesh)
}
