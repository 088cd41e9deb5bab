use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::Mesh;

/// Tolerance for the orthogonality flag, in radians.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;
const AREA_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation observed (integer checks report counts or
    /// absolute entries, metric checks relative errors).
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name,
            passed: residual <= tolerance,
            residual,
            tolerance,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} {:<4} residual {:.3e} (tolerance {:.1e})",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.residual,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

type Sparse = HashMap<(usize, usize), i64>;

fn max_abs(m: &Sparse) -> f64 {
    m.values().map(|x| x.abs()).max().unwrap_or(0) as f64
}

fn mismatches(a: &Sparse, b: &Sparse) -> f64 {
    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .filter(|k| a.get(k).copied().unwrap_or(0) != b.get(k).copied().unwrap_or(0))
        .count() as f64
}

fn add(m: &mut Sparse, r: usize, c: usize, x: i64) {
    *m.entry((r, c)).or_insert(0) += x;
}

fn product(a: &Sparse, b: &Sparse) -> Sparse {
    let mut rows_of_b: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for (&(r, c), &x) in b {
        rows_of_b.entry(r).or_default().push((c, x));
    }
    let mut out = Sparse::new();
    for (&(r, k), &x) in a {
        if let Some(row) = rows_of_b.get(&k) {
            for &(c, y) in row {
                add(&mut out, r, c, x * y);
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn transpose(a: &Sparse) -> Sparse {
    a.iter().map(|(&(r, c), &x)| ((c, r), x)).collect()
}

/// Run every structural and metric check on a mesh.
pub fn validate_mesh(mesh: &Mesh) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.push("topology", topology_violations(mesh) as f64, 0.0);

    // Incidence matrices assembled from the cell-side and vertex-side tables.
    let mut d1 = Sparse::new();
    let mut d1bar = Sparse::new();
    for e in 0..mesh.n_edges() {
        for k in 0..2 {
            add(&mut d1, e, mesh.edge_vertices[e][k], mesh.edge_vertex_sign[e][k] as i64);
            add(&mut d1bar, e, mesh.edge_cells[e][k], -(mesh.edge_cell_sign[e][k] as i64));
        }
    }
    let mut d2 = Sparse::new();
    for (i, edges) in mesh.cell_edges.iter().enumerate() {
        for &e in edges {
            add(&mut d2, i, e, mesh.n(e, i) as i64);
        }
    }
    let mut d2bar = Sparse::new();
    for (v, edges) in mesh.vertex_edges.iter().enumerate() {
        for &e in edges {
            add(&mut d2bar, v, e, mesh.t(e, v) as i64);
        }
    }
    report.push("d2_d1", max_abs(&product(&d2, &d1)), 0.0);
    report.push("d2bar_d1bar", max_abs(&product(&d2bar, &d1bar)), 0.0);
    let neg_d1bar: Sparse = d1bar.iter().map(|(&k, &x)| (k, -x)).collect();
    report.push("d2t_minus_d1bar", mismatches(&transpose(&d2), &neg_d1bar), 0.0);
    report.push("d2bar_t_d1", mismatches(&transpose(&d2bar), &d1), 0.0);

    let total = mesh.total_area();
    let sum_ai: f64 = mesh.cell_area.iter().sum();
    let sum_av: f64 = mesh.vertex_area.iter().sum();
    report.push("cell_area_total", (sum_ai - total).abs() / total, AREA_TOLERANCE);
    report.push("dual_area_total", (sum_av - total).abs() / total, AREA_TOLERANCE);
    let mut aiv_err: f64 = 0.0;
    let mut aie_err: f64 = 0.0;
    for i in 0..mesh.n_cells() {
        let a = mesh.cell_area[i];
        let siv: f64 = mesh.cell_vertex_area[i].iter().sum();
        let sie: f64 = mesh.cell_edge_area[i].iter().sum();
        aiv_err = aiv_err.max((siv - a).abs() / a.abs());
        aie_err = aie_err.max((sie - a).abs() / a.abs());
    }
    report.push("cell_vertex_partition", aiv_err, AREA_TOLERANCE);
    report.push("cell_edge_partition", aie_err, AREA_TOLERANCE);

    report.push(
        "orthogonality",
        mesh.max_orthogonality_defect,
        ORTHOGONALITY_TOLERANCE,
    );

    let min_positive = mesh
        .cell_area
        .iter()
        .chain(&mesh.vertex_area)
        .chain(&mesh.edge_le)
        .chain(&mesh.edge_de)
        .chain(mesh.cell_edge_area.iter().flatten())
        .chain(mesh.cell_vertex_area.iter().flatten())
        .fold(f64::INFINITY, |m, &x| m.min(x));
    report.checks.push(CheckResult {
        name: "positivity",
        passed: min_positive > 0.0,
        residual: (-min_positive).max(0.0),
        tolerance: 0.0,
    });

    report.push("stencils", stencil_violations(mesh) as f64, 0.0);
    report
}

fn topology_violations(mesh: &Mesh) -> usize {
    let mut bad = 0;
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edge_cells[e];
        let [v, w] = mesh.edge_vertices[e];
        if a == b || v == w {
            bad += 1;
        }
        let [s, t] = mesh.edge_cell_sign[e];
        if s * t != -1 || s.abs() != 1 {
            bad += 1;
        }
        let [s, t] = mesh.edge_vertex_sign[e];
        if s * t != -1 || s.abs() != 1 {
            bad += 1;
        }
        for &i in &[a, b] {
            if !mesh.cell_edges[i].contains(&e) {
                bad += 1;
            }
        }
        for &x in &[v, w] {
            if !mesh.vertex_edges[x].contains(&e) {
                bad += 1;
            }
        }
    }
    for i in 0..mesh.n_cells() {
        let edges = &mesh.cell_edges[i];
        let verts = &mesh.cell_vertices[i];
        if edges.len() != verts.len() {
            bad += 1;
            continue;
        }
        let m = edges.len();
        for k in 0..m {
            let ev = mesh.edge_vertices[edges[k]];
            let want = [verts[k], verts[(k + 1) % m]];
            if !(ev == want || ev == [want[1], want[0]]) {
                bad += 1;
            }
            if !mesh.vertex_cells[verts[k]].contains(&i) {
                bad += 1;
            }
        }
    }
    for v in 0..mesh.n_vertices() {
        let cells = &mesh.vertex_cells[v];
        let edges = &mesh.vertex_edges[v];
        if cells.len() != edges.len() {
            bad += 1;
            continue;
        }
        let m = cells.len();
        for k in 0..m {
            let ec = mesh.edge_cells[edges[k]];
            let want = [cells[k], cells[(k + 1) % m]];
            if !(ec == want || ec == [want[1], want[0]]) {
                bad += 1;
            }
        }
    }
    bad
}

fn stencil_violations(mesh: &Mesh) -> usize {
    let mut bad = 0;
    // Cell-to-edge incidence rebuilt from the edge side only.
    let mut edges_of_cell: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_cells()];
    for (f, cells) in mesh.edge_cells.iter().enumerate() {
        for &i in cells {
            edges_of_cell[i].push(f);
        }
    }
    for e in 0..mesh.n_edges() {
        let cells = mesh.edge_cells[e];
        let ecp: BTreeSet<usize> = mesh.edge_neighbors[e].iter().copied().collect();
        if ecp.len() != mesh.edge_neighbors[e].len() {
            bad += 1;
        }
        let expected: BTreeSet<usize> = cells
            .iter()
            .flat_map(|&i| edges_of_cell[i].iter().copied())
            .filter(|&f| f != e)
            .collect();
        let local: BTreeSet<usize> = cells
            .iter()
            .flat_map(|&i| mesh.cell_edges[i].iter().copied())
            .filter(|&f| f != e)
            .collect();
        if ecp != local || ecp != expected {
            bad += 1;
        }

        let cve: BTreeSet<usize> = mesh.cells_vertices_of_edge(e).into_iter().collect();
        let via_vertices: BTreeSet<usize> = cells
            .iter()
            .flat_map(|&i| mesh.cell_vertices[i].iter().copied())
            .filter(|&v| mesh.vertex_cells[v].iter().any(|c| cells.contains(c)))
            .collect();
        if cve != via_vertices {
            bad += 1;
        }

        for &i in &cells {
            for &v in &mesh.cell_vertices[i] {
                let eve: BTreeSet<usize> =
                    mesh.edges_at_vertex_in_cell(v, e, i).into_iter().collect();
                let def: BTreeSet<usize> = mesh.vertex_edges[v]
                    .iter()
                    .copied()
                    .filter(|f| *f != e && mesh.cell_edges[i].contains(f))
                    .collect();
                if eve != def {
                    bad += 1;
                }
            }
        }
    }
    bad
}
