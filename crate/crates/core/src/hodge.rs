//! Diagonal Hodge stars, the cell-to-vertex and cell-to-edge remaps, and the
//! linear Coriolis operator `W`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dec::{Dec, Field, FormKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Tolerance on the relative residual of `D2bar W = -R D2`.
pub const W_CONSTRAINT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Hodge {
    pub cell_area: Vec<f64>,
    /// `1 / A_i`.
    pub inv_cell_area: Vec<f64>,
    /// `1 / A_v`.
    pub inv_vertex_area: Vec<f64>,
    /// `le / de`.
    pub star: Vec<f64>,
    /// `A_iv / A_i`, aligned with `cell_vertices[i]`.
    pub cell_vertex_weight: Vec<Vec<f64>>,
    /// `A_ie / A_e` for the two cells of each edge.
    pub edge_cell_weight: Vec<[f64; 2]>,
    /// Rows of `R`: `(cell, A_iv / A_i)` for each cell around a vertex.
    vertex_rows: Vec<Vec<(usize, f64)>>,
    n_cells: usize,
}

impl Hodge {
    /// Fails on meshes without the orthogonality flag, where the diagonal
    /// star does not apply.
    pub fn new(mesh: &Mesh) -> Result<Self> {
        if !mesh.is_orthogonal() {
            return Err(Error::NonOrthogonal);
        }
        let cell_vertex_weight: Vec<Vec<f64>> = (0..mesh.n_cells())
            .map(|i| {
                mesh.cell_vertex_area[i]
                    .iter()
                    .map(|a| a / mesh.cell_area[i])
                    .collect()
            })
            .collect();
        let edge_cell_weight = (0..mesh.n_edges())
            .map(|e| {
                let [a, b] = mesh.edge_cells[e];
                let wa = mesh.cell_edge_area_of(a, e);
                let wb = mesh.cell_edge_area_of(b, e);
                [wa / (wa + wb), wb / (wa + wb)]
            })
            .collect();
        let vertex_rows = (0..mesh.n_vertices())
            .map(|v| {
                mesh.vertex_cells[v]
                    .iter()
                    .map(|&i| {
                        let k = mesh.vertex_slot(i, v).expect("vertex in cell ring");
                        (i, cell_vertex_weight[i][k])
                    })
                    .collect()
            })
            .collect();
        Ok(Hodge {
            cell_area: mesh.cell_area.clone(),
            inv_cell_area: mesh.cell_area.iter().map(|a| 1.0 / a).collect(),
            inv_vertex_area: mesh.vertex_area.iter().map(|a| 1.0 / a).collect(),
            star: (0..mesh.n_edges())
                .map(|e| mesh.edge_le[e] / mesh.edge_de[e])
                .collect(),
            cell_vertex_weight,
            edge_cell_weight,
            vertex_rows,
            n_cells: mesh.n_cells(),
        })
    }

    /// Divides rather than multiplying by `1 / A_i`, so that `A_i c / A_i`
    /// is exactly `c` for power-of-two `c`.
    pub fn i(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.cell_area).map(|(x, a)| x / a).collect()
    }

    pub fn j(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.inv_vertex_area).map(|(x, w)| x * w).collect()
    }

    pub fn h(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.star).map(|(x, w)| x * w).collect()
    }

    pub fn h_inv(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.star).map(|(x, w)| x / w).collect()
    }

    /// Cells to vertices: `sum_i A_iv / A_i f_i`.
    pub fn r(&self, f: &[f64]) -> Vec<f64> {
        self.vertex_rows
            .iter()
            .map(|row| row.iter().map(|&(i, w)| w * f[i]).sum())
            .collect()
    }

    /// Vertices to cells: the transpose of [`Hodge::r`].
    pub fn r_transpose(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cells];
        for (v, row) in self.vertex_rows.iter().enumerate() {
            for &(i, w) in row {
                out[i] += w * g[v];
            }
        }
        out
    }

    /// Cells to edges: `sum_i A_ie / A_e f_i`.
    pub fn phi(&self, mesh: &Mesh, f: &[f64]) -> Vec<f64> {
        (0..mesh.n_edges())
            .map(|e| {
                let [a, b] = mesh.edge_cells[e];
                let [wa, wb] = self.edge_cell_weight[e];
                wa * f[a] + wb * f[b]
            })
            .collect()
    }

    /// Edges to cells: the transpose of [`Hodge::phi`].
    pub fn phi_transpose(&self, mesh: &Mesh, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; mesh.n_cells()];
        for e in 0..mesh.n_edges() {
            let [a, b] = mesh.edge_cells[e];
            let [wa, wb] = self.edge_cell_weight[e];
            out[a] += wa * g[e];
            out[b] += wb * g[e];
        }
        out
    }

    pub fn hodge_i(&self, f: &Field) -> Result<Field> {
        f.expect(FormKind::PRIMAL_2)?;
        Ok(retag(FormKind::DUAL_0, self.i(f.values())))
    }

    pub fn hodge_j(&self, f: &Field) -> Result<Field> {
        f.expect(FormKind::DUAL_2)?;
        Ok(retag(FormKind::PRIMAL_0, self.j(f.values())))
    }

    pub fn hodge_h(&self, f: &Field) -> Result<Field> {
        f.expect(FormKind::DUAL_1)?;
        Ok(retag(FormKind::PRIMAL_1, self.h(f.values())))
    }

    pub fn remap_r(&self, f: &Field) -> Result<Field> {
        f.expect(FormKind::PRIMAL_2)?;
        Ok(retag(FormKind::DUAL_2, self.r(f.values())))
    }

    /// Edge values of a dual 0-form; the result is a plain edge scalar.
    pub fn remap_phi(&self, mesh: &Mesh, f: &Field) -> Result<Vec<f64>> {
        f.expect(FormKind::DUAL_0)?;
        Ok(self.phi(mesh, f.values()))
    }
}

fn retag(kind: FormKind, values: Vec<f64>) -> Field {
    // Lengths are preserved by the diagonal and remap operators.
    Field::from_parts(kind, values)
}

/// Antisymmetric edge-to-edge operator with `D2bar W = -R D2`.
#[derive(Clone, Debug)]
pub struct WOperator {
    /// Weights for `e < e'`; the `(e', e)` entry is the negation.
    pub pairs: BTreeMap<(usize, usize), f64>,
    rows: Vec<Vec<(usize, f64)>>,
    /// Relative residual of the defining constraint after assembly.
    pub constraint_residual: f64,
}

/// Local weights of one cell, indexed by ring positions `(j, k)`:
/// `n_j n_k (sum_{m=k+1..j} R_{v_m} - 1/2)`, walking counterclockwise from
/// edge `k` to edge `j`.
pub fn cell_w_weights(mesh: &Mesh, hodge: &Hodge, i: usize) -> Vec<Vec<f64>> {
    let edges = &mesh.cell_edges[i];
    let r = &hodge.cell_vertex_weight[i];
    let m = edges.len();
    let sign: Vec<f64> = edges.iter().map(|&e| mesh.n(e, i) as f64).collect();
    let mut w = vec![vec![0.0; m]; m];
    for k in 0..m {
        let mut partial = 0.0;
        for d in 1..m {
            let j = (k + d) % m;
            partial += r[j];
            if k < j {
                let val = sign[j] * sign[k] * (partial - 0.5);
                w[j][k] = val;
                w[k][j] = -val;
            }
        }
    }
    w
}

impl WOperator {
    pub fn build(mesh: &Mesh, dec: &Dec, hodge: &Hodge) -> Result<Self> {
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for i in 0..mesh.n_cells() {
            let w = cell_w_weights(mesh, hodge, i);
            let edges = &mesh.cell_edges[i];
            for (j, &ej) in edges.iter().enumerate() {
                for (k, &ek) in edges.iter().enumerate() {
                    if ej < ek {
                        *pairs.entry((ej, ek)).or_insert(0.0) += w[j][k];
                    }
                }
            }
        }
        let mut rows = vec![Vec::new(); mesh.n_edges()];
        for (&(a, b), &x) in &pairs {
            rows[a].push((b, x));
            rows[b].push((a, -x));
        }
        let mut op = WOperator {
            pairs,
            rows,
            constraint_residual: 0.0,
        };
        op.constraint_residual = op.matrix_constraint_residual(mesh, dec, hodge);
        if !(op.constraint_residual <= W_CONSTRAINT_TOLERANCE) {
            return Err(Error::WConstraint {
                residual: op.constraint_residual,
                tolerance: W_CONSTRAINT_TOLERANCE,
            });
        }
        Ok(op)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, w)| w * f[c]).sum())
            .collect()
    }

    pub fn weight(&self, e: usize, f: usize) -> f64 {
        if e < f {
            self.pairs.get(&(e, f)).copied().unwrap_or(0.0)
        } else {
            -self.pairs.get(&(f, e)).copied().unwrap_or(0.0)
        }
    }

    /// Number of stored neighbours of edge `e` (structural nonzeros).
    pub fn row_len(&self, e: usize) -> usize {
        self.rows[e].len()
    }

    /// Largest entry of `W + W^T` over the full matrix.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for (e, row) in self.rows.iter().enumerate() {
            for &(f, w) in row {
                defect = defect.max((w + self.weight(f, e)).abs());
            }
        }
        defect
    }

    /// `max |D2bar W + R D2| / max |R D2|` over matrix entries.
    pub fn matrix_constraint_residual(&self, mesh: &Mesh, dec: &Dec, hodge: &Hodge) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for v in 0..mesh.n_vertices() {
            let mut row: HashMap<usize, f64> = HashMap::new();
            for (e, t) in dec.d2bar.row(v) {
                for &(f, w) in &self.rows[e] {
                    *row.entry(f).or_insert(0.0) += t as f64 * w;
                }
            }
            for &i in &mesh.vertex_cells[v] {
                let k = mesh.vertex_slot(i, v).expect("vertex in cell ring");
                let r = hodge.cell_vertex_weight[i][k];
                for (f, n) in dec.d2.row(i) {
                    let x = r * n as f64;
                    scale = scale.max(x.abs());
                    *row.entry(f).or_insert(0.0) += x;
                }
            }
            worst = row.values().fold(worst, |m, x| m.max(x.abs()));
        }
        worst / scale
    }

    /// Relative residual of `D2bar W F + R D2 F` over random edge fields.
    pub fn random_constraint_residual(
        &self,
        dec: &Dec,
        hodge: &Hodge,
        trials: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let f: Vec<f64> = (0..dec.d2.n_cols)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let lhs = dec.d2bar.apply(&self.apply(&f));
            let rhs = hodge.r(&dec.d2.apply(&f));
            let scale = rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let res = lhs
                .iter()
                .zip(&rhs)
                .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
            worst = worst.max(res / scale);
        }
        worst
    }
}
