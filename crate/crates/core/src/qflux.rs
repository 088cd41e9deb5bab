//! The nonlinear potential-vorticity flux operator `Q`.
//!
//! `Q` maps a primal mass flux `F` and vertex potential vorticity `q` to a
//! dual edge field,
//!
//! ```text
//! (Q F)_e = sum_{e' in ECP(e)} sum_{v in VC(i)} q_v alpha(e, e', v) F_e'
//! ```
//!
//! where `i` is the cell shared by `e` and `e'`. The coefficients are
//! antisymmetric in `(e, e')` and chosen so that the enstrophy condition
//! `D1bar R^T (q^2 / 2) + Q(q) D1 q = 0` holds for every `q`. Matching the
//! coefficients of each `q_v q_v'` gives one small least-squares problem
//! per cell once the cross-cell terms are split with the constant `C`.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dec::{Dec, Field, FormKind};
use crate::error::{Error, Result};
use crate::hodge::{Hodge, WOperator};
use crate::linalg::{cgls, max_abs};
use crate::mesh::Mesh;
use crate::textio::{real, TableReader, TableWriter};

/// Splitting constant for coefficients shared by the two cells of an edge.
pub const DECOUPLING_CONSTANT: f64 = -1.0 / 6.0;
pub const ALPHA_RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Largest mesh accepted by the coupled global solve.
pub const COUPLED_MAX_CELLS: usize = 2000;
/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMode {
    /// One least-squares problem per cell.
    Decoupled,
    /// One global least-squares problem over all cells.
    Coupled,
}

/// Dense least-squares problem for the coefficients of one cell.
///
/// Columns are ordered by edge pair (ring positions `j < k`), then by ring
/// vertex. Rows are ordered by ring edge, then by vertex pair `m <= p`.
#[derive(Clone, Debug)]
pub struct CellSystem {
    pub cell: usize,
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
    /// Ring positions of each unknown's edge pair.
    pub local_pairs: Vec<(usize, usize)>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// `(ring edge, m, p)` for every row.
    pub row_keys: Vec<(usize, usize, usize)>,
}

impl CellSystem {
    pub fn n_equations(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_unknowns(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn assemble_cell_system(mesh: &Mesh, hodge: &Hodge, i: usize) -> CellSystem {
    assemble_with_constant(mesh, hodge, i, DECOUPLING_CONSTANT)
}

fn assemble_with_constant(mesh: &Mesh, hodge: &Hodge, i: usize, c: f64) -> CellSystem {
    let edges = mesh.cell_edges[i].clone();
    let vertices = mesh.cell_vertices[i].clone();
    let r = &hodge.cell_vertex_weight[i];
    let m_e = edges.len();
    let n_v = vertices.len();
    let local_pairs: Vec<(usize, usize)> = (0..m_e)
        .flat_map(|j| ((j + 1)..m_e).map(move |k| (j, k)))
        .collect();
    let mut pair_index = HashMap::new();
    for (p, &(j, k)) in local_pairs.iter().enumerate() {
        pair_index.insert((j, k), p);
    }
    // Column and sign of alpha(e_a, e_b, v_m) with the global-id ordering.
    let column = |a: usize, b: usize, m: usize| -> (usize, f64) {
        let p = pair_index[&(a.min(b), a.max(b))];
        // Stored values refer to the pair with the lower global id first.
        let sign = if edges[a] < edges[b] { 1.0 } else { -1.0 };
        (p * n_v + m, sign)
    };
    let t = |edge_slot: usize, m: usize| -> f64 { mesh.t(edges[edge_slot], vertices[m]) as f64 };
    // Ring edges touching vertex m other than edge j.
    let eve = |m: usize, j: usize| -> Vec<usize> {
        [(m + m_e - 1) % m_e, m]
            .into_iter()
            .filter(|&x| x != j)
            .collect()
    };

    let n_rows = m_e * n_v * (n_v + 1) / 2;
    let n_cols = n_v * local_pairs.len();
    let mut matrix = DMatrix::zeros(n_rows, n_cols);
    let mut rhs = DVector::zeros(n_rows);
    let mut row_keys = Vec::with_capacity(n_rows);
    let mut row = 0;
    for j in 0..m_e {
        let n_e = mesh.n(edges[j], i) as f64;
        let in_edge = |m: usize| m == j || m == (j + 1) % m_e;
        for m in 0..n_v {
            for p in m..n_v {
                if m == p {
                    for ep in eve(m, j) {
                        let (col, s) = column(j, ep, m);
                        matrix[(row, col)] += s * t(ep, m);
                    }
                    rhs[row] = n_e * (0.5 * r[m] + if in_edge(m) { c } else { 0.0 });
                } else {
                    for ep in eve(p, j) {
                        let (col, s) = column(j, ep, m);
                        matrix[(row, col)] += s * t(ep, p);
                    }
                    for ep in eve(m, j) {
                        let (col, s) = column(j, ep, p);
                        matrix[(row, col)] += s * t(ep, m);
                    }
                    if in_edge(m) && in_edge(p) {
                        rhs[row] = n_e * c;
                    }
                }
                row_keys.push((j, m, p));
                row += 1;
            }
        }
    }
    CellSystem {
        cell: i,
        edges,
        vertices,
        local_pairs,
        matrix,
        rhs,
        row_keys,
    }
}

/// Coefficients of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAlpha {
    pub cell: usize,
    /// Global edge pairs `(e, e')` with `e < e'`.
    pub pairs: Vec<(usize, usize)>,
    pub vertices: Vec<usize>,
    /// `alpha(e, e', v)` for `pairs[p]` and `vertices[m]` at `p * n_v + m`.
    pub values: Vec<f64>,
    /// Relative least-squares residual `||A x - b|| / ||b||`.
    pub residual: f64,
    pub rank: usize,
}

impl CellAlpha {
    fn from_local(sys: &CellSystem, x: &DVector<f64>, residual: f64, rank: usize) -> Self {
        let n_v = sys.vertices.len();
        let mut pairs = Vec::with_capacity(sys.local_pairs.len());
        let mut values = Vec::with_capacity(x.len());
        for (p, &(j, k)) in sys.local_pairs.iter().enumerate() {
            let (a, b) = (sys.edges[j], sys.edges[k]);
            pairs.push((a.min(b), a.max(b)));
            values.extend((0..n_v).map(|m| x[p * n_v + m]));
        }
        CellAlpha {
            cell: sys.cell,
            pairs,
            vertices: sys.vertices.clone(),
            values,
            residual,
            rank,
        }
    }

    pub fn value(&self, pair: usize, m: usize) -> f64 {
        self.values[pair * self.vertices.len() + m]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaCoefficients {
    pub mode: AlphaMode,
    pub mesh_label: String,
    pub counts: [usize; 3],
    pub cells: Vec<CellAlpha>,
}

/// Minimum-norm least-squares solve through the SVD.
fn solve_min_norm(sys: &CellSystem) -> (DVector<f64>, f64, usize) {
    let svd = sys.matrix.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = RANK_TOLERANCE * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let x = svd.solve(&sys.rhs, eps).expect("SVD with both factors");
    let res = (&sys.matrix * &x - &sys.rhs).norm();
    let bnorm = sys.rhs.norm();
    let rel = if bnorm > 0.0 { res / bnorm } else { res };
    (x, rel, rank)
}

fn mesh_counts(mesh: &Mesh) -> [usize; 3] {
    [mesh.n_cells(), mesh.n_edges(), mesh.n_vertices()]
}

/// Solve every per-cell problem. Fails if any residual exceeds the
/// tolerance.
pub fn solve_alpha(mesh: &Mesh, hodge: &Hodge) -> Result<AlphaCoefficients> {
    let alpha = solve_alpha_unchecked(mesh, hodge);
    alpha.check_residuals(ALPHA_RESIDUAL_TOLERANCE)?;
    Ok(alpha)
}

/// Per-cell solve that keeps residuals for inspection instead of failing.
pub fn solve_alpha_unchecked(mesh: &Mesh, hodge: &Hodge) -> AlphaCoefficients {
    let cells = (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let sys = assemble_cell_system(mesh, hodge, i);
            let (x, res, rank) = solve_min_norm(&sys);
            CellAlpha::from_local(&sys, &x, res, rank)
        })
        .collect();
    AlphaCoefficients {
        mode: AlphaMode::Decoupled,
        mesh_label: mesh.label.clone(),
        counts: mesh_counts(mesh),
        cells,
    }
}

/// Solve the coupled system over all cells at once (no splitting constant),
/// taking the minimum-norm solution.
pub fn solve_alpha_coupled(mesh: &Mesh, hodge: &Hodge) -> Result<AlphaCoefficients> {
    if mesh.n_cells() > COUPLED_MAX_CELLS {
        return Err(Error::InvalidParameter(format!(
            "coupled alpha solve is limited to {COUPLED_MAX_CELLS} cells, mesh has {}",
            mesh.n_cells()
        )));
    }
    let systems: Vec<CellSystem> = (0..mesh.n_cells())
        .map(|i| assemble_with_constant(mesh, hodge, i, 0.0))
        .collect();
    let mut offsets = Vec::with_capacity(systems.len() + 1);
    offsets.push(0);
    for s in &systems {
        offsets.push(offsets.last().unwrap() + s.n_unknowns());
    }
    let n_unknowns = *offsets.last().unwrap();

    let mut row_of: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (s, sys) in systems.iter().enumerate() {
        for (r, &(j, m, p)) in sys.row_keys.iter().enumerate() {
            let (va, vb) = (sys.vertices[m], sys.vertices[p]);
            let key = (sys.edges[j], va.min(vb), va.max(vb));
            let next = rows.len();
            let row = *row_of.entry(key).or_insert(next);
            if row == next {
                rows.push(Vec::new());
                rhs.push(0.0);
            }
            for c in 0..sys.n_unknowns() {
                let a = sys.matrix[(r, c)];
                if a != 0.0 {
                    rows[row].push((offsets[s] + c, a));
                }
            }
            rhs[row] += sys.rhs[r];
        }
    }
    let apply = |x: &[f64]| -> Vec<f64> {
        rows.iter()
            .map(|row| row.iter().map(|&(c, a)| a * x[c]).sum())
            .collect()
    };
    let apply_t = |y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n_unknowns];
        for (row, &yr) in rows.iter().zip(y) {
            for &(c, a) in row {
                out[c] += a * yr;
            }
        }
        out
    };
    let sol = cgls(apply, apply_t, &rhs, n_unknowns, 1e-14, 50_000);
    if sol.relative_residual > ALPHA_RESIDUAL_TOLERANCE {
        return Err(Error::AlphaResidual {
            cell: usize::MAX,
            residual: sol.relative_residual,
            tolerance: ALPHA_RESIDUAL_TOLERANCE,
        });
    }
    let cells = systems
        .iter()
        .enumerate()
        .map(|(s, sys)| {
            let x = DVector::from_column_slice(&sol.x[offsets[s]..offsets[s + 1]]);
            CellAlpha::from_local(sys, &x, sol.relative_residual, 0)
        })
        .collect();
    Ok(AlphaCoefficients {
        mode: AlphaMode::Coupled,
        mesh_label: mesh.label.clone(),
        counts: mesh_counts(mesh),
        cells,
    })
}

impl AlphaCoefficients {
    pub fn check_residuals(&self, tolerance: f64) -> Result<()> {
        for c in &self.cells {
            if !(c.residual <= tolerance) {
                return Err(Error::AlphaResidual {
                    cell: c.cell,
                    residual: c.residual,
                    tolerance,
                });
            }
        }
        Ok(())
    }

    pub fn max_residual(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.residual))
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.counts != mesh_counts(mesh) || self.cells.len() != mesh.n_cells() {
            return Err(Error::MeshMismatch(format!(
                "coefficients for {:?} (cells, edges, vertices), mesh has {:?}",
                self.counts,
                mesh_counts(mesh)
            )));
        }
        for c in &self.cells {
            if c.vertices != mesh.cell_vertices[c.cell] {
                return Err(Error::MeshMismatch(format!(
                    "cell {} has a different vertex ring",
                    c.cell
                )));
            }
        }
        Ok(())
    }

    /// `alpha(e, e', v)` with the antisymmetric sign applied; zero outside
    /// the stencil.
    pub fn alpha(&self, e: usize, f: usize, v: usize, mesh: &Mesh) -> f64 {
        let Some(i) = mesh.shared_cell(e, f) else {
            return 0.0;
        };
        if e == f {
            return 0.0;
        }
        let cell = &self.cells[i];
        let key = (e.min(f), e.max(f));
        let Some(p) = cell.pairs.iter().position(|&x| x == key) else {
            return 0.0;
        };
        let Some(m) = cell.vertices.iter().position(|&x| x == v) else {
            return 0.0;
        };
        let val = cell.value(p, m);
        if e < f {
            val
        } else {
            -val
        }
    }

    /// `(Q F)_e` for vertex potential vorticity `q` and edge flux `f`.
    pub fn apply(&self, q: &[f64], f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for cell in &self.cells {
            let n_v = cell.vertices.len();
            for (p, &(a, b)) in cell.pairs.iter().enumerate() {
                let vals = &cell.values[p * n_v..(p + 1) * n_v];
                let c: f64 = vals
                    .iter()
                    .zip(&cell.vertices)
                    .map(|(x, &v)| x * q[v])
                    .sum();
                out[a] += c * f[b];
                out[b] -= c * f[a];
            }
        }
        out
    }

    pub fn apply_field(&self, mesh: &Mesh, q: &Field, f: &Field) -> Result<Field> {
        self.check_mesh(mesh)?;
        q.expect(FormKind::PRIMAL_0)?;
        f.expect(FormKind::PRIMAL_1)?;
        Field::new(mesh, FormKind::DUAL_1, self.apply(q.values(), f.values()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = TableWriter::new("swcons-alpha", 1);
        w.header("mesh", &self.mesh_label);
        w.header(
            "counts",
            &format!("{} {} {}", self.counts[0], self.counts[1], self.counts[2]),
        );
        w.header(
            "mode",
            match self.mode {
                AlphaMode::Decoupled => "decoupled",
                AlphaMode::Coupled => "coupled",
            },
        );
        w.section(
            "cells",
            self.cells
                .iter()
                .map(|c| format!("{} {} {}", c.cell, c.rank, real(c.residual))),
        );
        let n: usize = self.cells.iter().map(|c| c.values.len()).sum();
        let mut rows = Vec::with_capacity(n);
        for c in &self.cells {
            let n_v = c.vertices.len();
            for (p, &(a, b)) in c.pairs.iter().enumerate() {
                for (m, &v) in c.vertices.iter().enumerate() {
                    rows.push(format!("{} {a} {b} {v} {}", c.cell, real(c.values[p * n_v + m])));
                }
            }
        }
        w.section("alpha", rows.into_iter());
        w.save(path)
    }

    /// Read coefficients and check that they belong to `mesh`.
    pub fn read(path: &Path, mesh: &Mesh) -> Result<Self> {
        let r = TableReader::open(path, "swcons-alpha")?;
        let label = r.header("mesh")?.join(" ");
        let counts: Vec<usize> = r
            .header("counts")?
            .iter()
            .map(|t| r.parse_token(0, t))
            .collect::<Result<_>>()?;
        let mode = match r.header("mode")?.first().map(String::as_str) {
            Some("decoupled") => AlphaMode::Decoupled,
            Some("coupled") => AlphaMode::Coupled,
            _ => return Err(r.error(0, "unknown mode")),
        };
        if counts != mesh_counts(mesh) {
            return Err(Error::MeshMismatch(format!(
                "file {} was solved on a mesh with counts {counts:?}",
                path.display()
            )));
        }
        let mut cells: Vec<CellAlpha> = (0..mesh.n_cells())
            .map(|i| {
                let edges = &mesh.cell_edges[i];
                let m = edges.len();
                let pairs = (0..m)
                    .flat_map(|j| ((j + 1)..m).map(move |k| (j, k)))
                    .map(|(j, k)| (edges[j].min(edges[k]), edges[j].max(edges[k])))
                    .collect::<Vec<_>>();
                let n = pairs.len() * mesh.cell_vertices[i].len();
                CellAlpha {
                    cell: i,
                    pairs,
                    vertices: mesh.cell_vertices[i].clone(),
                    values: vec![f64::NAN; n],
                    residual: f64::NAN,
                    rank: 0,
                }
            })
            .collect();
        for row in r.fixed::<String>("cells", 3)? {
            let i: usize = r.parse_token(0, &row[0])?;
            let cell = cells
                .get_mut(i)
                .ok_or_else(|| Error::MeshMismatch(format!("cell {i} out of range")))?;
            cell.rank = r.parse_token(0, &row[1])?;
            cell.residual = r.parse_token(0, &row[2])?;
        }
        let sec = r.section("alpha")?;
        for (line, toks) in &sec.rows {
            if toks.len() != 5 {
                return Err(r.error(*line, "expected 5 values"));
            }
            let i: usize = r.parse_token(*line, &toks[0])?;
            let a: usize = r.parse_token(*line, &toks[1])?;
            let b: usize = r.parse_token(*line, &toks[2])?;
            let v: usize = r.parse_token(*line, &toks[3])?;
            let x: f64 = r.parse_token(*line, &toks[4])?;
            let mismatch = || Error::MeshMismatch(format!("entry on line {line} is outside the stencil"));
            let cell = cells.get_mut(i).ok_or_else(mismatch)?;
            let p = cell.pairs.iter().position(|&k| k == (a, b)).ok_or_else(mismatch)?;
            let m = cell.vertices.iter().position(|&w| w == v).ok_or_else(mismatch)?;
            let n_v = cell.vertices.len();
            cell.values[p * n_v + m] = x;
        }
        if cells.iter().any(|c| c.values.iter().any(|x| x.is_nan()) || c.residual.is_nan()) {
            return Err(Error::MeshMismatch(format!(
                "{} does not cover every cell of the mesh",
                path.display()
            )));
        }
        Ok(AlphaCoefficients {
            mode,
            mesh_label: label,
            counts: mesh_counts(mesh),
            cells,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QVariant {
    /// Coefficients from the per-cell least-squares problems.
    Conserving,
    /// `(q_e W + W q_e) / 2`: antisymmetric, conserves energy only.
    EnergyOnly,
    /// `q_e W`: conserves potential enstrophy only.
    EnstrophyOnly,
}

impl QVariant {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "conserving" => Ok(QVariant::Conserving),
            "energy_only" => Ok(QVariant::EnergyOnly),
            "enstrophy_only" => Ok(QVariant::EnstrophyOnly),
            _ => Err(Error::Unknown {
                what: "Q variant",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QVariant::Conserving => "conserving",
            QVariant::EnergyOnly => "energy_only",
            QVariant::EnstrophyOnly => "enstrophy_only",
        }
    }
}

/// Edge average `q_e = (q_v0 + q_v1) / 2`.
pub fn edge_average(mesh: &Mesh, q: &[f64]) -> Vec<f64> {
    mesh.edge_vertices
        .iter()
        .map(|&[a, b]| 0.5 * (q[a] + q[b]))
        .collect()
}

/// The single-property reference operators built from `W`.
pub fn apply_q_variant(
    kind: QVariant,
    mesh: &Mesh,
    w: &WOperator,
    q: &[f64],
    f: &[f64],
) -> Result<Vec<f64>> {
    let qe = edge_average(mesh, q);
    match kind {
        QVariant::EnstrophyOnly => Ok(w.apply(f).iter().zip(&qe).map(|(x, q)| q * x).collect()),
        QVariant::EnergyOnly => {
            let wf = w.apply(f);
            let qf: Vec<f64> = f.iter().zip(&qe).map(|(x, q)| q * x).collect();
            let wqf = w.apply(&qf);
            Ok((0..f.len())
                .map(|e| 0.5 * (qe[e] * wf[e] + wqf[e]))
                .collect())
        }
        QVariant::Conserving => Err(Error::InvalidParameter(
            "the conserving operator needs solved coefficients".into(),
        )),
    }
}

/// Any realization of the nonlinear flux operator.
pub enum QOperator<'a> {
    Conserving(&'a AlphaCoefficients),
    Variant(QVariant, &'a Mesh, &'a WOperator),
}

impl QOperator<'_> {
    pub fn apply(&self, q: &[f64], f: &[f64]) -> Vec<f64> {
        match self {
            QOperator::Conserving(a) => a.apply(q, f),
            QOperator::Variant(kind, mesh, w) => {
                apply_q_variant(*kind, mesh, w, q, f).expect("reference variant")
            }
        }
    }

    pub fn variant(&self) -> QVariant {
        match self {
            QOperator::Conserving(_) => QVariant::Conserving,
            QOperator::Variant(k, _, _) => *k,
        }
    }
}

/// Relative max-norm residual of `D1bar R^T (q^2 / 2) + Q(q) D1 q`.
pub fn enstrophy_condition_residual(dec: &Dec, hodge: &Hodge, q_op: &QOperator, q: &[f64]) -> f64 {
    let half_sq: Vec<f64> = q.iter().map(|x| 0.5 * x * x).collect();
    let a = dec.d1bar.apply(&hodge.r_transpose(&half_sq));
    let b = q_op.apply(q, &dec.d1.apply(q));
    let scale = max_abs(&a).max(max_abs(&b));
    let res = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x + y).abs()));
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

/// `|<G, Q F> + <F, Q G>| / (sum |G Q F| + sum |F Q G|)`.
pub fn adjoint_defect(q_op: &QOperator, q: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let qf = q_op.apply(q, f);
    let qg = q_op.apply(q, g);
    let mut sum = 0.0;
    let mut mag = 0.0;
    for e in 0..f.len() {
        sum += g[e] * qf[e] + f[e] * qg[e];
        mag += (g[e] * qf[e]).abs() + (f[e] * qg[e]).abs();
    }
    if mag > 0.0 {
        sum.abs() / mag
    } else {
        0.0
    }
}

/// `max |Q(c) F - c W F| / max |c W F|`.
pub fn pv_compatibility_defect(q_op: &QOperator, w: &WOperator, c: f64, f: &[f64], n_vertices: usize) -> f64 {
    let q = vec![c; n_vertices];
    let lhs = q_op.apply(&q, f);
    let rhs: Vec<f64> = w.apply(f).iter().map(|x| c * x).collect();
    let scale = max_abs(&rhs);
    let res = lhs.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

#[derive(Clone, Debug, Default)]
pub struct QReport {
    pub trials: usize,
    pub max_enstrophy_residual: f64,
    pub max_adjoint_defect: f64,
    pub max_pv_defect: f64,
    /// Enstrophy residual for single-vertex indicator fields.
    pub max_indicator_residual: f64,
}

/// Randomized check of the enstrophy condition, adjoint antisymmetry and
/// PV compatibility.
pub fn verify_q(
    mesh: &Mesh,
    dec: &Dec,
    hodge: &Hodge,
    w: &WOperator,
    q_op: &QOperator,
    trials: usize,
    seed: u64,
) -> QReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = QReport {
        trials,
        ..QReport::default()
    };
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    for _ in 0..trials {
        let q: Vec<f64> = (0..nv).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f: Vec<f64> = (0..ne).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..ne).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = rng.random_range(0.5..2.0);
        report.max_enstrophy_residual = report
            .max_enstrophy_residual
            .max(enstrophy_condition_residual(dec, hodge, q_op, &q));
        report.max_adjoint_defect = report.max_adjoint_defect.max(adjoint_defect(q_op, &q, &f, &g));
        report.max_pv_defect = report
            .max_pv_defect
            .max(pv_compatibility_defect(q_op, w, c, &f, nv));
    }
    for v in 0..nv.min(64) {
        let mut q = vec![0.0; nv];
        q[v] = 1.0;
        report.max_indicator_residual = report
            .max_indicator_residual
            .max(enstrophy_condition_residual(dec, hodge, q_op, &q));
    }
    report
}

/// Enstrophy-condition check over `trials` random `q`.
pub fn verify_enstrophy_condition(
    alpha: &AlphaCoefficients,
    dec: &Dec,
    hodge: &Hodge,
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q_op = QOperator::Conserving(alpha);
    let nv = dec.d1.n_cols;
    (0..trials)
        .map(|_| {
            let q: Vec<f64> = (0..nv).map(|_| rng.random_range(-1.0..1.0)).collect();
            enstrophy_condition_residual(dec, hodge, &q_op, &q)
        })
        .fold(0.0, f64::max)
}
