//! Discrete exterior derivatives as integer incidence matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Cell,
    Edge,
    Vertex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Primal,
    Dual,
}

/// Form type of a field. Only the combinations that live on a mesh site
/// can be constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FormKind {
    form: Orientation,
    degree: u8,
}

impl FormKind {
    pub const PRIMAL_0: FormKind = FormKind::raw(Orientation::Primal, 0);
    pub const PRIMAL_1: FormKind = FormKind::raw(Orientation::Primal, 1);
    pub const PRIMAL_2: FormKind = FormKind::raw(Orientation::Primal, 2);
    pub const DUAL_0: FormKind = FormKind::raw(Orientation::Dual, 0);
    pub const DUAL_1: FormKind = FormKind::raw(Orientation::Dual, 1);
    pub const DUAL_2: FormKind = FormKind::raw(Orientation::Dual, 2);

    const fn raw(form: Orientation, degree: u8) -> Self {
        FormKind { form, degree }
    }

    pub fn new(form: Orientation, degree: u8) -> Result<Self> {
        if degree > 2 {
            return Err(Error::FormMismatch {
                expected: "degree 0, 1 or 2".into(),
                got: format!("degree {degree}"),
            });
        }
        Ok(FormKind { form, degree })
    }

    pub fn form(self) -> Orientation {
        self.form
    }

    pub fn degree(self) -> u8 {
        self.degree
    }

    pub fn site(self) -> Site {
        match (self.form, self.degree) {
            (Orientation::Primal, 0) | (Orientation::Dual, 2) => Site::Vertex,
            (_, 1) => Site::Edge,
            _ => Site::Cell,
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match self.form {
            Orientation::Primal => "primal",
            Orientation::Dual => "dual",
        };
        write!(f, "{form} {}-form", self.degree)
    }
}

pub fn site_count(mesh: &Mesh, site: Site) -> usize {
    match site {
        Site::Cell => mesh.n_cells(),
        Site::Edge => mesh.n_edges(),
        Site::Vertex => mesh.n_vertices(),
    }
}

/// Values attached to one kind of mesh entity, tagged with their form type.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    kind: FormKind,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &Mesh, kind: FormKind, values: Vec<f64>) -> Result<Self> {
        let expected = site_count(mesh, kind.site());
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Field { kind, values })
    }

    pub fn zeros(mesh: &Mesh, kind: FormKind) -> Self {
        Field {
            kind,
            values: vec![0.0; site_count(mesh, kind.site())],
        }
    }

    pub fn constant(mesh: &Mesh, kind: FormKind, c: f64) -> Self {
        Field {
            kind,
            values: vec![c; site_count(mesh, kind.site())],
        }
    }

    /// Wraps values whose length is already known to match `kind`.
    pub(crate) fn from_parts(kind: FormKind, values: Vec<f64>) -> Self {
        Field { kind, values }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn site(&self) -> Site {
        self.kind.site()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn expect(&self, kind: FormKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::FormMismatch {
                expected: kind.to_string(),
                got: self.kind.to_string(),
            });
        }
        Ok(())
    }
}

/// Compressed sparse rows with small integer entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntCsr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<i64>,
}

impl IntCsr {
    fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, i64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, i64)> = Vec::with_capacity(row.len());
            for (c, x) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += x,
                    _ => merged.push((c, x)),
                }
            }
            for (c, x) in merged.into_iter().filter(|&(_, x)| x != 0) {
                cols.push(c);
                vals.push(x);
            }
            row_ptr.push(cols.len());
        }
        IntCsr {
            n_rows: row_ptr.len() - 1,
            n_cols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "operand length");
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v as f64 * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntCsr {
        let mut rows = vec![Vec::new(); self.n_cols];
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        IntCsr::from_rows(self.n_rows, rows)
    }

    pub fn matmul(&self, other: &IntCsr) -> IntCsr {
        assert_eq!(self.n_cols, other.n_rows, "inner dimension");
        let rows = (0..self.n_rows)
            .map(|r| {
                self.row(r)
                    .flat_map(|(k, a)| other.row(k).map(move |(c, b)| (c, a * b)))
                    .collect()
            })
            .collect();
        IntCsr::from_rows(other.n_cols, rows)
    }

    pub fn neg(&self) -> IntCsr {
        IntCsr {
            vals: self.vals.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn max_abs(&self) -> i64 {
        self.vals.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// The four incidence operators of a mesh.
#[derive(Clone, Debug)]
pub struct Dec {
    /// Primal 0-forms (vertices) to primal 1-forms (edges).
    pub d1: IntCsr,
    /// Dual 0-forms (cells) to dual 1-forms (edges).
    pub d1bar: IntCsr,
    /// Primal 1-forms (edges) to primal 2-forms (cells).
    pub d2: IntCsr,
    /// Dual 1-forms (edges) to dual 2-forms (vertices).
    pub d2bar: IntCsr,
}

impl Dec {
    pub fn new(mesh: &Mesh) -> Self {
        let d1 = IntCsr::from_rows(
            mesh.n_vertices(),
            (0..mesh.n_edges())
                .map(|e| {
                    (0..2)
                        .map(|k| (mesh.edge_vertices[e][k], mesh.edge_vertex_sign[e][k] as i64))
                        .collect()
                })
                .collect(),
        );
        let d1bar = IntCsr::from_rows(
            mesh.n_cells(),
            (0..mesh.n_edges())
                .map(|e| {
                    (0..2)
                        .map(|k| (mesh.edge_cells[e][k], -(mesh.edge_cell_sign[e][k] as i64)))
                        .collect()
                })
                .collect(),
        );
        let d2 = IntCsr::from_rows(
            mesh.n_edges(),
            mesh.cell_edges
                .iter()
                .enumerate()
                .map(|(i, edges)| edges.iter().map(|&e| (e, mesh.n(e, i) as i64)).collect())
                .collect(),
        );
        let d2bar = IntCsr::from_rows(
            mesh.n_edges(),
            mesh.vertex_edges
                .iter()
                .enumerate()
                .map(|(v, edges)| edges.iter().map(|&e| (e, mesh.t(e, v) as i64)).collect())
                .collect(),
        );
        Dec {
            d1,
            d1bar,
            d2,
            d2bar,
        }
    }

    pub fn d1(&self, f: &Field) -> Result<Field> {
        apply(&self.d1, f, FormKind::PRIMAL_0, FormKind::PRIMAL_1)
    }

    pub fn d1bar(&self, f: &Field) -> Result<Field> {
        apply(&self.d1bar, f, FormKind::DUAL_0, FormKind::DUAL_1)
    }

    pub fn d2(&self, f: &Field) -> Result<Field> {
        apply(&self.d2, f, FormKind::PRIMAL_1, FormKind::PRIMAL_2)
    }

    pub fn d2bar(&self, f: &Field) -> Result<Field> {
        apply(&self.d2bar, f, FormKind::DUAL_1, FormKind::DUAL_2)
    }
}

fn apply(op: &IntCsr, f: &Field, from: FormKind, to: FormKind) -> Result<Field> {
    f.expect(from)?;
    if f.values.len() != op.n_cols {
        return Err(Error::LengthMismatch {
            expected: op.n_cols,
            got: f.values.len(),
        });
    }
    Ok(Field {
        kind: to,
        values: op.apply(&f.values),
    })
}
