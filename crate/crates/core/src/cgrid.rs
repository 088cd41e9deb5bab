//! C-grid scheme: mass `m_i` (primal 2-form) on cells, wind `u_e` (dual
//! 1-form) on edges, and the flux-form tendencies
//!
//! ```text
//! dm/dt = -D2 F
//! du/dt = Q(q) F - D1bar Phi
//! ```

use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::hodge::{Hodge, WOperator};
use crate::linalg::dot;
use crate::mesh::Mesh;
use crate::qflux::QOperator;

/// Fixed parameters of a C-grid run.
#[derive(Clone, Debug)]
pub struct CGridParams {
    pub g: f64,
    /// Topography integrated over each cell (primal 2-form).
    pub b: Vec<f64>,
    /// Planetary vorticity integrated over each dual cell (dual 2-form).
    pub f: Vec<f64>,
}

impl CGridParams {
    /// Flat bottom with Coriolis parameter `coriolis(x_v)` sampled at the
    /// vertices.
    pub fn new(mesh: &Mesh, g: f64, coriolis: impl Fn(&crate::mesh::V3) -> f64) -> Self {
        CGridParams {
            g,
            b: vec![0.0; mesh.n_cells()],
            f: mesh
                .vertex_positions
                .iter()
                .zip(&mesh.vertex_area)
                .map(|(p, a)| coriolis(p) * a)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CGridState {
    pub m: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CGridDiagnostics {
    /// Cell depth `I m`.
    pub h: Vec<f64>,
    pub m_e: Vec<f64>,
    pub c: Vec<f64>,
    pub flux: Vec<f64>,
    pub zeta: Vec<f64>,
    pub eta: Vec<f64>,
    pub m_v: Vec<f64>,
    pub q: Vec<f64>,
    pub k: Vec<f64>,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CGridTendency {
    pub dm: Vec<f64>,
    pub du: Vec<f64>,
}

/// Mesh operators needed by the scheme.
pub struct CGrid<'a> {
    pub mesh: &'a Mesh,
    pub dec: &'a Dec,
    pub hodge: &'a Hodge,
    pub params: &'a CGridParams,
}

impl<'a> CGrid<'a> {
    pub fn new(mesh: &'a Mesh, dec: &'a Dec, hodge: &'a Hodge, params: &'a CGridParams) -> Result<Self> {
        if params.b.len() != mesh.n_cells() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_cells(),
                got: params.b.len(),
            });
        }
        if params.f.len() != mesh.n_vertices() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_vertices(),
                got: params.f.len(),
            });
        }
        Ok(CGrid {
            mesh,
            dec,
            hodge,
            params,
        })
    }

    fn check(&self, state: &CGridState) -> Result<()> {
        if state.m.len() != self.mesh.n_cells() {
            return Err(Error::LengthMismatch {
                expected: self.mesh.n_cells(),
                got: state.m.len(),
            });
        }
        if state.u.len() != self.mesh.n_edges() {
            return Err(Error::LengthMismatch {
                expected: self.mesh.n_edges(),
                got: state.u.len(),
            });
        }
        Ok(())
    }

    /// Kinetic energy per cell: `phi^T (u H u / 2)`.
    fn kinetic(&self, u: &[f64]) -> Vec<f64> {
        let per_edge: Vec<f64> = u
            .iter()
            .zip(&self.hodge.star)
            .map(|(x, s)| 0.5 * x * s * x)
            .collect();
        self.hodge.phi_transpose(self.mesh, &per_edge)
    }

    pub fn diagnostics(&self, state: &CGridState) -> Result<CGridDiagnostics> {
        self.check(state)?;
        let g = self.params.g;
        let h = self.hodge.i(&state.m);
        let m_e = self.hodge.phi(self.mesh, &h);
        let c: Vec<f64> = m_e.iter().zip(&state.u).map(|(a, b)| a * b).collect();
        let flux = self.hodge.h(&c);
        let zeta = self.dec.d2bar.apply(&state.u);
        let eta: Vec<f64> = zeta.iter().zip(&self.params.f).map(|(a, b)| a + b).collect();
        let m_v = self.hodge.r(&state.m);
        if let Some((v, &x)) = m_v.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Positivity {
                what: "dual-cell mass",
                index: v,
                value: x,
            });
        }
        let q = eta.iter().zip(&m_v).map(|(a, b)| a / b).collect();
        let k = self.kinetic(&state.u);
        let phi: Vec<f64> = (0..self.mesh.n_cells())
            .map(|i| {
                let inv = self.hodge.inv_cell_area[i];
                k[i] * inv + g * h[i] + g * (self.params.b[i] * inv)
            })
            .collect();
        let mu = self.dec.d2.apply(&self.hodge.h(&state.u));
        Ok(CGridDiagnostics {
            h,
            m_e,
            c,
            flux,
            zeta,
            eta,
            m_v,
            q,
            k,
            phi,
            mu,
        })
    }

    /// `H = 1/2 (m, g m)_I + 1/2 (u, C)_H + (m, g b)_I`.
    pub fn hamiltonian(&self, state: &CGridState) -> Result<f64> {
        self.check(state)?;
        let g = self.params.g;
        let inv = &self.hodge.inv_cell_area;
        let potential: f64 = (0..self.mesh.n_cells())
            .map(|i| 0.5 * g * state.m[i] * state.m[i] * inv[i] + g * state.m[i] * self.params.b[i] * inv[i])
            .sum();
        let h = self.hodge.i(&state.m);
        let m_e = self.hodge.phi(self.mesh, &h);
        let kinetic: f64 = (0..self.mesh.n_edges())
            .map(|e| 0.5 * state.u[e] * self.hodge.star[e] * m_e[e] * state.u[e])
            .sum();
        Ok(potential + kinetic)
    }

    /// `(Phi, F)`: partial derivatives of the Hamiltonian with respect to
    /// `m_i` and `u_e`.
    pub fn functional_derivatives(&self, state: &CGridState) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.diagnostics(state)?;
        Ok((d.phi, d.flux))
    }

    /// `Z = 1/2 sum_v eta_v^2 / m_v`.
    pub fn potential_enstrophy(&self, state: &CGridState) -> Result<f64> {
        let d = self.diagnostics(state)?;
        Ok(enstrophy_from(&d))
    }

    /// `(-R^T q^2 / 2, D1 q)`: derivatives of the potential enstrophy.
    pub fn enstrophy_derivatives(&self, d: &CGridDiagnostics) -> (Vec<f64>, Vec<f64>) {
        let half_sq: Vec<f64> = d.q.iter().map(|x| 0.5 * x * x).collect();
        let dm = self.hodge.r_transpose(&half_sq).iter().map(|x| -x).collect();
        (dm, self.dec.d1.apply(&d.q))
    }

    pub fn tendency(&self, state: &CGridState, q_op: &QOperator) -> Result<CGridTendency> {
        let d = self.diagnostics(state)?;
        Ok(self.tendency_from(&d, q_op))
    }

    pub fn tendency_from(&self, d: &CGridDiagnostics, q_op: &QOperator) -> CGridTendency {
        let dm = self.dec.d2.apply(&d.flux).iter().map(|x| -x).collect();
        let qf = q_op.apply(&d.q, &d.flux);
        let grad = self.dec.d1bar.apply(&d.phi);
        let du = qf.iter().zip(&grad).map(|(a, b)| a - b).collect();
        CGridTendency { dm, du }
    }
}

pub fn enstrophy_from(d: &CGridDiagnostics) -> f64 {
    d.eta
        .iter()
        .zip(&d.m_v)
        .map(|(e, m)| 0.5 * e * e / m)
        .sum()
}

/// Linearization about rest with mean depth `depth` and constant `f`.
pub struct CGridLinear<'a> {
    pub mesh: &'a Mesh,
    pub dec: &'a Dec,
    pub hodge: &'a Hodge,
    pub w: &'a WOperator,
    pub g: f64,
    pub depth: f64,
    pub f: f64,
}

impl CGridLinear<'_> {
    /// `dm = -H D2 Hodge u`, `du = f W Hodge u - g D1bar I m`.
    pub fn tendency(&self, state: &CGridState) -> CGridTendency {
        let hu = self.hodge.h(&state.u);
        let dm = self.dec.d2.apply(&hu).iter().map(|x| -self.depth * x).collect();
        let coriolis = self.w.apply(&hu);
        let grad = self.dec.d1bar.apply(&self.hodge.i(&state.m));
        let du = coriolis
            .iter()
            .zip(&grad)
            .map(|(c, p)| self.f * c - self.g * p)
            .collect();
        CGridTendency { dm, du }
    }

    /// `1/2 (m, g m)_I + 1/2 H (u, u)_H`.
    pub fn energy(&self, state: &CGridState) -> f64 {
        let pe: f64 = state
            .m
            .iter()
            .zip(&self.hodge.inv_cell_area)
            .map(|(m, w)| 0.5 * self.g * m * m * w)
            .sum();
        let ke = 0.5 * self.depth * dot(&state.u, &self.hodge.h(&state.u));
        pe + ke
    }

    pub fn energy_derivatives(&self, state: &CGridState) -> (Vec<f64>, Vec<f64>) {
        let dm = self.hodge.i(&state.m).iter().map(|x| self.g * x).collect();
        let du = self.hodge.h(&state.u).iter().map(|x| self.depth * x).collect();
        (dm, du)
    }

    /// Geostrophically balanced perturbation from a vertex streamfunction:
    /// `Hodge u = D1 psi` is non-divergent, and the mass field solves
    /// `g D1bar I m = f W D1 psi`.
    pub fn geostrophic_state(&self, psi: &[f64]) -> Result<CGridState> {
        let flux = self.dec.d1.apply(psi);
        let u = self.hodge.h_inv(&flux);
        let target: Vec<f64> = self.w.apply(&flux).iter().map(|x| self.f * x / self.g).collect();
        let h = solve_gradient(self.mesh, self.dec, self.hodge, &target)?;
        let m = h.iter().zip(&self.mesh.cell_area).map(|(h, a)| h * a).collect();
        Ok(CGridState { m, u })
    }
}

/// Cell field `x` with `D1bar x = target` for a target in the range of
/// `D1bar`, via the weighted normal equations `D2 Hodge D1bar x = D2 Hodge target`.
fn solve_gradient(mesh: &Mesh, dec: &Dec, hodge: &Hodge, target: &[f64]) -> Result<Vec<f64>> {
    let rhs = dec.d2.apply(&hodge.h(target));
    let neg_rhs: Vec<f64> = rhs.iter().map(|x| -x).collect();
    // -D2 Hodge D1bar is symmetric positive semidefinite with constant nullspace.
    let apply = |x: &[f64]| -> Vec<f64> {
        dec.d2
            .apply(&hodge.h(&dec.d1bar.apply(x)))
            .iter()
            .map(|y| -y)
            .collect()
    };
    let n = mesh.n_cells() as f64;
    let project = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / n;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let diag: Vec<f64> = (0..mesh.n_cells())
        .map(|i| {
            let s: f64 = mesh.cell_edges[i].iter().map(|&e| hodge.star[e]).sum();
            1.0 / s
        })
        .collect();
    let sol = crate::linalg::pcg(apply, &neg_rhs, None, Some(&diag), project, 1e-14, 20_000);
    if sol.relative_residual > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "gradient inversion stalled at relative residual {:.3e}",
            sol.relative_residual
        )));
    }
    Ok(sol.x)
}

/// Rest state with depth `depth`: `m_i` is moved by at most a few ulps so
/// that `I m` equals `depth` exactly where such an `m_i` exists, which is
/// always the case for power-of-two depths.
pub fn rest_state(mesh: &Mesh, hodge: &Hodge, depth: f64) -> CGridState {
    let m = (0..mesh.n_cells())
        .map(|i| {
            let a = hodge.cell_area[i];
            let mut m = depth * a;
            for _ in 0..64 {
                let h = m / a;
                if h == depth {
                    break;
                }
                m = if h < depth { m.next_up() } else { m.next_down() };
            }
            m
        })
        .collect();
    CGridState {
        m,
        u: vec![0.0; mesh.n_edges()],
    }
}
