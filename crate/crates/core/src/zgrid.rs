//! Z-grid scheme: depth `h_i`, relative vorticity `zeta_i` and divergence
//! `mu_i`, all collocated at cell centers.
//!
//! ```text
//! dh/dt    = -L chi
//! dzeta/dt = J_zeta(q, psi) - FD(q, chi)
//! dmu/dt   = -L Phi + J_delta(q, chi) + FD(q, psi)
//! ```
//!
//! The streamfunction `psi` and velocity potential `chi` come from the
//! depth-weighted Helmholtz system
//!
//! ```text
//! A mu   = S_h chi - K psi
//! A zeta = S_h psi + K chi
//! ```
//!
//! with `S_h = D2 (star / h_e) D1bar` and `K a = D2 [(D1 (1 / h_v)) a_e]`.
//! Cell values reach edges as `a_e = (a_1 + a_2) / 2` and vertices as
//! `a_v = sum_{i in CV(v)} a_i / |CV(v)|`.

use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::hodge::Hodge;
use crate::linalg::{dot, pcg};
use crate::mesh::{Mesh, V3};

pub const HELMHOLTZ_TOLERANCE: f64 = 1e-12;
pub const HELMHOLTZ_MAX_OUTER: usize = 200;
pub const HELMHOLTZ_MAX_INNER: usize = 2000;

#[derive(Clone, Debug)]
pub struct ZGridParams {
    pub g: f64,
    /// Coriolis parameter at cell centers.
    pub f: Vec<f64>,
    /// Bottom height at cell centers.
    pub b: Vec<f64>,
}

impl ZGridParams {
    /// Flat bottom with Coriolis parameter `coriolis(x_i)`.
    pub fn new(mesh: &Mesh, g: f64, coriolis: impl Fn(&V3) -> f64) -> Self {
        ZGridParams {
            g,
            f: mesh.cell_centers.iter().map(coriolis).collect(),
            b: vec![0.0; mesh.n_cells()],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZGridState {
    pub h: Vec<f64>,
    pub zeta: Vec<f64>,
    pub mu: Vec<f64>,
}

impl ZGridState {
    pub fn rest(mesh: &Mesh, depth: f64) -> Self {
        let n = mesh.n_cells();
        ZGridState {
            h: vec![depth; n],
            zeta: vec![0.0; n],
            mu: vec![0.0; n],
        }
    }
}

#[derive(Clone, Debug)]
pub struct HelmholtzSolution {
    pub chi: Vec<f64>,
    pub psi: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Coupled residual relative to the norm of the right-hand side.
    pub relative_residual: f64,
    /// Set when the fixed-point iteration stalled and the coupled system
    /// was solved directly.
    pub used_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianParts {
    pub flux_divergence: f64,
    pub jacobian: f64,
    pub potential: f64,
}

impl HamiltonianParts {
    pub fn total(&self) -> f64 {
        self.flux_divergence + self.jacobian + self.potential
    }

    pub fn kinetic(&self) -> f64 {
        self.flux_divergence + self.jacobian
    }
}

#[derive(Clone, Debug)]
pub struct ZGridDiagnostics {
    pub helmholtz: HelmholtzSolution,
    pub eta: Vec<f64>,
    pub q: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZGridTendency {
    pub dh: Vec<f64>,
    pub dzeta: Vec<f64>,
    pub dmu: Vec<f64>,
}

/// Cell-centered operators of the Z-grid scheme.
pub struct ZOperators<'a> {
    pub mesh: &'a Mesh,
    pub dec: &'a Dec,
    pub hodge: &'a Hodge,
    /// `1 / |CV(v)|`.
    vertex_weight: Vec<f64>,
}

impl<'a> ZOperators<'a> {
    pub fn new(mesh: &'a Mesh, dec: &'a Dec, hodge: &'a Hodge) -> Self {
        ZOperators {
            mesh,
            dec,
            hodge,
            vertex_weight: mesh
                .vertex_cells
                .iter()
                .map(|c| 1.0 / c.len() as f64)
                .collect(),
        }
    }

    pub fn edge_mean(&self, a: &[f64]) -> Vec<f64> {
        self.mesh
            .edge_cells
            .iter()
            .map(|&[i, j]| 0.5 * (a[i] + a[j]))
            .collect()
    }

    pub fn vertex_mean(&self, a: &[f64]) -> Vec<f64> {
        self.mesh
            .vertex_cells
            .iter()
            .zip(&self.vertex_weight)
            .map(|(cells, w)| w * cells.iter().map(|&i| a[i]).sum::<f64>())
            .collect()
    }

    /// Transpose of [`ZOperators::vertex_mean`].
    pub fn vertex_mean_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.n_cells()];
        for (v, cells) in self.mesh.vertex_cells.iter().enumerate() {
            for &i in cells {
                out[i] += self.vertex_weight[v] * y[v];
            }
        }
        out
    }

    fn per_area(&self, x: Vec<f64>) -> Vec<f64> {
        self.hodge.i(&x)
    }

    /// `D2 (w D1bar a)` without the area factor.
    fn weighted_div_grad(&self, w: &[f64], a: &[f64]) -> Vec<f64> {
        let grad = self.dec.d1bar.apply(a);
        let flux: Vec<f64> = grad.iter().zip(w).map(|(g, w)| g * w).collect();
        self.dec.d2.apply(&flux)
    }

    /// `L a = (1/A) D2 star D1bar a`.
    pub fn laplacian(&self, a: &[f64]) -> Vec<f64> {
        self.per_area(self.weighted_div_grad(&self.hodge.star, a))
    }

    /// `FD(a, b) = (1/A) D2 (a_e star D1bar b)`.
    pub fn flux_div(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = self
            .edge_mean(a)
            .iter()
            .zip(&self.hodge.star)
            .map(|(a, s)| a * s)
            .collect();
        self.per_area(self.weighted_div_grad(&w, b))
    }

    /// `D2 [(D1 c_v) b_e]` without the area factor.
    fn circulation(&self, c_v: &[f64], b: &[f64]) -> Vec<f64> {
        let dc = self.dec.d1.apply(c_v);
        let be = self.edge_mean(b);
        let prod: Vec<f64> = dc.iter().zip(&be).map(|(x, y)| x * y).collect();
        self.dec.d2.apply(&prod)
    }

    /// Edge antisymmetric product `J_e(a, b) = a_1 b_2 - a_2 b_1`, with 1
    /// the cell the edge normal points away from.
    pub fn edge_jacobian(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.mesh
            .edge_cells
            .iter()
            .map(|&[i, j]| a[i] * b[j] - a[j] * b[i])
            .collect()
    }

    /// `J_delta(q, s) = -(1/A) D2 [(D1 q_v) s_e]`.
    pub fn jacobian_delta(&self, q: &[f64], s: &[f64]) -> Vec<f64> {
        let c = self.circulation(&self.vertex_mean(q), s);
        self.per_area(c.into_iter().map(|x| -x).collect())
    }

    /// Jacobian from the cyclic vorticity bracket: the mean of the three
    /// placements of `q`, `s` and the test function.
    pub fn jacobian_zeta(&self, q: &[f64], s: &[f64]) -> Vec<f64> {
        let first = self.circulation(&self.vertex_mean(q), s);
        let third = self.circulation(&self.vertex_mean(s), q);
        let curl = self.dec.d2bar.apply(&self.edge_jacobian(s, q));
        let second = self.vertex_mean_transpose(&curl);
        let out = (0..self.mesh.n_cells())
            .map(|i| (-first[i] - 0.5 * second[i] + third[i]) / 3.0)
            .collect();
        self.per_area(out)
    }

    /// Projects a cell field onto zero area-weighted mean.
    pub fn remove_mean(&self, a: &mut [f64]) {
        let mean = dot(a, &self.mesh.cell_area) / self.mesh.total_area();
        a.iter_mut().for_each(|x| *x -= mean);
    }

    /// Solves `L x = rhs` with zero area-weighted mean.
    pub fn poisson(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b: Vec<f64> = rhs.iter().zip(&self.mesh.cell_area).map(|(r, a)| r * a).collect();
        let mut x = self.solve_weighted(&self.hodge.star, &b, None)?.0;
        self.remove_mean(&mut x);
        Ok(x)
    }

    fn jacobi(&self, w: &[f64]) -> Vec<f64> {
        self.mesh
            .cell_edges
            .iter()
            .map(|edges| 1.0 / edges.iter().map(|&e| w[e]).sum::<f64>())
            .collect()
    }

    /// Solves `D2 (w D1bar x) = b` for `b` with zero sum; `x` has zero sum.
    fn solve_weighted(&self, w: &[f64], b: &[f64], x0: Option<&[f64]>) -> Result<(Vec<f64>, usize)> {
        let n = b.len() as f64;
        let project = |v: &mut [f64]| {
            let mean = v.iter().sum::<f64>() / n;
            v.iter_mut().for_each(|x| *x -= mean);
        };
        let neg: Vec<f64> = b.iter().map(|x| -x).collect();
        let apply = |x: &[f64]| -> Vec<f64> { self.weighted_div_grad(w, x).into_iter().map(|y| -y).collect() };
        let sol = pcg(apply, &neg, x0, Some(&self.jacobi(w)), project, 1e-14, HELMHOLTZ_MAX_INNER);
        if !sol.relative_residual.is_finite() || sol.relative_residual > 1e-9 {
            return Err(Error::NoConvergence(format!(
                "Poisson solve stalled at relative residual {:.3e}",
                sol.relative_residual
            )));
        }
        Ok((sol.x, sol.iterations))
    }

    fn check_depth(&self, h: &[f64]) -> Result<()> {
        match h.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            Some((i, &x)) => Err(Error::Positivity {
                what: "depth",
                index: i,
                value: x,
            }),
            None => Ok(()),
        }
    }

    /// Depth-dependent coefficients of the Helmholtz system.
    fn coefficients(&self, h: &[f64]) -> Coefficients {
        let he = self.edge_mean(h);
        let hv = self.vertex_mean(h);
        let inv_hv: Vec<f64> = hv.iter().map(|x| 1.0 / x).collect();
        Coefficients {
            s_weight: self.hodge.star.iter().zip(&he).map(|(s, h)| s / h).collect(),
            d_inv_hv: self.dec.d1.apply(&inv_hv),
            he,
            hv,
        }
    }

    fn k_apply(&self, c: &Coefficients, a: &[f64]) -> Vec<f64> {
        let ae = self.edge_mean(a);
        let prod: Vec<f64> = c.d_inv_hv.iter().zip(&ae).map(|(d, a)| d * a).collect();
        self.dec.d2.apply(&prod)
    }

    /// `(S chi - K psi, S psi + K chi)`.
    fn helmholtz_apply(&self, c: &Coefficients, chi: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let s_chi = self.weighted_div_grad(&c.s_weight, chi);
        let s_psi = self.weighted_div_grad(&c.s_weight, psi);
        let k_chi = self.k_apply(c, chi);
        let k_psi = self.k_apply(c, psi);
        (
            s_chi.iter().zip(&k_psi).map(|(a, b)| a - b).collect(),
            s_psi.iter().zip(&k_chi).map(|(a, b)| a + b).collect(),
        )
    }

    /// Recovers `(chi, psi)` from depth, divergence and vorticity. The
    /// right-hand sides are projected to zero area-weighted mean and the
    /// solution carries the same gauge.
    pub fn helmholtz_solve(&self, h: &[f64], mu: &[f64], zeta: &[f64]) -> Result<HelmholtzSolution> {
        self.check_depth(h)?;
        let c = self.coefficients(h);
        let area = &self.mesh.cell_area;
        let mut b_mu: Vec<f64> = mu.to_vec();
        let mut b_zeta: Vec<f64> = zeta.to_vec();
        self.remove_mean(&mut b_mu);
        self.remove_mean(&mut b_zeta);
        b_mu.iter_mut().zip(area).for_each(|(x, a)| *x *= a);
        b_zeta.iter_mut().zip(area).for_each(|(x, a)| *x *= a);
        let n = h.len();
        let b_norm = (dot(&b_mu, &b_mu) + dot(&b_zeta, &b_zeta)).sqrt();
        if b_norm == 0.0 {
            return Ok(HelmholtzSolution {
                chi: vec![0.0; n],
                psi: vec![0.0; n],
                outer_iterations: 0,
                inner_iterations: 0,
                relative_residual: 0.0,
                used_fallback: false,
            });
        }
        let residual = |chi: &[f64], psi: &[f64]| -> f64 {
            let (a, b) = self.helmholtz_apply(&c, chi, psi);
            let r: f64 = a
                .iter()
                .zip(&b_mu)
                .chain(b.iter().zip(&b_zeta))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            r.sqrt() / b_norm
        };

        let mut chi = vec![0.0; n];
        let mut psi = vec![0.0; n];
        let mut inner = 0;
        let mut outer = 0;
        let mut rel = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        while outer < HELMHOLTZ_MAX_OUTER {
            let k_psi = self.k_apply(&c, &psi);
            let rhs: Vec<f64> = b_mu.iter().zip(&k_psi).map(|(b, k)| b + k).collect();
            let (x, it) = self.solve_weighted(&c.s_weight, &centered(rhs), Some(&chi))?;
            chi = x;
            inner += it;
            let k_chi = self.k_apply(&c, &chi);
            let rhs: Vec<f64> = b_zeta.iter().zip(&k_chi).map(|(b, k)| b - k).collect();
            let (x, it) = self.solve_weighted(&c.s_weight, &centered(rhs), Some(&psi))?;
            psi = x;
            inner += it;
            outer += 1;
            rel = residual(&chi, &psi);
            if rel <= HELMHOLTZ_TOLERANCE {
                break;
            }
            if rel < 0.5 * best {
                best = rel;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 5 {
                    break;
                }
            }
        }
        let mut used_fallback = false;
        if !(rel <= HELMHOLTZ_TOLERANCE) {
            let (x, y, it) = self.coupled_cg(&c, &b_mu, &b_zeta);
            let fallback = residual(&x, &y);
            if fallback < rel {
                chi = x;
                psi = y;
                rel = fallback;
                inner += it;
                used_fallback = true;
            }
        }
        if !(rel <= 10.0 * HELMHOLTZ_TOLERANCE) {
            return Err(Error::NoConvergence(format!(
                "Helmholtz system stalled at relative residual {rel:.3e}"
            )));
        }
        self.remove_mean(&mut chi);
        self.remove_mean(&mut psi);
        Ok(HelmholtzSolution {
            chi,
            psi,
            outer_iterations: outer,
            inner_iterations: inner,
            relative_residual: rel,
            used_fallback,
        })
    }

    /// Conjugate gradients on the stacked system, whose negative is the
    /// Hessian of the kinetic energy and hence symmetric positive
    /// semidefinite whenever that energy is.
    fn coupled_cg(&self, c: &Coefficients, b_mu: &[f64], b_zeta: &[f64]) -> (Vec<f64>, Vec<f64>, usize) {
        let n = b_mu.len();
        let rhs: Vec<f64> = b_mu.iter().chain(b_zeta).map(|x| -x).collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            let (a, b) = self.helmholtz_apply(c, &x[..n], &x[n..]);
            a.into_iter().chain(b).map(|y| -y).collect()
        };
        let project = |v: &mut [f64]| {
            for half in v.chunks_mut(n) {
                let mean = half.iter().sum::<f64>() / n as f64;
                half.iter_mut().for_each(|x| *x -= mean);
            }
        };
        let d = self.jacobi(&c.s_weight);
        let inv_diag: Vec<f64> = d.iter().chain(&d).copied().collect();
        let sol = pcg(apply, &rhs, None, Some(&inv_diag), project, 1e-14, 20 * HELMHOLTZ_MAX_INNER);
        let (chi, psi) = sol.x.split_at(n);
        (chi.to_vec(), psi.to_vec(), sol.iterations)
    }

    pub fn hamiltonian_parts(&self, params: &ZGridParams, h: &[f64], chi: &[f64], psi: &[f64]) -> HamiltonianParts {
        let c = self.coefficients(h);
        let gc = self.dec.d1bar.apply(chi);
        let gp = self.dec.d1bar.apply(psi);
        let flux_divergence = 0.5
            * (0..self.mesh.n_edges())
                .map(|e| c.s_weight[e] * (gc[e] * gc[e] + gp[e] * gp[e]))
                .sum::<f64>();
        let jacobian = 0.5 * dot(&c.d_inv_hv, &self.edge_jacobian(chi, psi));
        let potential = 0.5
            * params.g
            * (0..self.mesh.n_cells())
                .map(|i| self.mesh.cell_area[i] * h[i] * (h[i] + 2.0 * params.b[i]))
                .sum::<f64>();
        HamiltonianParts {
            flux_divergence,
            jacobian,
            potential,
        }
    }

    /// Bernoulli function `Phi = (1/A) dH/dh` at fixed `(chi, psi)`, with the
    /// sign that accounts for the Helmholtz constraint.
    pub fn bernoulli(&self, params: &ZGridParams, h: &[f64], chi: &[f64], psi: &[f64]) -> Vec<f64> {
        let c = self.coefficients(h);
        let gc = self.dec.d1bar.apply(chi);
        let gp = self.dec.d1bar.apply(psi);
        let edge_term: Vec<f64> = (0..self.mesh.n_edges())
            .map(|e| 0.25 * self.hodge.star[e] * (gc[e] * gc[e] + gp[e] * gp[e]) / (c.he[e] * c.he[e]))
            .collect();
        let curl = self.dec.d2bar.apply(&self.edge_jacobian(chi, psi));
        let vertex_term: Vec<f64> = curl
            .iter()
            .zip(&c.hv)
            .map(|(j, h)| 0.5 * j / (h * h))
            .collect();
        let vertex_gather = self.vertex_mean_transpose(&vertex_term);
        (0..self.mesh.n_cells())
            .map(|i| {
                let edges: f64 = self.mesh.cell_edges[i].iter().map(|&e| edge_term[e]).sum();
                params.g * (h[i] + params.b[i]) + (edges + vertex_gather[i]) * self.hodge.inv_cell_area[i]
            })
            .collect()
    }
}

struct Coefficients {
    he: Vec<f64>,
    hv: Vec<f64>,
    /// `star / h_e`.
    s_weight: Vec<f64>,
    /// `D1 (1 / h_v)`.
    d_inv_hv: Vec<f64>,
}

fn centered(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

/// The nonlinear Z-grid model.
pub struct ZGrid<'a> {
    pub ops: ZOperators<'a>,
    pub params: &'a ZGridParams,
}

impl<'a> ZGrid<'a> {
    pub fn new(mesh: &'a Mesh, dec: &'a Dec, hodge: &'a Hodge, params: &'a ZGridParams) -> Result<Self> {
        for len in [params.f.len(), params.b.len()] {
            if len != mesh.n_cells() {
                return Err(Error::LengthMismatch {
                    expected: mesh.n_cells(),
                    got: len,
                });
            }
        }
        Ok(ZGrid {
            ops: ZOperators::new(mesh, dec, hodge),
            params,
        })
    }

    fn check(&self, state: &ZGridState) -> Result<()> {
        let n = self.ops.mesh.n_cells();
        for len in [state.h.len(), state.zeta.len(), state.mu.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        self.ops.check_depth(&state.h)
    }

    pub fn helmholtz(&self, state: &ZGridState) -> Result<HelmholtzSolution> {
        self.check(state)?;
        self.ops.helmholtz_solve(&state.h, &state.mu, &state.zeta)
    }

    pub fn diagnostics(&self, state: &ZGridState) -> Result<ZGridDiagnostics> {
        let helmholtz = self.helmholtz(state)?;
        let (eta, q) = self.vorticity(state);
        let phi = self.ops.bernoulli(self.params, &state.h, &helmholtz.chi, &helmholtz.psi);
        Ok(ZGridDiagnostics {
            helmholtz,
            eta,
            q,
            phi,
        })
    }

    fn vorticity(&self, state: &ZGridState) -> (Vec<f64>, Vec<f64>) {
        let eta: Vec<f64> = state.zeta.iter().zip(&self.params.f).map(|(z, f)| z + f).collect();
        let q = eta.iter().zip(&state.h).map(|(e, h)| e / h).collect();
        (eta, q)
    }

    pub fn hamiltonian_parts(&self, state: &ZGridState) -> Result<HamiltonianParts> {
        let helm = self.helmholtz(state)?;
        Ok(self.ops.hamiltonian_parts(self.params, &state.h, &helm.chi, &helm.psi))
    }

    pub fn hamiltonian(&self, state: &ZGridState) -> Result<f64> {
        Ok(self.hamiltonian_parts(state)?.total())
    }

    /// `Z = 1/2 sum_i A_i eta_i^2 / h_i`.
    pub fn potential_enstrophy(&self, state: &ZGridState) -> Result<f64> {
        self.check(state)?;
        let (eta, _) = self.vorticity(state);
        Ok(0.5
            * (0..eta.len())
                .map(|i| self.ops.mesh.cell_area[i] * eta[i] * eta[i] / state.h[i])
                .sum::<f64>())
    }

    /// Per-area derivatives of the Hamiltonian: `(Phi, -psi, -chi)`.
    pub fn energy_derivatives(&self, d: &ZGridDiagnostics) -> [Vec<f64>; 3] {
        [
            d.phi.clone(),
            d.helmholtz.psi.iter().map(|x| -x).collect(),
            d.helmholtz.chi.iter().map(|x| -x).collect(),
        ]
    }

    /// Per-area derivatives of the potential enstrophy: `(-q^2/2, q, 0)`.
    pub fn enstrophy_derivatives(&self, d: &ZGridDiagnostics) -> [Vec<f64>; 3] {
        [
            d.q.iter().map(|q| -0.5 * q * q).collect(),
            d.q.clone(),
            vec![0.0; d.q.len()],
        ]
    }

    pub fn tendency(&self, state: &ZGridState) -> Result<ZGridTendency> {
        let d = self.diagnostics(state)?;
        Ok(self.tendency_from(&d))
    }

    pub fn tendency_from(&self, d: &ZGridDiagnostics) -> ZGridTendency {
        let ops = &self.ops;
        let chi = &d.helmholtz.chi;
        let psi = &d.helmholtz.psi;
        let dh = ops.laplacian(chi).into_iter().map(|x| -x).collect();
        let jz = ops.jacobian_zeta(&d.q, psi);
        let fq = ops.flux_div(&d.q, chi);
        let dzeta = jz.iter().zip(&fq).map(|(a, b)| a - b).collect();
        let lp = ops.laplacian(&d.phi);
        let jd = ops.jacobian_delta(&d.q, chi);
        let fp = ops.flux_div(&d.q, psi);
        let dmu = (0..lp.len()).map(|i| -lp[i] + jd[i] + fp[i]).collect();
        ZGridTendency { dh, dzeta, dmu }
    }
}

/// Linearization about rest with mean depth `depth` and constant `f`.
pub struct ZGridLinear<'a> {
    pub ops: ZOperators<'a>,
    pub g: f64,
    pub depth: f64,
    pub f: f64,
}

impl ZGridLinear<'_> {
    /// `dh = -H mu`, `dzeta = -f mu`, `dmu = -g L h + f zeta`.
    pub fn tendency(&self, state: &ZGridState) -> ZGridTendency {
        let lh = self.ops.laplacian(&state.h);
        ZGridTendency {
            dh: state.mu.iter().map(|m| -self.depth * m).collect(),
            dzeta: state.mu.iter().map(|m| -self.f * m).collect(),
            dmu: lh
                .iter()
                .zip(&state.zeta)
                .map(|(l, z)| -self.g * l + self.f * z)
                .collect(),
        }
    }

    /// `(chi, psi)` with `L chi = H mu`, `L psi = H zeta`.
    pub fn potentials(&self, state: &ZGridState) -> Result<(Vec<f64>, Vec<f64>)> {
        let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| self.depth * x).collect() };
        let mut mu = scale(&state.mu);
        let mut zeta = scale(&state.zeta);
        self.ops.remove_mean(&mut mu);
        self.ops.remove_mean(&mut zeta);
        Ok((self.ops.poisson(&mu)?, self.ops.poisson(&zeta)?))
    }

    /// `1/2 sum A (g h^2 - chi mu - psi zeta)`.
    pub fn energy(&self, state: &ZGridState) -> Result<f64> {
        let (chi, psi) = self.potentials(state)?;
        let a = &self.ops.mesh.cell_area;
        Ok(0.5
            * (0..a.len())
                .map(|i| a[i] * (self.g * state.h[i] * state.h[i] - chi[i] * state.mu[i] - psi[i] * state.zeta[i]))
                .sum::<f64>())
    }

    pub fn energy_derivatives(&self, state: &ZGridState) -> Result<[Vec<f64>; 3]> {
        let (chi, psi) = self.potentials(state)?;
        Ok([
            state.h.iter().map(|h| self.g * h).collect(),
            psi.iter().map(|x| -x).collect(),
            chi.iter().map(|x| -x).collect(),
        ])
    }

    /// Balanced perturbation from a streamfunction `s`: `zeta = L s`,
    /// `h = (f/g) s`, `mu = 0`.
    pub fn geostrophic_state(&self, s: &[f64]) -> ZGridState {
        ZGridState {
            h: s.iter().map(|x| self.f / self.g * x).collect(),
            zeta: self.ops.laplacian(s),
            mu: vec![0.0; s.len()],
        }
    }
}
