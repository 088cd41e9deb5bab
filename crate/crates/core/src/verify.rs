//! Property checks on a single mesh, shared by the `verify` command and the
//! acceptance tests. Every check reports the measured value together with
//! the bound it is held to.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cgrid::{rest_state, CGrid, CGridLinear, CGridParams, CGridState};
use crate::conserve::{contract, Term};
use crate::dec::{Dec, IntCsr};
use crate::driver::{Model, State};
use crate::error::Result;
use crate::hodge::{Hodge, WOperator, W_CONSTRAINT_TOLERANCE};
use crate::linalg::{dot, max_abs};
use crate::mesh::{validate_mesh, Mesh};
use crate::qflux::{
    assemble_cell_system, solve_alpha_unchecked, verify_q, AlphaCoefficients, QOperator, QReport, QVariant,
    ALPHA_RESIDUAL_TOLERANCE,
};
use crate::zgrid::{ZGrid, ZGridLinear, ZGridParams, ZGridState, ZOperators};

pub const ENERGY_CONTRACTION_C: f64 = 1e-12;
pub const ENSTROPHY_CONTRACTION_C: f64 = 1e-10;
pub const CONTRACTION_Z: f64 = 1e-11;
pub const JACOBIAN_AGREEMENT: f64 = 1e-13;
pub const ADJOINT_TOLERANCE: f64 = 1e-12;
pub const PV_TOLERANCE: f64 = 1e-12;
pub const NEGATIVE_CONTROL_FLOOR: f64 = 1e-3;
pub const NEGATIVE_CONTROL_STATES: usize = 11;
pub const FD_TOLERANCE: f64 = 1e-5;
pub const BALANCE_TOLERANCE: f64 = 1e-10;
pub const HELMHOLTZ_RESIDUAL: f64 = 1e-11;
/// Relative size of a sum of exactly telescoping tendencies.
pub const TELESCOPING_ROUNDOFF: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtMost(t) => x <= t,
            Bound::AtLeast(t) => x >= t,
            Bound::Within(lo, hi) => x >= lo && x <= hi,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::AtMost(t) if t == 0.0 => write!(f, "== 0"),
            Bound::AtMost(t) => write!(f, "<= {t:.0e}"),
            Bound::AtLeast(t) => write!(f, ">= {t:.0e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub mesh: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn new(name: &str, mesh: &Mesh, value: f64, bound: Bound) -> Self {
        Check {
            name: name.into(),
            mesh: mesh.label.clone(),
            value,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.bound.holds(self.value)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<28} {:<22} {:.3e} ({})",
            if self.passed() { "ok" } else { "FAIL" },
            self.name,
            self.mesh,
            self.value,
            self.bound
        )
    }
}

/// Settings for [`suite`].
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub g: f64,
    pub f: f64,
    pub depth: f64,
    pub q_trials: usize,
    /// Upper bound on perturbed entries per field in the finite-difference checks.
    pub fd_samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            g: 9.80616,
            f: 1.0,
            depth: 1.0,
            q_trials: 100,
            fd_samples: 48,
            seed: 1,
        }
    }
}

/// Mesh-derived operators built once per mesh.
pub struct Operators<'a> {
    pub mesh: &'a Mesh,
    pub dec: Dec,
    pub hodge: Hodge,
    pub w: WOperator,
    pub alpha: AlphaCoefficients,
}

impl<'a> Operators<'a> {
    pub fn new(mesh: &'a Mesh) -> Result<Self> {
        let dec = Dec::new(mesh);
        let hodge = Hodge::new(mesh)?;
        let w = WOperator::build(mesh, &dec, &hodge)?;
        let alpha = solve_alpha_unchecked(mesh, &hodge);
        Ok(Operators {
            mesh,
            dec,
            hodge,
            w,
            alpha,
        })
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = max_abs(a).max(max_abs(b));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Depth within 10 % of `depth` and unit-scale random winds.
pub fn random_cgrid_state(mesh: &Mesh, hodge: &Hodge, depth: f64, rng: &mut ChaCha8Rng) -> CGridState {
    let rest = rest_state(mesh, hodge, depth);
    CGridState {
        m: rest.m.iter().map(|m| m * (1.0 + 0.1 * rng.random_range(-1.0..1.0))).collect(),
        u: uniform(rng, mesh.n_edges()),
    }
}

/// Depth within 15 % of `depth`, mean-free random divergence and vorticity.
pub fn random_zgrid_state(mesh: &Mesh, depth: f64, rng: &mut ChaCha8Rng) -> ZGridState {
    let n = mesh.n_cells();
    let mut s = ZGridState {
        h: (0..n).map(|_| depth * (1.0 + 0.15 * rng.random_range(-1.0..1.0))).collect(),
        zeta: uniform(rng, n),
        mu: uniform(rng, n),
    };
    let total = mesh.total_area();
    for v in [&mut s.zeta, &mut s.mu] {
        let mean = dot(v, &mesh.cell_area) / total;
        v.iter_mut().for_each(|x| *x -= mean);
    }
    s
}

/// Largest absolute column sum of an integer operator.
fn max_column_sum(op: &IntCsr) -> f64 {
    let mut sums = vec![0i64; op.n_cols];
    for r in 0..op.n_rows {
        for (c, x) in op.row(r) {
            sums[c] += x;
        }
    }
    sums.iter().map(|x| x.abs()).max().unwrap_or(0) as f64
}

fn sum_relative(x: &[f64]) -> f64 {
    let mag: f64 = x.iter().map(|v| v.abs()).sum();
    if mag > 0.0 {
        x.iter().sum::<f64>().abs() / mag
    } else {
        0.0
    }
}

/// Structural and metric mesh checks, including the exact DEC identities.
pub fn mesh_checks(mesh: &Mesh) -> Vec<Check> {
    validate_mesh(mesh)
        .checks
        .iter()
        .map(|c| Check::new(c.name, mesh, c.residual, Bound::AtMost(c.tolerance)))
        .collect()
}

pub fn w_checks(ops: &Operators, seed: u64) -> Vec<Check> {
    let m = ops.mesh;
    vec![
        Check::new("w_antisymmetry", m, ops.w.antisymmetry_defect(), Bound::AtMost(0.0)),
        Check::new(
            "w_constraint",
            m,
            ops.w.matrix_constraint_residual(m, &ops.dec, &ops.hodge),
            Bound::AtMost(W_CONSTRAINT_TOLERANCE),
        ),
        Check::new(
            "w_constraint_random",
            m,
            ops.w.random_constraint_residual(&ops.dec, &ops.hodge, 20, seed),
            Bound::AtMost(W_CONSTRAINT_TOLERANCE),
        ),
    ]
}

/// Size `(equations, unknowns)` of the coefficient system of cell `i`.
pub fn alpha_system_size(ops: &Operators, i: usize) -> (usize, usize) {
    let sys = assemble_cell_system(ops.mesh, &ops.hodge, i);
    (sys.n_equations(), sys.n_unknowns())
}

pub fn alpha_checks(ops: &Operators) -> Vec<Check> {
    vec![Check::new(
        "alpha_residual",
        ops.mesh,
        ops.alpha.max_residual(),
        Bound::AtMost(ALPHA_RESIDUAL_TOLERANCE),
    )]
}

pub fn q_checks(ops: &Operators, trials: usize, seed: u64) -> Vec<Check> {
    let q = QOperator::Conserving(&ops.alpha);
    let r = verify_q(ops.mesh, &ops.dec, &ops.hodge, &ops.w, &q, trials, seed);
    q_report_checks(ops.mesh, &r)
}

pub fn q_report_checks(m: &Mesh, r: &QReport) -> Vec<Check> {
    vec![
        Check::new("q_enstrophy_condition", m, r.max_enstrophy_residual, Bound::AtMost(ALPHA_RESIDUAL_TOLERANCE)),
        Check::new("q_indicator_condition", m, r.max_indicator_residual, Bound::AtMost(ALPHA_RESIDUAL_TOLERANCE)),
        Check::new("q_adjoint", m, r.max_adjoint_defect, Bound::AtMost(ADJOINT_TOLERANCE)),
        Check::new("q_pv_compatibility", m, r.max_pv_defect, Bound::AtMost(PV_TOLERANCE)),
    ]
}

/// Energy and enstrophy contractions `(dH, dZ)` of the C-grid tendency.
fn cgrid_contractions(model: &CGrid, state: &CGridState, q: &QOperator) -> Result<(f64, f64)> {
    let d = model.diagnostics(state)?;
    let t = model.tendency_from(&d, q);
    let (zm, zu) = model.enstrophy_derivatives(&d);
    let de = contract(&[Term::new(&d.phi, &t.dm), Term::new(&d.flux, &t.du)]);
    let dz = contract(&[Term::new(&zm, &t.dm), Term::new(&zu, &t.du)]);
    Ok((de.relative(), dz.relative()))
}

/// Contractions of the conserving C-grid scheme and the telescoping of the
/// mass and circulation tendencies.
pub fn cgrid_conservation(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let params = CGridParams::new(m, opt.g, |_| opt.f);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let state = random_cgrid_state(m, &ops.hodge, opt.depth, &mut rng);
    let q = QOperator::Conserving(&ops.alpha);
    let (de, dz) = cgrid_contractions(&model, &state, &q)?;
    let t = model.tendency(&state, &q)?;
    let circulation = ops.dec.d2bar.apply(&t.du);
    Ok(vec![
        Check::new("cgrid_energy_contraction", m, de, Bound::AtMost(ENERGY_CONTRACTION_C)),
        Check::new("cgrid_enstrophy_contraction", m, dz, Bound::AtMost(ENSTROPHY_CONTRACTION_C)),
        Check::new("mass_column_sums", m, max_column_sum(&ops.dec.d2), Bound::AtMost(0.0)),
        Check::new("circulation_column_sums", m, max_column_sum(&ops.dec.d2bar), Bound::AtMost(0.0)),
        Check::new("mass_tendency_sum", m, sum_relative(&t.dm), Bound::AtMost(TELESCOPING_ROUNDOFF)),
        Check::new(
            "circulation_tendency_sum",
            m,
            sum_relative(&circulation),
            Bound::AtMost(TELESCOPING_ROUNDOFF),
        ),
    ])
}

/// The single-property operators must each break the other invariant. The
/// reported value is the median relative contraction over
/// [`NEGATIVE_CONTROL_STATES`] random states, since a single state can land
/// on a near-cancellation by chance.
pub fn negative_controls(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let params = CGridParams::new(m, opt.g, |_| opt.f);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params)?;
    let energy_only = QOperator::Variant(QVariant::EnergyOnly, m, &ops.w);
    let enstrophy_only = QOperator::Variant(QVariant::EnstrophyOnly, m, &ops.w);
    let mut dz = Vec::with_capacity(NEGATIVE_CONTROL_STATES);
    let mut de = Vec::with_capacity(NEGATIVE_CONTROL_STATES);
    for k in 0..NEGATIVE_CONTROL_STATES {
        let mut rng = ChaCha8Rng::seed_from_u64(opt.seed.wrapping_add(k as u64));
        let state = random_cgrid_state(m, &ops.hodge, opt.depth, &mut rng);
        dz.push(cgrid_contractions(&model, &state, &energy_only)?.1);
        de.push(cgrid_contractions(&model, &state, &enstrophy_only)?.0);
    }
    Ok(vec![
        Check::new("energy_only_enstrophy_loss", m, median(dz), Bound::AtLeast(NEGATIVE_CONTROL_FLOOR)),
        Check::new("enstrophy_only_energy_loss", m, median(de), Bound::AtLeast(NEGATIVE_CONTROL_FLOOR)),
    ])
}

fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    x[x.len() / 2]
}

pub fn zgrid_conservation(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let params = ZGridParams::new(m, opt.g, |_| opt.f);
    let model = ZGrid::new(m, &ops.dec, &ops.hodge, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let state = random_zgrid_state(m, opt.depth, &mut rng);
    let d = model.diagnostics(&state)?;
    let t = model.tendency_from(&d);
    let [eh, ez, em] = model.energy_derivatives(&d);
    let [zh, zz, _] = model.enstrophy_derivatives(&d);
    let a = &m.cell_area;
    let de = contract(&[
        Term::weighted(&eh, &t.dh, a),
        Term::weighted(&ez, &t.dzeta, a),
        Term::weighted(&em, &t.dmu, a),
    ]);
    let dz = contract(&[Term::weighted(&zh, &t.dh, a), Term::weighted(&zz, &t.dzeta, a)]);
    let mass: Vec<f64> = t.dh.iter().zip(a).map(|(x, w)| x * w).collect();
    Ok(vec![
        Check::new("zgrid_energy_contraction", m, de.relative(), Bound::AtMost(CONTRACTION_Z)),
        Check::new("zgrid_enstrophy_contraction", m, dz.relative(), Bound::AtMost(CONTRACTION_Z)),
        Check::new("zgrid_mass_tendency_sum", m, sum_relative(&mass), Bound::AtMost(TELESCOPING_ROUNDOFF)),
    ])
}

/// `J_delta = J_zeta`; only meaningful when every dual cell is a triangle.
pub fn jacobian_agreement(ops: &Operators, seed: u64) -> Option<Check> {
    let m = ops.mesh;
    if !m.has_triangular_dual() {
        return None;
    }
    let z = ZOperators::new(m, &ops.dec, &ops.hodge);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = uniform(&mut rng, m.n_cells());
    let s = uniform(&mut rng, m.n_cells());
    let value = rel_max_diff(&z.jacobian_delta(&q, &s), &z.jacobian_zeta(&q, &s));
    Some(Check::new("jacobian_agreement", m, value, Bound::AtMost(JACOBIAN_AGREEMENT)))
}

/// Indices to perturb: all of them, or an evenly spread subset.
fn sample_indices(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        (0..n).collect()
    } else {
        (0..max).map(|k| k * n / max).collect()
    }
}

/// Central difference of `energy` along coordinate `k`, scaled by `1 / weight`,
/// compared with `analytic` in the max norm relative to `max |analytic|`.
fn fd_error<S: Clone>(
    state: &S,
    field: impl Fn(&mut S) -> &mut Vec<f64>,
    analytic: &[f64],
    weight: impl Fn(usize) -> f64,
    energy: impl Fn(&S) -> Result<f64>,
    samples: usize,
) -> Result<f64> {
    let mut probe = state.clone();
    let scale = max_abs(field(&mut probe)).max(1.0);
    let eps = 1e-6 * scale;
    let mut worst: f64 = 0.0;
    for i in sample_indices(analytic.len(), samples) {
        let mut plus = state.clone();
        field(&mut plus)[i] += eps;
        let mut minus = state.clone();
        field(&mut minus)[i] -= eps;
        let fd = (energy(&plus)? - energy(&minus)?) / (2.0 * eps) / weight(i);
        worst = worst.max((fd - analytic[i]).abs());
    }
    Ok(worst / max_abs(analytic))
}

/// Analytic functional derivatives of both Hamiltonians against central
/// differences.
pub fn derivative_checks(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let n = opt.fd_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);

    let cparams = CGridParams::new(m, opt.g, |_| opt.f);
    let c = CGrid::new(m, &ops.dec, &ops.hodge, &cparams)?;
    let cs = random_cgrid_state(m, &ops.hodge, opt.depth, &mut rng);
    let (phi, flux) = c.functional_derivatives(&cs)?;
    let ch = |s: &CGridState| c.hamiltonian(s);
    let e_phi = fd_error(&cs, |s| &mut s.m, &phi, |_| 1.0, ch, n)?;
    let e_flux = fd_error(&cs, |s| &mut s.u, &flux, |_| 1.0, ch, n)?;

    let zparams = ZGridParams::new(m, opt.g, |_| opt.f);
    let z = ZGrid::new(m, &ops.dec, &ops.hodge, &zparams)?;
    let zs = random_zgrid_state(m, opt.depth, &mut rng);
    let d = z.diagnostics(&zs)?;
    let [zphi, mpsi, mchi] = z.energy_derivatives(&d);
    let zh = |s: &ZGridState| z.hamiltonian(s);
    let area = |i: usize| m.cell_area[i];
    let e_zphi = fd_error(&zs, |s| &mut s.h, &zphi, area, zh, n)?;
    let e_psi = fd_error(&zs, |s| &mut s.zeta, &mpsi, area, zh, n)?;
    let e_chi = fd_error(&zs, |s| &mut s.mu, &mchi, area, zh, n)?;

    let b = Bound::AtMost(FD_TOLERANCE);
    Ok(vec![
        Check::new("cgrid_fd_phi", m, e_phi, b),
        Check::new("cgrid_fd_flux", m, e_flux, b),
        Check::new("zgrid_fd_phi", m, e_zphi, b),
        Check::new("zgrid_fd_psi", m, e_psi, b),
        Check::new("zgrid_fd_chi", m, e_chi, b),
    ])
}

/// Rest states are exact equilibria of both nonlinear schemes and
/// geostrophic states are equilibria of both linearizations.
pub fn steady_state_checks(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let cparams = CGridParams::new(m, opt.g, |_| opt.f);
    let c = CGrid::new(m, &ops.dec, &ops.hodge, &cparams)?;
    let t = c.tendency(&rest_state(m, &ops.hodge, opt.depth), &QOperator::Conserving(&ops.alpha))?;
    let c_rest = max_abs(&t.dm).max(max_abs(&t.du));

    let zparams = ZGridParams::new(m, opt.g, |_| opt.f);
    let z = ZGrid::new(m, &ops.dec, &ops.hodge, &zparams)?;
    let t = z.tendency(&ZGridState::rest(m, opt.depth))?;
    let z_rest = max_abs(&t.dh).max(max_abs(&t.dzeta)).max(max_abs(&t.dmu));

    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let lin = CGridLinear {
        mesh: m,
        dec: &ops.dec,
        hodge: &ops.hodge,
        w: &ops.w,
        g: opt.g,
        depth: opt.depth,
        f: opt.f,
    };
    let s = lin.geostrophic_state(&uniform(&mut rng, m.n_vertices()))?;
    let t = lin.tendency(&s);
    let c_geo = max_abs(&t.dm).max(max_abs(&t.du)) / max_abs(&s.m).max(max_abs(&s.u));

    let zlin = ZGridLinear {
        ops: ZOperators::new(m, &ops.dec, &ops.hodge),
        g: opt.g,
        depth: opt.depth,
        f: opt.f,
    };
    let s = zlin.geostrophic_state(&uniform(&mut rng, m.n_cells()));
    let t = zlin.tendency(&s);
    let z_geo = max_abs(&t.dh).max(max_abs(&t.dzeta)).max(max_abs(&t.dmu))
        / max_abs(&s.h).max(max_abs(&s.zeta));

    Ok(vec![
        Check::new("cgrid_rest_tendency", m, c_rest, Bound::AtMost(0.0)),
        Check::new("zgrid_rest_tendency", m, z_rest, Bound::AtMost(0.0)),
        Check::new("cgrid_geostrophic_tendency", m, c_geo, Bound::AtMost(BALANCE_TOLERANCE)),
        Check::new("zgrid_geostrophic_tendency", m, z_geo, Bound::AtMost(BALANCE_TOLERANCE)),
    ])
}

/// Helmholtz residual on a random state and the constant-depth reduction to
/// two Poisson problems.
pub fn helmholtz_checks(ops: &Operators, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let m = ops.mesh;
    let z = ZOperators::new(m, &ops.dec, &ops.hodge);
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let s = random_zgrid_state(m, opt.depth, &mut rng);
    let sol = z.helmholtz_solve(&s.h, &s.mu, &s.zeta)?;

    let h = vec![opt.depth; m.n_cells()];
    let flat = z.helmholtz_solve(&h, &s.mu, &s.zeta)?;
    let scaled = |v: &[f64]| -> Result<Vec<f64>> {
        let mut rhs: Vec<f64> = v.iter().map(|x| opt.depth * x).collect();
        z.remove_mean(&mut rhs);
        z.poisson(&rhs)
    };
    let chi = scaled(&s.mu)?;
    let psi = scaled(&s.zeta)?;
    let reduction = rel_max_diff(&flat.chi, &chi).max(rel_max_diff(&flat.psi, &psi));

    Ok(vec![
        Check::new("helmholtz_residual", m, sol.relative_residual, Bound::AtMost(HELMHOLTZ_RESIDUAL)),
        Check::new("helmholtz_constant_depth", m, reduction, Bound::AtMost(BALANCE_TOLERANCE)),
    ])
}

/// Relative energy drifts after integrating to `horizon` with steps `dt` and
/// `dt / 2`, and their ratio.
pub fn energy_drift_ratio(model: &Model, initial: &State, horizon: f64, dt: f64) -> Result<(f64, f64, f64)> {
    let e0 = model.record(initial, 0, 0.0)?.energy;
    let drift = |dt: f64| -> Result<f64> {
        let steps = (horizon / dt).round() as usize;
        let mut s = initial.clone();
        for _ in 0..steps {
            s = model.step(&s, dt)?;
        }
        let e = model.record(&s, steps, horizon)?.energy;
        Ok(((e - e0) / e0).abs())
    };
    let coarse = drift(dt)?;
    let fine = drift(0.5 * dt)?;
    Ok((coarse, fine, coarse / fine))
}

/// Every single-mesh check.
pub fn suite(mesh: &Mesh, opt: &SuiteOptions) -> Result<Vec<Check>> {
    let ops = Operators::new(mesh)?;
    let mut out = mesh_checks(mesh);
    out.extend(w_checks(&ops, opt.seed));
    out.extend(alpha_checks(&ops));
    out.extend(q_checks(&ops, opt.q_trials, opt.seed));
    out.extend(cgrid_conservation(&ops, opt)?);
    out.extend(negative_controls(&ops, opt)?);
    out.extend(zgrid_conservation(&ops, opt)?);
    out.extend(jacobian_agreement(&ops, opt.seed));
    out.extend(derivative_checks(&ops, opt)?);
    out.extend(steady_state_checks(&ops, opt)?);
    out.extend(helmholtz_checks(&ops, opt)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_hex_mesh;

    #[test]
    fn suite_passes_on_hex() {
        let mesh = build_hex_mesh(4, 1.0).unwrap();
        let checks = suite(&mesh, &SuiteOptions::default()).unwrap();
        for c in &checks {
            eprintln!("{c}");
        }
        assert!(checks.iter().all(Check::passed));
    }

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(0.0).holds(0.0));
        assert!(!Bound::AtMost(0.0).holds(1e-300));
        assert!(Bound::AtLeast(1e-3).holds(1e-3));
        assert!(Bound::Within(13.0, 19.0).holds(16.0));
        assert!(!Bound::Within(13.0, 19.0).holds(32.0));
    }
}
