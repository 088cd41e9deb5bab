//! Run configuration, initial conditions, the RK4 time loop and output files.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! [run]
//! scheme = "zgrid"            # or "cgrid"
//! dt = 0.01
//! steps = 200
//! output_interval = 1         # diagnostics cadence in steps
//! snapshot_interval = 0       # 0 writes only the final state
//! seed = 1
//! q_variant = "conserving"    # cgrid only: conserving | energy_only | enstrophy_only
//! alpha_mode = "decoupled"    # cgrid only: decoupled | coupled
//! output = "out"              # run directory
//! alpha_cache = "out/alpha.txt"
//!
//! [mesh]
//! kind = "icosahedral"        # square | hex | voronoi | icosahedral | file
//! level = 1
//! radius = 1.0
//!
//! [physics]
//! g = 9.81
//! depth = 1.0
//! f = 1.0                     # constant Coriolis parameter
//! # omega = 1.0               # sphere only: f = 2 omega sin(latitude)
//!
//! [initial]
//! name = "random_perturbation"
//! amplitude = 0.01            # depth perturbation
//! velocity = 0.1
//!
//! [tolerances]
//! energy = 1e-11
//! enstrophy = 1e-11
//! ```
//!
//! Mesh kinds take `nx, ny, lx, ly` (square), `n, length` (hex),
//! `seeds, lx, ly, seed` (voronoi), `level, radius` (icosahedral) or `path`
//! (file). Relative paths are resolved against the directory of the
//! configuration file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::cgrid::{rest_state, CGrid, CGridLinear, CGridParams, CGridState};
use crate::conserve::{contract, CsvWriter, DiagnosticsRecord, Scheme, Series, Term};
use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::hodge::{Hodge, WOperator};
use crate::mesh::{
    build_hex_mesh, build_icosahedral_mesh, build_square_mesh, build_voronoi_mesh, read_mesh, Domain, Mesh, V3,
};
use crate::qflux::{
    solve_alpha, solve_alpha_coupled, AlphaCoefficients, AlphaMode, QOperator, QVariant, ALPHA_RESIDUAL_TOLERANCE,
};
use crate::textio::{TableReader, TableWriter};
use crate::zgrid::{ZGrid, ZGridLinear, ZGridParams, ZGridState, ZOperators};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub physics: Physics,
    pub initial: InitialSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scheme: String,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub output_interval: usize,
    #[serde(default)]
    pub snapshot_interval: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "conserving")]
    pub q_variant: String,
    #[serde(default = "decoupled")]
    pub alpha_mode: String,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub alpha_cache: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn conserving() -> String {
    "conserving".into()
}

fn decoupled() -> String {
    "decoupled".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Square {
        nx: usize,
        ny: usize,
        #[serde(default = "unit")]
        lx: f64,
        #[serde(default = "unit")]
        ly: f64,
    },
    Hex {
        n: usize,
        #[serde(default = "unit")]
        length: f64,
    },
    Voronoi {
        seeds: usize,
        #[serde(default = "unit")]
        lx: f64,
        #[serde(default = "unit")]
        ly: f64,
        #[serde(default)]
        seed: u64,
    },
    Icosahedral {
        level: u32,
        #[serde(default = "unit")]
        radius: f64,
    },
    File {
        path: PathBuf,
    },
}

fn unit() -> f64 {
    1.0
}

impl MeshSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Mesh> {
        match self {
            MeshSpec::Square { nx, ny, lx, ly } => build_square_mesh(*nx, *ny, *lx, *ly),
            MeshSpec::Hex { n, length } => build_hex_mesh(*n, *length),
            MeshSpec::Voronoi { seeds, lx, ly, seed } => build_voronoi_mesh(*seeds, *lx, *ly, *seed),
            MeshSpec::Icosahedral { level, radius } => build_icosahedral_mesh(*level, *radius),
            MeshSpec::File { path } => read_mesh(&base_dir.join(path)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default = "gravity")]
    pub g: f64,
    #[serde(default = "unit")]
    pub depth: f64,
    pub f: Option<f64>,
    pub omega: Option<f64>,
}

fn gravity() -> f64 {
    9.80616
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            g: gravity(),
            depth: 1.0,
            f: None,
            omega: None,
        }
    }
}

impl Physics {
    /// Coriolis parameter at a point.
    pub fn coriolis(&self, mesh: &Mesh, x: &V3) -> f64 {
        match (self.omega, mesh.domain.is_sphere()) {
            (Some(omega), true) => 2.0 * omega * mesh.latitude(x).sin(),
            _ => self.f.unwrap_or(0.0),
        }
    }

    /// The constant `f` used by the linearized schemes.
    fn constant_f(&self) -> Result<f64> {
        if self.omega.is_some() {
            return Err(Error::Config(
                "balanced initial states need a constant `f`, not `omega`".into(),
            ));
        }
        Ok(self.f.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub name: String,
    /// Depth perturbation amplitude; defaults to `1e-3 depth`.
    pub amplitude: Option<f64>,
    /// Velocity scale.
    #[serde(default)]
    pub velocity: f64,
    /// Wavenumbers along the two periods (plane) or zonal wavenumber
    /// (sphere).
    #[serde(default = "first_mode")]
    pub wavenumber: [i32; 2],
    pub seed: Option<u64>,
}

fn first_mode() -> [i32; 2] {
    [1, 0]
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub energy: Option<f64>,
    pub enstrophy: Option<f64>,
}

impl Tolerances {
    /// `(energy, enstrophy)` contraction tolerances with scheme defaults.
    pub fn resolve(&self, scheme: Scheme) -> (f64, f64) {
        let (e, z) = match scheme {
            Scheme::CGrid => (1e-12, 1e-10),
            Scheme::ZGrid => (1e-11, 1e-11),
        };
        (self.energy.unwrap_or(e), self.enstrophy.unwrap_or(z))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn scheme(&self) -> Result<Scheme> {
        Scheme::parse(&self.run.scheme)
    }

    pub fn q_variant(&self) -> Result<QVariant> {
        QVariant::parse(&self.run.q_variant)
    }

    pub fn alpha_mode(&self) -> Result<AlphaMode> {
        match self.run.alpha_mode.as_str() {
            "decoupled" => Ok(AlphaMode::Decoupled),
            "coupled" => Ok(AlphaMode::Coupled),
            other => Err(Error::Unknown {
                what: "alpha mode",
                name: other.into(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme()?;
        self.q_variant()?;
        self.alpha_mode()?;
        if !(self.run.dt > 0.0) || !self.run.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.run.dt)));
        }
        if self.run.output_interval == 0 {
            return Err(Error::Config("output_interval must be at least 1".into()));
        }
        if !(self.physics.depth > 0.0) || !(self.physics.g > 0.0) {
            return Err(Error::Config("depth and g must be positive".into()));
        }
        if let MeshSpec::File { path } = &self.mesh {
            let p = self.base_dir.join(path);
            if !p.exists() {
                return Err(Error::Config(format!("mesh file {} does not exist", p.display())));
            }
        }
        InitialKind::parse(&self.initial.name)?;
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.run.output)
    }

    pub fn alpha_cache(&self) -> PathBuf {
        match &self.run.alpha_cache {
            Some(p) => self.base_dir.join(p),
            None => self.output_dir().join("alpha.txt"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Rest,
    RandomPerturbation,
    GravityWave,
    GeostrophicBalance,
    SolidRotationSphere,
}

impl InitialKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "rest" => InitialKind::Rest,
            "random_perturbation" => InitialKind::RandomPerturbation,
            "gravity_wave" => InitialKind::GravityWave,
            "geostrophic_balance" => InitialKind::GeostrophicBalance,
            "solid_rotation_sphere" => InitialKind::SolidRotationSphere,
            _ => {
                return Err(Error::Unknown {
                    what: "initial condition",
                    name: name.into(),
                })
            }
        })
    }
}

/// Prognostic fields of either scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    C(CGridState),
    Z(ZGridState),
}

impl State {
    pub fn arrays(&self) -> Vec<&[f64]> {
        match self {
            State::C(s) => vec![&s.m, &s.u],
            State::Z(s) => vec![&s.h, &s.zeta, &s.mu],
        }
    }

    fn arrays_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            State::C(s) => vec![&mut s.m, &mut s.u],
            State::Z(s) => vec![&mut s.h, &mut s.zeta, &mut s.mu],
        }
    }

    /// `self + sum_k a_k x_k`.
    pub fn add_scaled(&self, parts: &[(f64, &State)]) -> State {
        let mut out = self.clone();
        for (a, x) in parts {
            for (dst, src) in out.arrays_mut().into_iter().zip(x.arrays()) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            State::C(_) => Scheme::CGrid,
            State::Z(_) => Scheme::ZGrid,
        }
    }
}

/// Classical four-stage Runge-Kutta step.
pub fn rk4_step<F>(x: &State, dt: f64, mut tendency: F) -> Result<State>
where
    F: FnMut(&State) -> Result<State>,
{
    let k1 = tendency(x)?;
    let k2 = tendency(&x.add_scaled(&[(0.5 * dt, &k1)]))?;
    let k3 = tendency(&x.add_scaled(&[(0.5 * dt, &k2)]))?;
    let k4 = tendency(&x.add_scaled(&[(dt, &k3)]))?;
    let s = dt / 6.0;
    Ok(x.add_scaled(&[(s, &k1), (2.0 * s, &k2), (2.0 * s, &k3), (s, &k4)]))
}

enum SchemeData {
    C {
        params: CGridParams,
        w: WOperator,
        alpha: Option<AlphaCoefficients>,
        variant: QVariant,
    },
    Z {
        params: ZGridParams,
    },
}

/// A mesh together with the operators and parameters of one scheme.
pub struct Model {
    pub mesh: Mesh,
    pub dec: Dec,
    pub hodge: Hodge,
    physics: SchemeData,
}

impl Model {
    pub fn cgrid(mesh: Mesh, params: CGridParams, alpha: Option<AlphaCoefficients>, variant: QVariant) -> Result<Self> {
        let dec = Dec::new(&mesh);
        let hodge = Hodge::new(&mesh)?;
        let w = WOperator::build(&mesh, &dec, &hodge)?;
        if variant == QVariant::Conserving {
            match &alpha {
                Some(a) => a.check_mesh(&mesh)?,
                None => {
                    return Err(Error::InvalidParameter(
                        "the conserving Q operator needs alpha coefficients".into(),
                    ))
                }
            }
        }
        CGrid::new(&mesh, &dec, &hodge, &params)?;
        Ok(Model {
            mesh,
            dec,
            hodge,
            physics: SchemeData::C {
                params,
                w,
                alpha,
                variant,
            },
        })
    }

    pub fn zgrid(mesh: Mesh, params: ZGridParams) -> Result<Self> {
        let dec = Dec::new(&mesh);
        let hodge = Hodge::new(&mesh)?;
        ZGrid::new(&mesh, &dec, &hodge, &params)?;
        Ok(Model {
            mesh,
            dec,
            hodge,
            physics: SchemeData::Z { params },
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self.physics {
            SchemeData::C { .. } => Scheme::CGrid,
            SchemeData::Z { .. } => Scheme::ZGrid,
        }
    }

    fn q_operator<'a>(&'a self, w: &'a WOperator, alpha: &'a Option<AlphaCoefficients>, variant: QVariant) -> QOperator<'a> {
        match (variant, alpha) {
            (QVariant::Conserving, Some(a)) => QOperator::Conserving(a),
            _ => QOperator::Variant(variant, &self.mesh, w),
        }
    }

    pub fn tendency(&self, state: &State) -> Result<State> {
        match (&self.physics, state) {
            (SchemeData::C { params, w, alpha, variant }, State::C(s)) => {
                let model = CGrid::new(&self.mesh, &self.dec, &self.hodge, params)?;
                let t = model.tendency(s, &self.q_operator(w, alpha, *variant))?;
                Ok(State::C(CGridState { m: t.dm, u: t.du }))
            }
            (SchemeData::Z { params }, State::Z(s)) => {
                let model = ZGrid::new(&self.mesh, &self.dec, &self.hodge, params)?;
                let t = model.tendency(s)?;
                Ok(State::Z(ZGridState {
                    h: t.dh,
                    zeta: t.dzeta,
                    mu: t.dmu,
                }))
            }
            _ => Err(Error::InvalidParameter("state does not match the model scheme".into())),
        }
    }

    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        rk4_step(state, dt, |s| self.tendency(s))
    }

    /// Conserved quantities and instantaneous contraction residuals.
    pub fn record(&self, state: &State, step: usize, time: f64) -> Result<DiagnosticsRecord> {
        match (&self.physics, state) {
            (SchemeData::C { params, w, alpha, variant }, State::C(s)) => {
                let model = CGrid::new(&self.mesh, &self.dec, &self.hodge, params)?;
                let d = model.diagnostics(s)?;
                let t = model.tendency_from(&d, &self.q_operator(w, alpha, *variant));
                let (zm, zu) = model.enstrophy_derivatives(&d);
                Ok(DiagnosticsRecord {
                    scheme: Scheme::CGrid,
                    step,
                    time,
                    mass: s.m.iter().sum(),
                    circulation: d.eta.iter().sum(),
                    energy: model.hamiltonian(s)?,
                    enstrophy: crate::cgrid::enstrophy_from(&d),
                    energy_drift: 0.0,
                    enstrophy_drift: 0.0,
                    energy_rate: contract(&[Term::new(&d.phi, &t.dm), Term::new(&d.flux, &t.du)]),
                    enstrophy_rate: contract(&[Term::new(&zm, &t.dm), Term::new(&zu, &t.du)]),
                })
            }
            (SchemeData::Z { params }, State::Z(s)) => {
                let model = ZGrid::new(&self.mesh, &self.dec, &self.hodge, params)?;
                let d = model.diagnostics(s)?;
                let t = model.tendency_from(&d);
                let a = &self.mesh.cell_area;
                let [eh, ez, em] = model.energy_derivatives(&d);
                let [zh, zz, _] = model.enstrophy_derivatives(&d);
                let energy = model
                    .ops
                    .hamiltonian_parts(params, &s.h, &d.helmholtz.chi, &d.helmholtz.psi)
                    .total();
                Ok(DiagnosticsRecord {
                    scheme: Scheme::ZGrid,
                    step,
                    time,
                    mass: s.h.iter().zip(a).map(|(h, a)| h * a).sum(),
                    circulation: d.eta.iter().zip(a).map(|(e, a)| e * a).sum(),
                    energy,
                    enstrophy: model.potential_enstrophy(s)?,
                    energy_drift: 0.0,
                    enstrophy_drift: 0.0,
                    energy_rate: contract(&[
                        Term::weighted(&eh, &t.dh, a),
                        Term::weighted(&ez, &t.dzeta, a),
                        Term::weighted(&em, &t.dmu, a),
                    ]),
                    enstrophy_rate: contract(&[Term::weighted(&zh, &t.dh, a), Term::weighted(&zz, &t.dzeta, a)]),
                })
            }
            _ => Err(Error::InvalidParameter("state does not match the model scheme".into())),
        }
    }

    /// Fast gravity-wave Courant number `sqrt(g H) dt / min(de)`.
    pub fn courant(&self, physics: &Physics, dt: f64) -> f64 {
        let min_de = self.mesh.edge_de.iter().fold(f64::INFINITY, |m, &d| m.min(d));
        (physics.g * physics.depth).sqrt() * dt / min_de
    }

    /// Builds the initial state named in `spec`.
    pub fn initial_condition(&self, spec: &InitialSpec, physics: &Physics, run_seed: u64) -> Result<State> {
        let kind = InitialKind::parse(&spec.name)?;
        let depth = physics.depth;
        let amp = spec.amplitude.unwrap_or(1e-3 * depth);
        let mesh = &self.mesh;
        let n = mesh.n_cells();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(run_seed));
        if kind == InitialKind::SolidRotationSphere && !mesh.domain.is_sphere() {
            return Err(Error::InvalidParameter("solid_rotation_sphere needs a spherical mesh".into()));
        }
        let pattern = |x: &V3| wave_pattern(mesh, x, spec.wavenumber);
        let mut h = vec![depth; n];
        match kind {
            InitialKind::Rest | InitialKind::GeostrophicBalance => {}
            InitialKind::RandomPerturbation => {
                h.iter_mut().for_each(|x| *x += amp * rng.random_range(-1.0..1.0));
            }
            InitialKind::GravityWave => {
                for (x, c) in h.iter_mut().zip(&mesh.cell_centers) {
                    *x += amp * pattern(c);
                }
            }
            InitialKind::SolidRotationSphere => {
                let radius = sphere_radius(mesh);
                let omega = physics.omega.unwrap_or(0.0);
                let u0 = spec.velocity;
                for (x, c) in h.iter_mut().zip(&mesh.cell_centers) {
                    let s = mesh.latitude(c).sin();
                    *x -= (radius * omega * u0 + 0.5 * u0 * u0) * s * s / physics.g;
                }
            }
        }
        if let Some((i, &x)) = h.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Positivity {
                what: "initial depth",
                index: i,
                value: x,
            });
        }
        let mean_de = mesh.edge_de.iter().sum::<f64>() / mesh.n_edges() as f64;
        match &self.physics {
            SchemeData::C { w, .. } => {
                let mut state = rest_state(mesh, &self.hodge, depth);
                for i in 0..n {
                    if h[i] != depth {
                        state.m[i] = h[i] * mesh.cell_area[i];
                    }
                }
                match kind {
                    InitialKind::RandomPerturbation => {
                        for (e, u) in state.u.iter_mut().enumerate() {
                            *u = spec.velocity * mesh.edge_de[e] * rng.random_range(-1.0..1.0);
                        }
                    }
                    InitialKind::SolidRotationSphere => {
                        let radius = sphere_radius(mesh);
                        for (e, u) in state.u.iter_mut().enumerate() {
                            let p = mesh.edge_points[e];
                            let vel = V3::new(-p[1], p[0], 0.0) * (spec.velocity / radius);
                            *u = vel.dot(&mesh.edge_normals[e]) * mesh.edge_de[e];
                        }
                    }
                    InitialKind::GeostrophicBalance => {
                        let f = nonzero_f(physics)?;
                        let lin = CGridLinear {
                            mesh,
                            dec: &self.dec,
                            hodge: &self.hodge,
                            w,
                            g: physics.g,
                            depth,
                            f,
                        };
                        let psi: Vec<f64> = mesh
                            .vertex_positions
                            .iter()
                            .map(|x| amp * physics.g / f * pattern(x))
                            .collect();
                        let pert = lin.geostrophic_state(&psi)?;
                        state.m.iter_mut().zip(&pert.m).for_each(|(m, p)| *m += p);
                        state.u = pert.u;
                    }
                    _ => {}
                }
                Ok(State::C(state))
            }
            SchemeData::Z { .. } => {
                let ops = ZOperators::new(mesh, &self.dec, &self.hodge);
                let mut state = ZGridState {
                    h,
                    zeta: vec![0.0; n],
                    mu: vec![0.0; n],
                };
                match kind {
                    InitialKind::RandomPerturbation => {
                        let scale = spec.velocity / mean_de;
                        for i in 0..n {
                            state.zeta[i] = scale * rng.random_range(-1.0..1.0);
                            state.mu[i] = scale * rng.random_range(-1.0..1.0);
                        }
                        ops.remove_mean(&mut state.zeta);
                        ops.remove_mean(&mut state.mu);
                    }
                    InitialKind::SolidRotationSphere => {
                        let radius = sphere_radius(mesh);
                        for (z, c) in state.zeta.iter_mut().zip(&mesh.cell_centers) {
                            *z = 2.0 * spec.velocity / radius * mesh.latitude(c).sin();
                        }
                        ops.remove_mean(&mut state.zeta);
                    }
                    InitialKind::GeostrophicBalance => {
                        let f = nonzero_f(physics)?;
                        let lin = ZGridLinear {
                            ops,
                            g: physics.g,
                            depth,
                            f,
                        };
                        let s: Vec<f64> = mesh
                            .cell_centers
                            .iter()
                            .map(|x| amp * physics.g / f * pattern(x))
                            .collect();
                        let pert = lin.geostrophic_state(&s);
                        state.h.iter_mut().zip(&pert.h).for_each(|(h, p)| *h += p);
                        state.zeta = pert.zeta;
                    }
                    _ => {}
                }
                Ok(State::Z(state))
            }
        }
    }
}

fn nonzero_f(physics: &Physics) -> Result<f64> {
    let f = physics.constant_f()?;
    if f == 0.0 {
        return Err(Error::Config("geostrophic_balance needs a nonzero `f`".into()));
    }
    Ok(f)
}

fn sphere_radius(mesh: &Mesh) -> f64 {
    match mesh.domain {
        Domain::Sphere { radius } => radius,
        Domain::Periodic { .. } => 1.0,
    }
}

/// Smooth periodic pattern of unit amplitude. On the plane it is
/// `cos(2 pi (k_a s + k_b t))` in lattice coordinates `x = s a + t b`; on the
/// sphere a sectoral harmonic `cos(phi)^m cos(m lambda)` with `m = max(k_a, 1)`.
pub fn wave_pattern(mesh: &Mesh, x: &V3, k: [i32; 2]) -> f64 {
    match &mesh.domain {
        Domain::Periodic { period_a, period_b } => {
            let det = period_a[0] * period_b[1] - period_a[1] * period_b[0];
            let s = (x[0] * period_b[1] - x[1] * period_b[0]) / det;
            let t = (period_a[0] * x[1] - period_a[1] * x[0]) / det;
            (2.0 * PI * (k[0] as f64 * s + k[1] as f64 * t)).cos()
        }
        Domain::Sphere { .. } => {
            let m = k[0].max(1);
            let lat = mesh.latitude(x);
            let lon = x[1].atan2(x[0]);
            lat.cos().powi(m) * (m as f64 * lon).cos()
        }
    }
}

/// Builds the model a configuration describes. For the C-grid the alpha
/// coefficients are read from `cache` when it holds a solve for this mesh,
/// and solved and written otherwise.
pub fn build_model(cfg: &RunConfig, cache: Option<&Path>) -> Result<Model> {
    model_on_mesh(cfg, cfg.mesh.build(&cfg.base_dir)?, cache)
}

/// Scheme operators and, for the conserving C-grid, the alpha coefficients
/// on an already built mesh.
pub fn model_on_mesh(cfg: &RunConfig, mesh: Mesh, cache: Option<&Path>) -> Result<Model> {
    let physics = &cfg.physics;
    match cfg.scheme()? {
        Scheme::CGrid => {
            let params = CGridParams::new(&mesh, physics.g, |x| physics.coriolis(&mesh, x));
            let variant = cfg.q_variant()?;
            let alpha = if variant == QVariant::Conserving {
                let hodge = Hodge::new(&mesh)?;
                Some(load_or_solve_alpha(&mesh, &hodge, cfg.alpha_mode()?, cache)?)
            } else {
                None
            };
            Model::cgrid(mesh, params, alpha, variant)
        }
        Scheme::ZGrid => {
            let params = ZGridParams::new(&mesh, physics.g, |x| physics.coriolis(&mesh, x));
            Model::zgrid(mesh, params)
        }
    }
}

pub fn load_or_solve_alpha(mesh: &Mesh, hodge: &Hodge, mode: AlphaMode, cache: Option<&Path>) -> Result<AlphaCoefficients> {
    if let Some(path) = cache {
        if path.exists() {
            if let Ok(a) = AlphaCoefficients::read(path, mesh) {
                if a.mode == mode && a.mesh_label == mesh.label {
                    a.check_residuals(ALPHA_RESIDUAL_TOLERANCE)?;
                    return Ok(a);
                }
            }
        }
    }
    let alpha = match mode {
        AlphaMode::Decoupled => solve_alpha(mesh, hodge)?,
        AlphaMode::Coupled => solve_alpha_coupled(mesh, hodge)?,
    };
    if let Some(path) = cache {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        alpha.write(path)?;
    }
    Ok(alpha)
}

pub fn write_state(path: &Path, mesh: &Mesh, state: &State, step: usize, time: f64) -> Result<()> {
    let mut w = TableWriter::new("swcons-state", 1);
    w.header("scheme", state.scheme().name());
    w.header("mesh", &mesh.label);
    w.header("step", &step.to_string());
    w.header("time", &crate::textio::real(time));
    match state {
        State::C(s) => {
            w.reals("m", &s.m);
            w.reals("u", &s.u);
        }
        State::Z(s) => {
            w.reals("h", &s.h);
            w.reals("zeta", &s.zeta);
            w.reals("mu", &s.mu);
        }
    }
    w.save(path)
}

/// Reads a snapshot, returning the state, step and time.
pub fn read_state(path: &Path, mesh: &Mesh) -> Result<(State, usize, f64)> {
    let r = TableReader::open(path, "swcons-state")?;
    let scheme = Scheme::parse(r.header("scheme")?.first().map(String::as_str).unwrap_or(""))?;
    let step: usize = r.parse_token(0, r.header("step")?.first().map(String::as_str).unwrap_or(""))?;
    let time: f64 = r.parse_token(0, r.header("time")?.first().map(String::as_str).unwrap_or(""))?;
    let sized = |name: &str, n: usize| -> Result<Vec<f64>> {
        let v = r.reals(name)?;
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
        Ok(v)
    };
    let state = match scheme {
        Scheme::CGrid => State::C(CGridState {
            m: sized("m", mesh.n_cells())?,
            u: sized("u", mesh.n_edges())?,
        }),
        Scheme::ZGrid => State::Z(ZGridState {
            h: sized("h", mesh.n_cells())?,
            zeta: sized("zeta", mesh.n_cells())?,
            mu: sized("mu", mesh.n_cells())?,
        }),
    };
    Ok((state, step, time))
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: State,
    pub series: Series,
    pub courant: f64,
    /// Contraction tolerance violations, one message each.
    pub violations: Vec<String>,
}

/// Optional overrides applied on top of the configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub q_variant: Option<QVariant>,
    /// Write `diag.csv`, snapshots and the alpha cache.
    pub write_files: bool,
}

/// Builds the model and advances the initial condition for the configured
/// number of steps.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if let Some(v) = opts.q_variant {
        cfg.run.q_variant = v.name().into();
    }
    let out_dir = cfg.output_dir();
    if opts.write_files {
        std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    }
    let cache = cfg.alpha_cache();
    let model = build_model(&cfg, opts.write_files.then_some(cache.as_path()))?;
    let state = model.initial_condition(&cfg.initial, &cfg.physics, cfg.run.seed)?;
    run_model(&model, &cfg, state, opts.write_files.then_some(out_dir.as_path()))
}

/// Time loop on an already built model.
pub fn run_model(model: &Model, cfg: &RunConfig, mut state: State, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let dt = cfg.run.dt;
    let steps = cfg.run.steps;
    let mut series = Series::default();
    let mut csv = match out_dir {
        Some(d) => Some(CsvWriter::create(&d.join("diag.csv"))?),
        None => None,
    };
    let snapshot = |state: &State, step: usize| -> Result<()> {
        if let Some(d) = out_dir {
            write_state(&d.join(format!("{step}.state")), &model.mesh, state, step, step as f64 * dt)?;
        }
        Ok(())
    };
    for step in 0..=steps {
        if step % cfg.run.output_interval == 0 || step == steps {
            series.push(model.record(&state, step, step as f64 * dt)?);
            if let Some(w) = csv.as_mut() {
                w.append(&series)?;
            }
        }
        let snap = cfg.run.snapshot_interval;
        if step == steps || (snap > 0 && step % snap == 0) {
            snapshot(&state, step)?;
        }
        if step < steps {
            state = model.step(&state, dt)?;
        }
    }
    if let Some(w) = csv {
        w.finish()?;
    }
    let (tol_e, tol_z) = cfg.tolerances.resolve(model.scheme());
    let mut violations = Vec::new();
    if series.max_energy_rate() > tol_e {
        violations.push(format!(
            "energy contraction {:.3e} exceeds {tol_e:.1e}",
            series.max_energy_rate()
        ));
    }
    if series.max_enstrophy_rate() > tol_z {
        violations.push(format!(
            "enstrophy contraction {:.3e} exceeds {tol_z:.1e}",
            series.max_enstrophy_rate()
        ));
    }
    Ok(RunOutcome {
        state,
        series,
        courant: model.courant(&cfg.physics, dt),
        violations,
    })
}
