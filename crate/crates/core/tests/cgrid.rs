use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swcons::cgrid::{rest_state, CGrid, CGridLinear, CGridParams, CGridState};
use swcons::conserve::{contract, Term};
use swcons::dec::Dec;
use swcons::hodge::{Hodge, WOperator};
use swcons::mesh::{build_hex_mesh, build_square_mesh, build_voronoi_mesh, Mesh};
use swcons::qflux::{solve_alpha, QOperator};

const G: f64 = 9.80616;

struct Ops {
    mesh: Mesh,
    dec: Dec,
    hodge: Hodge,
    w: WOperator,
}

impl Ops {
    fn new(mesh: Mesh) -> Self {
        let dec = Dec::new(&mesh);
        let hodge = Hodge::new(&mesh).unwrap();
        let w = WOperator::build(&mesh, &dec, &hodge).unwrap();
        Ops { mesh, dec, hodge, w }
    }
}

fn random_state(m: &Mesh, rng: &mut ChaCha8Rng) -> CGridState {
    CGridState {
        m: m.cell_area.iter().map(|a| a * (1.0 + 0.1 * rng.random_range(-1.0..1.0))).collect(),
        u: (0..m.n_edges()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

fn with_topography(m: &Mesh, rng: &mut ChaCha8Rng) -> CGridParams {
    let mut p = CGridParams::new(m, G, |_| 1.0);
    p.b = m.cell_area.iter().map(|a| 0.2 * a * rng.random_range(0.0..1.0)).collect();
    p
}

#[test]
fn hamiltonian_matches_direct_summation() {
    let ops = Ops::new(build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap());
    let m = &ops.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = with_topography(m, &mut rng);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let s = random_state(m, &mut rng);

    let depth: Vec<f64> = (0..m.n_cells()).map(|i| s.m[i] / m.cell_area[i]).collect();
    let mut expected = 0.0;
    for i in 0..m.n_cells() {
        let (h, b) = (depth[i], params.b[i] / m.cell_area[i]);
        expected += m.cell_area[i] * G * (0.5 * h * h + h * b);
    }
    for e in 0..m.n_edges() {
        let m_e: f64 = m.edge_cells[e]
            .iter()
            .map(|&i| m.cell_edge_area_of(i, e) / m.edge_area(e) * depth[i])
            .sum();
        expected += 0.5 * m.edge_le[e] / m.edge_de[e] * m_e * s.u[e] * s.u[e];
    }
    let got = model.hamiltonian(&s).unwrap();
    assert!((got - expected).abs() < 1e-13 * expected);

    let d = model.diagnostics(&s).unwrap();
    assert!(d.k.iter().all(|k| *k >= 0.0));
    let kinetic: f64 = d.k.iter().zip(&d.h).map(|(k, h)| k * h).sum();
    let half_cu: f64 = (0..m.n_edges()).map(|e| 0.5 * s.u[e] * ops.hodge.star[e] * d.c[e]).sum();
    assert!((kinetic - half_cu).abs() < 1e-13 * half_cu);
}

#[test]
fn hamiltonian_of_rest_and_of_nothing() {
    let ops = Ops::new(build_hex_mesh(4, 1.0).unwrap());
    let m = &ops.mesh;
    let params = CGridParams::new(m, G, |_| 1.0);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let depth = 3.0;
    let rest = rest_state(m, &ops.hodge, depth);
    let expected = 0.5 * G * depth * depth * m.total_area();
    assert!((model.hamiltonian(&rest).unwrap() - expected).abs() < 1e-13 * expected);
    let zero = CGridState {
        m: vec![0.0; m.n_cells()],
        u: vec![0.0; m.n_edges()],
    };
    assert_eq!(model.hamiltonian(&zero).unwrap(), 0.0);
    assert!(model.potential_enstrophy(&zero).is_err());
}

#[test]
fn derivatives_match_central_differences() {
    let ops = Ops::new(build_square_mesh(4, 4, 1.0, 1.0).unwrap());
    let m = &ops.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = with_topography(m, &mut rng);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let s = random_state(m, &mut rng);
    let (phi, flux) = model.functional_derivatives(&s).unwrap();
    let diff = |s2: &CGridState, s3: &CGridState, eps: f64| {
        (model.hamiltonian(s2).unwrap() - model.hamiltonian(s3).unwrap()) / (2.0 * eps)
    };
    let eps = 1e-6;
    for i in 0..m.n_cells() {
        let (mut a, mut b) = (s.clone(), s.clone());
        let step = eps * m.cell_area[i];
        a.m[i] += step;
        b.m[i] -= step;
        let fd = diff(&a, &b, step);
        assert!((fd - phi[i]).abs() < 1e-6 * phi[i].abs().max(1.0), "cell {i}: {fd} vs {}", phi[i]);
    }
    for e in 0..m.n_edges() {
        let (mut a, mut b) = (s.clone(), s.clone());
        a.u[e] += eps;
        b.u[e] -= eps;
        let fd = diff(&a, &b, eps);
        assert!((fd - flux[e]).abs() < 1e-6 * flux[e].abs().max(1.0), "edge {e}");
    }
}

#[test]
fn rest_is_steady_and_mass_is_conserved() {
    let ops = Ops::new(build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap());
    let m = &ops.mesh;
    let params = CGridParams::new(m, G, |_| 1.0);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let alpha = solve_alpha(m, &ops.hodge).unwrap();
    let q_op = QOperator::Conserving(&alpha);

    let rest = rest_state(m, &ops.hodge, 1.0);
    let d = model.diagnostics(&rest).unwrap();
    assert!(d.flux.iter().all(|x| *x == 0.0));
    let t = model.tendency(&rest, &q_op).unwrap();
    assert!(t.dm.iter().chain(&t.du).all(|x| *x == 0.0));

    let s = random_state(m, &mut ChaCha8Rng::seed_from_u64(3));
    let t = model.tendency(&s, &q_op).unwrap();
    let total: f64 = t.dm.iter().sum();
    let scale: f64 = t.dm.iter().map(|x| x.abs()).sum();
    assert!(total.abs() < 1e-14 * scale);
}

#[test]
fn nonlinear_contractions_vanish() {
    let ops = Ops::new(build_hex_mesh(4, 1.0).unwrap());
    let m = &ops.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = with_topography(m, &mut rng);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let alpha = solve_alpha(m, &ops.hodge).unwrap();
    let q_op = QOperator::Conserving(&alpha);
    for _ in 0..5 {
        let s = random_state(m, &mut rng);
        let d = model.diagnostics(&s).unwrap();
        let t = model.tendency_from(&d, &q_op);
        let energy = contract(&[Term::new(&d.phi, &t.dm), Term::new(&d.flux, &t.du)]);
        assert!(energy.relative() < 1e-12);
        let (zm, zu) = model.enstrophy_derivatives(&d);
        let enstrophy = contract(&[Term::new(&zm, &t.dm), Term::new(&zu, &t.du)]);
        assert!(enstrophy.relative() < 1e-10);
    }
}

#[test]
fn zero_absolute_vorticity_has_zero_enstrophy() {
    let ops = Ops::new(build_hex_mesh(4, 1.0).unwrap());
    let m = &ops.mesh;
    let params = CGridParams::new(m, G, |_| 0.0);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let s = rest_state(m, &ops.hodge, 2.0);
    assert_eq!(model.potential_enstrophy(&s).unwrap(), 0.0);
}

fn linear(ops: &Ops, f: f64) -> CGridLinear<'_> {
    CGridLinear {
        mesh: &ops.mesh,
        dec: &ops.dec,
        hodge: &ops.hodge,
        w: &ops.w,
        g: G,
        depth: 1.0,
        f,
    }
}

#[test]
fn gravity_waves_have_the_discrete_dispersion_relation() {
    let n = 16;
    let ops = Ops::new(build_square_mesh(n, n, 1.0, 1.0).unwrap());
    let m = &ops.mesh;
    let lin = linear(&ops, 0.0);
    let k = 2.0 * PI;
    let dx = 1.0 / n as f64;
    let s = CGridState {
        m: (0..m.n_cells())
            .map(|i| m.cell_area[i] * (k * m.cell_centers[i][0]).cos())
            .collect(),
        u: vec![0.0; m.n_edges()],
    };
    // Two tendency evaluations give d2m/dt2 = -omega^2 m for an eigenmode.
    let du = lin.tendency(&s).du;
    let ddm = lin.tendency(&CGridState { m: vec![0.0; m.n_cells()], u: du }).dm;
    let discrete = G * (2.0 / dx * (k * dx / 2.0).sin()).powi(2);
    let continuous = G * k * k;
    for i in 0..m.n_cells() {
        if s.m[i].abs() > 0.1 * m.cell_area[i] {
            let omega2 = -ddm[i] / s.m[i];
            assert!((omega2 - discrete).abs() < 1e-10 * discrete);
            assert!((omega2 - continuous).abs() < 0.02 * continuous);
        }
    }
}

#[test]
fn linear_energy_contraction_vanishes() {
    let ops = Ops::new(build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap());
    let lin = linear(&ops, 1.3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let s = random_state(&ops.mesh, &mut rng);
        let t = lin.tendency(&s);
        let (em, eu) = lin.energy_derivatives(&s);
        let c = contract(&[Term::new(&em, &t.dm), Term::new(&eu, &t.du)]);
        assert!(c.relative() < 1e-12);
    }
}

#[test]
fn length_mismatches_are_errors() {
    let ops = Ops::new(build_hex_mesh(4, 1.0).unwrap());
    let m = &ops.mesh;
    let mut params = CGridParams::new(m, G, |_| 1.0);
    let model = CGrid::new(m, &ops.dec, &ops.hodge, &params).unwrap();
    let bad = CGridState {
        m: vec![1.0; 3],
        u: vec![0.0; m.n_edges()],
    };
    assert!(model.hamiltonian(&bad).is_err());
    params.b.pop();
    assert!(CGrid::new(m, &ops.dec, &ops.hodge, &params).is_err());
}
