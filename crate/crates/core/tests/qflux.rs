use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swcons::dec::Dec;
use swcons::hodge::{Hodge, WOperator};
use swcons::mesh::{build_hex_mesh, build_icosahedral_mesh, build_square_mesh, build_voronoi_mesh, Mesh};
use swcons::qflux::{
    adjoint_defect, assemble_cell_system, enstrophy_condition_residual, solve_alpha, AlphaCoefficients, QOperator,
    QVariant,
};

struct Setup {
    mesh: Mesh,
    dec: Dec,
    hodge: Hodge,
    w: WOperator,
    alpha: AlphaCoefficients,
}

fn setup(mesh: Mesh) -> Setup {
    let dec = Dec::new(&mesh);
    let hodge = Hodge::new(&mesh).unwrap();
    let w = WOperator::build(&mesh, &dec, &hodge).unwrap();
    let alpha = solve_alpha(&mesh, &hodge).unwrap();
    Setup {
        mesh,
        dec,
        hodge,
        w,
        alpha,
    }
}

fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn system_sizes_follow_cell_degree() {
    let m = build_icosahedral_mesh(1, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    let pentagon = (0..m.n_cells()).find(|&i| m.cell_edges[i].len() == 5).unwrap();
    let sys = assemble_cell_system(&m, &h, pentagon);
    assert_eq!((sys.n_equations(), sys.n_unknowns()), (75, 50));
    let hexagon = (0..m.n_cells()).find(|&i| m.cell_edges[i].len() == 6).unwrap();
    let sys = assemble_cell_system(&m, &h, hexagon);
    assert_eq!((sys.n_equations(), sys.n_unknowns()), (126, 90));
}

/// Index of the point in `pts` at `p + shift`, modulo the unit square.
fn shifted(pts: &[swcons::mesh::V3], p: &swcons::mesh::V3, shift: [f64; 2]) -> usize {
    pts.iter()
        .position(|x| {
            (0..2).all(|k| {
                let d = x[k] - p[k] - shift[k];
                (d - d.round()).abs() < 1e-9
            })
        })
        .unwrap()
}

#[test]
fn coefficients_commute_with_translation() {
    let s = setup(build_square_mesh(4, 4, 1.0, 1.0).unwrap());
    let m = &s.mesh;
    let q_op = QOperator::Conserving(&s.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = random(m.n_vertices(), &mut rng);
    let f = random(m.n_edges(), &mut rng);
    let qf = q_op.apply(&q, &f);
    for shift in [[0.25, 0.0], [0.0, 0.25], [0.5, 0.75]] {
        let cell: Vec<usize> = m.cell_centers.iter().map(|p| shifted(&m.cell_centers, p, shift)).collect();
        let mut q2 = vec![0.0; m.n_vertices()];
        for v in 0..m.n_vertices() {
            q2[shifted(&m.vertex_positions, &m.vertex_positions[v], shift)] = q[v];
        }
        // Edges are oriented from their lower to their higher cell index, so
        // a translated edge may flip.
        let mut image = vec![(0, 0.0); m.n_edges()];
        let mut f2 = vec![0.0; m.n_edges()];
        for e in 0..m.n_edges() {
            let e2 = shifted(&m.edge_points, &m.edge_points[e], shift);
            let sign = if cell[m.edge_cells[e][0]] == m.edge_cells[e2][0] { 1.0 } else { -1.0 };
            image[e] = (e2, sign);
            f2[e2] = sign * f[e];
        }
        let qf2 = q_op.apply(&q2, &f2);
        for e in 0..m.n_edges() {
            let (e2, sign) = image[e];
            assert!((qf2[e2] - sign * qf[e]).abs() < 1e-14);
        }
    }
}

#[test]
fn residuals_are_small_on_pentagons() {
    let s = setup(build_icosahedral_mesh(2, 1.0).unwrap());
    assert!(s.alpha.max_residual() < 1e-12);
    let q_op = QOperator::Conserving(&s.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let q = random(s.mesh.n_vertices(), &mut rng);
        assert!(enstrophy_condition_residual(&s.dec, &s.hodge, &q_op, &q) < 1e-12);
    }
}

#[test]
fn zero_flux_and_unit_vorticity() {
    for m in [build_hex_mesh(4, 1.0).unwrap(), build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap()] {
        let s = setup(m);
        let q_op = QOperator::Conserving(&s.alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = random(s.mesh.n_vertices(), &mut rng);
        assert!(q_op.apply(&q, &vec![0.0; s.mesh.n_edges()]).iter().all(|x| *x == 0.0));

        let f = random(s.mesh.n_edges(), &mut rng);
        let ones = vec![1.0; s.mesh.n_vertices()];
        assert!(max_diff(&q_op.apply(&ones, &f), &s.w.apply(&f)) < 1e-13);
    }
}

#[test]
fn every_variant_reduces_to_w_for_uniform_vorticity() {
    let s = setup(build_icosahedral_mesh(1, 1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random(s.mesh.n_edges(), &mut rng);
    let c = 1.7;
    let q = vec![c; s.mesh.n_vertices()];
    let cw: Vec<f64> = s.w.apply(&f).iter().map(|x| c * x).collect();
    let ops = [
        QOperator::Conserving(&s.alpha),
        QOperator::Variant(QVariant::EnergyOnly, &s.mesh, &s.w),
        QOperator::Variant(QVariant::EnstrophyOnly, &s.mesh, &s.w),
    ];
    for op in &ops {
        assert!(max_diff(&op.apply(&q, &f), &cw) < 1e-13, "{:?}", op.variant());
    }
}

#[test]
fn variants_keep_only_their_own_property() {
    let s = setup(build_hex_mesh(4, 1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q = random(s.mesh.n_vertices(), &mut rng);
    let (f, g) = (random(s.mesh.n_edges(), &mut rng), random(s.mesh.n_edges(), &mut rng));
    let energy = QOperator::Variant(QVariant::EnergyOnly, &s.mesh, &s.w);
    let enstrophy = QOperator::Variant(QVariant::EnstrophyOnly, &s.mesh, &s.w);
    assert!(adjoint_defect(&energy, &q, &f, &g) < 1e-14);
    assert!(adjoint_defect(&enstrophy, &q, &f, &g) > 1e-3);
    assert!(enstrophy_condition_residual(&s.dec, &s.hodge, &energy, &q) > 1e-3);
    assert!(QVariant::parse("energy_only").unwrap() == QVariant::EnergyOnly);
    assert!(QVariant::parse("both").is_err());
}

#[test]
fn coefficient_file_round_trip() {
    let s = setup(build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.txt");
    s.alpha.write(&path).unwrap();
    let back = AlphaCoefficients::read(&path, &s.mesh).unwrap();
    assert_eq!(back.cells.len(), s.alpha.cells.len());
    for (a, b) in back.cells.iter().zip(&s.alpha.cells) {
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(a.values, b.values);
    }
    let other = build_voronoi_mesh(20, 1.0, 1.0, 7).unwrap();
    assert!(AlphaCoefficients::read(&path, &other).is_err());
}
