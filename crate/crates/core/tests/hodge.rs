use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swcons::dec::Dec;
use swcons::hodge::{Hodge, WOperator};
use swcons::mesh::{build_hex_mesh, build_icosahedral_mesh, build_square_mesh, build_voronoi_mesh, Mesh};

fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn meshes() -> Vec<Mesh> {
    vec![
        build_square_mesh(4, 4, 1.0, 1.0).unwrap(),
        build_hex_mesh(4, 1.0).unwrap(),
        build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap(),
        build_icosahedral_mesh(1, 1.0).unwrap(),
    ]
}

#[test]
fn i_and_j_undo_area_integration() {
    for m in meshes() {
        let h = Hodge::new(&m).unwrap();
        assert!(h.i(&m.cell_area).iter().all(|x| (x - 1.0).abs() < 1e-15));
        assert!(h.j(&m.vertex_area).iter().all(|x| (x - 1.0).abs() < 1e-14));
    }
    let m = build_square_mesh(4, 4, 1.0, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    assert!(h.i(&vec![1.0; 16]).iter().all(|x| (x - 16.0).abs() < 1e-13));
}

#[test]
fn star_is_edge_length_over_centre_distance() {
    let m = build_square_mesh(4, 4, 1.0, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    let f: Vec<f64> = (0..m.n_edges()).map(|e| e as f64).collect();
    let hf = h.h(&f);
    assert!(hf.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-14));

    let m = build_hex_mesh(4, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    let expected = 1.0 / 3f64.sqrt();
    assert!(h.star.iter().all(|s| (s - expected).abs() < 1e-14));

    let m = build_icosahedral_mesh(2, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    assert!(h.star.iter().all(|s| *s > 0.0));
    let f = random(m.n_edges(), &mut ChaCha8Rng::seed_from_u64(1));
    let back = h.h_inv(&h.h(&f));
    assert!(back.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-15));
}

#[test]
fn r_maps_cell_areas_to_dual_areas() {
    for m in meshes() {
        let h = Hodge::new(&m).unwrap();
        let rv = h.r(&m.cell_area);
        for (a, b) in rv.iter().zip(&m.vertex_area) {
            assert!((a - b).abs() <= 1e-13 * b);
        }
        let f = random(m.n_cells(), &mut ChaCha8Rng::seed_from_u64(2));
        let total: f64 = f.iter().sum();
        let mapped: f64 = h.r(&f).iter().sum();
        assert!((total - mapped).abs() < 1e-13 * f.len() as f64);
    }
}

#[test]
fn phi_averages_and_its_transpose_is_consistent() {
    for m in meshes() {
        let h = Hodge::new(&m).unwrap();
        let c = h.phi(&m, &vec![3.5; m.n_cells()]);
        assert!(c.iter().all(|x| (x - 3.5).abs() < 1e-14));

        let i = 3;
        let mut ind = vec![0.0; m.n_cells()];
        ind[i] = 1.0;
        let p = h.phi(&m, &ind);
        for &e in &m.cell_edges[i] {
            let expected = m.cell_edge_area_of(i, e) / m.edge_area(e);
            assert!((p[e] - expected).abs() < 1e-14);
        }

        // The transpose of ones collects A_ie / A_e over each cell's edges.
        let t = h.phi_transpose(&m, &vec![1.0; m.n_edges()]);
        for i in 0..m.n_cells() {
            let s: f64 = m.cell_edges[i]
                .iter()
                .map(|&e| m.cell_edge_area_of(i, e) / m.edge_area(e))
                .sum();
            assert!((t[i] - s).abs() < 1e-14);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = (random(m.n_cells(), &mut rng), random(m.n_edges(), &mut rng));
        let lhs: f64 = h.phi(&m, &x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = h.phi_transpose(&m, &y).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-13);
    }
}

#[test]
fn w_structure_on_squares() {
    let m = build_square_mesh(4, 4, 1.0, 1.0).unwrap();
    let dec = Dec::new(&m);
    let h = Hodge::new(&m).unwrap();
    let w = WOperator::build(&m, &dec, &h).unwrap();
    for e in 0..m.n_edges() {
        assert_eq!(w.row_len(e), 6);
        assert_eq!(w.weight(e, e), 0.0);
    }
    for (&(a, b), x) in &w.pairs {
        assert_eq!(w.weight(b, a), -x);
    }
}

fn w_residual(dec: &Dec, h: &Hodge, w: &WOperator, f: &[f64]) -> f64 {
    // D2bar W F = -R D2 F, relative to the size of the right side.
    let lhs = dec.d2bar.apply(&w.apply(f));
    let rhs = h.r(&dec.d2.apply(f));
    let scale = rhs.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    lhs.iter().zip(&rhs).fold(0.0f64, |s, (a, b)| s.max((a + b).abs())) / scale
}

#[test]
fn w_constraint_holds_for_random_fluxes() {
    let m = build_icosahedral_mesh(1, 1.0).unwrap();
    let dec = Dec::new(&m);
    let h = Hodge::new(&m).unwrap();
    let w = WOperator::build(&m, &dec, &h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let f = random(m.n_edges(), &mut rng);
        assert!(w_residual(&dec, &h, &w, &f) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn w_is_antisymmetric_in_energy(seed in 0u64..10_000, which in 0usize..4) {
        let m = meshes().swap_remove(which);
        let dec = Dec::new(&m);
        let h = Hodge::new(&m).unwrap();
        let w = WOperator::build(&m, &dec, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g) = (random(m.n_edges(), &mut rng), random(m.n_edges(), &mut rng));
        let a: f64 = w.apply(&f).iter().zip(&g).map(|(x, y)| x * y).sum();
        let b: f64 = w.apply(&g).iter().zip(&f).map(|(x, y)| x * y).sum();
        prop_assert!((a + b).abs() < 1e-13);
        prop_assert!(w_residual(&dec, &h, &w, &f) < 1e-12);
    }

    #[test]
    fn r_and_phi_rows_are_partitions(seed in 0u64..10_000, c in -100.0f64..100.0) {
        let m = build_voronoi_mesh(20, 1.0, 1.0, seed).unwrap();
        let h = Hodge::new(&m).unwrap();
        let ones = vec![c; m.n_cells()];
        let tol = 1e-13 * c.abs().max(1.0);
        prop_assert!(h.phi(&m, &ones).iter().all(|x| (x - c).abs() < tol));
        // Each cell distributes A_iv / A_i over its vertices, which sums to one.
        let total: f64 = h.r(&ones).iter().sum();
        prop_assert!((total - c * m.n_cells() as f64).abs() < tol * m.n_cells() as f64);
    }
}
