use proptest::prelude::*;
use swcons::dec::{Dec, Field, FormKind};
use swcons::hodge::Hodge;
use swcons::mesh::{build_hex_mesh, build_icosahedral_mesh, build_square_mesh, build_voronoi_mesh, Mesh};

fn meshes() -> Vec<Mesh> {
    vec![
        build_square_mesh(4, 4, 1.0, 1.0).unwrap(),
        build_hex_mesh(4, 1.0).unwrap(),
        build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap(),
        build_icosahedral_mesh(1, 1.0).unwrap(),
    ]
}

#[test]
fn constants_have_zero_gradient() {
    for m in meshes() {
        let dec = Dec::new(&m);
        let v = dec.d1(&Field::constant(&m, FormKind::PRIMAL_0, 2.5)).unwrap();
        assert!(v.values().iter().all(|x| *x == 0.0));
        let c = dec.d1bar(&Field::constant(&m, FormKind::DUAL_0, -1.5)).unwrap();
        assert!(c.values().iter().all(|x| *x == 0.0));
    }
}

#[test]
fn vertex_indicator_on_square() {
    let m = build_square_mesh(4, 4, 1.0, 1.0).unwrap();
    let dec = Dec::new(&m);
    let mut f = Field::zeros(&m, FormKind::PRIMAL_0);
    f.values_mut()[5] = 1.0;
    let g = dec.d1(&f).unwrap();
    let nonzero: Vec<f64> = g.values().iter().copied().filter(|x| *x != 0.0).collect();
    assert_eq!(nonzero.len(), 4);
    assert!(nonzero.iter().all(|x| x.abs() == 1.0));
    for (e, x) in g.values().iter().enumerate() {
        if *x != 0.0 {
            assert!(m.edge_vertices[e].contains(&5));
        }
    }
}

#[test]
fn cell_indicator_gives_boundary_signs() {
    let m = build_hex_mesh(4, 1.0).unwrap();
    let dec = Dec::new(&m);
    let i = 7;
    let mut f = Field::zeros(&m, FormKind::DUAL_0);
    f.values_mut()[i] = 1.0;
    let g = dec.d1bar(&f).unwrap();
    for (e, x) in g.values().iter().enumerate() {
        if m.cell_edges[i].contains(&e) {
            assert_eq!(*x, -(m.n(e, i) as f64));
        } else {
            assert_eq!(*x, 0.0);
        }
    }

    let mut f = Field::zeros(&m, FormKind::PRIMAL_1);
    f.values_mut()[4] = 1.0;
    let d = dec.d2(&f).unwrap();
    let [a, b] = m.edge_cells[4];
    assert_eq!(d.values()[a], m.n(4, a) as f64);
    assert_eq!(d.values()[b], m.n(4, b) as f64);
    assert_eq!(d.values()[a] + d.values()[b], 0.0);
    assert_eq!(d.values().iter().filter(|x| **x != 0.0).count(), 2);
}

#[test]
fn integer_matrix_identities() {
    for m in meshes() {
        let dec = Dec::new(&m);
        assert_eq!(dec.d2.matmul(&dec.d1).max_abs(), 0);
        assert_eq!(dec.d2bar.matmul(&dec.d1bar).max_abs(), 0);
        assert_eq!(dec.d2.transpose(), dec.d1bar.neg());
        assert_eq!(dec.d2bar.transpose(), dec.d1);
    }
}

#[test]
fn form_kinds_are_checked() {
    let m = build_square_mesh(4, 4, 1.0, 1.0).unwrap();
    let dec = Dec::new(&m);
    let cells = Field::zeros(&m, FormKind::DUAL_0);
    assert!(dec.d1(&cells).is_err());
    assert!(dec.d2(&cells).is_err());
    assert!(Field::new(&m, FormKind::PRIMAL_1, vec![0.0; 3]).is_err());
}

#[test]
fn solid_rotation_has_uniform_vorticity() {
    // u = omega (-y, x) is not periodic, so only vertices whose dual cell does
    // not straddle the domain boundary are compared.
    let m = build_square_mesh(8, 8, 1.0, 1.0).unwrap();
    let dec = Dec::new(&m);
    let omega = 0.7;
    let u: Vec<f64> = (0..m.n_edges())
        .map(|e| {
            let [c0, c1] = m.edge_cells[e];
            let (a, b) = (m.cell_centers[c0], m.cell_centers[c1]);
            let mid = (a + b) * 0.5;
            omega * (-mid[1] * (b[0] - a[0]) + mid[0] * (b[1] - a[1]))
        })
        .collect();
    let zeta = dec.d2bar.apply(&u);
    let expected = 2.0 * omega * m.vertex_area[0];
    let interior: Vec<usize> = (0..m.n_vertices())
        .filter(|&v| {
            let p = m.vertex_positions[v];
            (0..2).all(|k| p[k] > 0.1 && p[k] < 0.9)
        })
        .collect();
    assert_eq!(interior.len(), 49);
    let sign = zeta[interior[0]].signum();
    for v in interior {
        assert!((sign * zeta[v] - expected).abs() < 1e-14, "{} vs {expected}", zeta[v]);
    }
}

#[test]
fn hodge_diagonals_are_positive() {
    let m = build_icosahedral_mesh(2, 1.0).unwrap();
    let h = Hodge::new(&m).unwrap();
    assert!(h.star.iter().all(|x| *x > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exactness_holds_for_random_fields(seed in 0u64..1000, scale in 1e-3f64..1e3) {
        use rand::{Rng, SeedableRng};
        let m = build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap();
        let dec = Dec::new(&m);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..m.n_vertices()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..m.n_cells()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        // Exact in integers; in floating point only the rounding of each
        // difference remains.
        let tol = 16.0 * f64::EPSILON * scale;
        let curl_grad = dec.d2.apply(&dec.d1.apply(&g));
        let div_grad = dec.d2bar.apply(&dec.d1bar.apply(&c));
        prop_assert!(curl_grad.iter().all(|x| x.abs() <= tol));
        prop_assert!(div_grad.iter().all(|x| x.abs() <= tol));
    }

    #[test]
    fn operators_are_linear(a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let m = build_hex_mesh(4, 1.0).unwrap();
        let dec = Dec::new(&m);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..m.n_edges()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..m.n_edges()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        for op in [&dec.d2, &dec.d2bar] {
            let lhs = op.apply(&mix);
            let (fa, ga) = (op.apply(&f), op.apply(&g));
            for k in 0..lhs.len() {
                let rhs = a * fa[k] + b * ga[k];
                prop_assert!((lhs[k] - rhs).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
            }
        }
    }
}
