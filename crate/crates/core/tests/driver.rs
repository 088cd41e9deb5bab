use std::path::Path;

use swcons::cgrid::{rest_state, CGridLinear, CGridState};
use swcons::driver::{build_model, read_state, rk4_step, run_model, write_state, RunConfig, State};
use swcons::hodge::WOperator;
use swcons::zgrid::{ZGridLinear, ZGridState, ZOperators};

fn config(scheme: &str, mesh: &str, initial: &str, steps: usize) -> RunConfig {
    let text = format!(
        "[run]\nscheme = \"{scheme}\"\ndt = 0.01\nsteps = {steps}\nseed = 11\n\n[mesh]\n{mesh}\n\n\
         [physics]\ng = 9.80616\ndepth = 1.0\nf = 1.0\n\n[initial]\n{initial}\n"
    );
    RunConfig::from_toml(&text, Path::new(".")).unwrap()
}

const RANDOM: &str = "name = \"random_perturbation\"\namplitude = 0.02\nvelocity = 0.1";

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn zgrid_energy_drift_at_quarter_courant() {
    // The drift is RK4 damping of the gravity waves: the semi-discrete rate
    // stays at roundoff and halving dt cuts the drift by more than 2^4.
    let mut cfg = config("zgrid", "kind = \"icosahedral\"\nlevel = 1", "name = \"random_perturbation\"", 200);
    let model = build_model(&cfg, None).unwrap();
    let dt = 0.25 / model.courant(&cfg.physics, 1.0);
    let mut drift = Vec::new();
    for (k, steps) in [(1.0, 200), (2.0, 400)] {
        cfg.run.dt = dt / k;
        cfg.run.steps = steps;
        let state = model.initial_condition(&cfg.initial, &cfg.physics, cfg.run.seed).unwrap();
        let out = run_model(&model, &cfg, state, None).unwrap();
        assert_eq!(out.series.records.len(), steps + 1);
        assert!(out.series.max_energy_rate() < 1e-14);
        let mass: Vec<f64> = out.series.records.iter().map(|r| r.mass).collect();
        assert!(mass.iter().all(|m| ((m - mass[0]) / mass[0]).abs() < 1e-13));
        drift.push(out.series.max_abs_energy_drift());
    }
    assert!((model.courant(&cfg.physics, dt) - 0.25).abs() < 1e-12);
    assert!(drift[0] < 2.5e-8, "{:e}", drift[0]);
    assert!(drift[0] / drift[1] > 16.0, "{drift:?}");
}

#[test]
fn random_initial_conditions_follow_the_seed() {
    for scheme in ["cgrid", "zgrid"] {
        let cfg = config(scheme, "kind = \"hex\"\nn = 4", RANDOM, 0);
        let model = build_model(&cfg, None).unwrap();
        let a = model.initial_condition(&cfg.initial, &cfg.physics, 5).unwrap();
        let b = model.initial_condition(&cfg.initial, &cfg.physics, 5).unwrap();
        let c = model.initial_condition(&cfg.initial, &cfg.physics, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

#[test]
fn geostrophic_initial_states_are_linearly_steady() {
    let mesh = "kind = \"square\"\nnx = 16\nny = 16";
    let initial = "name = \"geostrophic_balance\"\namplitude = 0.01";

    let cfg = config("cgrid", mesh, initial, 0);
    let model = build_model(&cfg, None).unwrap();
    let State::C(s) = model.initial_condition(&cfg.initial, &cfg.physics, 0).unwrap() else {
        panic!("scheme mismatch");
    };
    let rest = rest_state(&model.mesh, &model.hodge, 1.0);
    let pert = CGridState {
        m: s.m.iter().zip(&rest.m).map(|(a, b)| a - b).collect(),
        u: s.u.clone(),
    };
    assert!(max_abs(&pert.u) > 1e-4);
    let w = WOperator::build(&model.mesh, &model.dec, &model.hodge).unwrap();
    let lin = CGridLinear {
        mesh: &model.mesh,
        dec: &model.dec,
        hodge: &model.hodge,
        w: &w,
        g: cfg.physics.g,
        depth: 1.0,
        f: 1.0,
    };
    let t = lin.tendency(&pert);
    assert!(max_abs(&t.dm).max(max_abs(&t.du)) < 1e-10);

    let cfg = config("zgrid", mesh, initial, 0);
    let model = build_model(&cfg, None).unwrap();
    let State::Z(s) = model.initial_condition(&cfg.initial, &cfg.physics, 0).unwrap() else {
        panic!("scheme mismatch");
    };
    let pert = ZGridState {
        h: s.h.iter().map(|h| h - 1.0).collect(),
        zeta: s.zeta.clone(),
        mu: s.mu.clone(),
    };
    assert!(max_abs(&pert.zeta) > 1e-4);
    let lin = ZGridLinear {
        ops: ZOperators::new(&model.mesh, &model.dec, &model.hodge),
        g: cfg.physics.g,
        depth: 1.0,
        f: 1.0,
    };
    let t = lin.tendency(&pert);
    assert!(max_abs(&t.dh).max(max_abs(&t.dzeta)).max(max_abs(&t.dmu)) < 1e-10);
}

fn oscillator(x: f64, y: f64) -> State {
    State::Z(ZGridState {
        h: vec![x],
        zeta: vec![y],
        mu: vec![0.0],
    })
}

fn xy(s: &State) -> (f64, f64) {
    let a = s.arrays();
    (a[0][0], a[1][0])
}

#[test]
fn rk4_matches_its_amplification_factor() {
    // x' = y, y' = -x. One RK4 step multiplies x + iy by the degree-four
    // Taylor polynomial of exp(-i dt), whose modulus is
    // sqrt(1 - dt^6 / 72 + dt^8 / 576).
    let rotate = |s: &State| {
        let (x, y) = xy(s);
        Ok(oscillator(y, -x))
    };
    let mut errors = Vec::new();
    for dt in [0.2, 0.1] {
        let s = rk4_step(&oscillator(1.0, 0.0), dt, rotate).unwrap();
        let (x, y) = xy(&s);
        let modulus = (x * x + y * y).sqrt();
        let expected = (1.0 - dt.powi(6) / 72.0 + dt.powi(8) / 576.0).sqrt();
        assert!((modulus - expected).abs() < 1e-15);
        let (ex, ey) = (dt.cos(), -dt.sin());
        errors.push(((x - ex).powi(2) + (y - ey).powi(2)).sqrt());
    }
    let ratio = errors[0] / errors[1];
    assert!((ratio - 32.0).abs() < 1.0, "local error ratio {ratio}");
}

#[test]
fn state_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["cgrid", "zgrid"] {
        let cfg = config(scheme, "kind = \"voronoi\"\nseeds = 16\nseed = 7", RANDOM, 0);
        let model = build_model(&cfg, None).unwrap();
        let s = model.initial_condition(&cfg.initial, &cfg.physics, 3).unwrap();
        let path = dir.path().join(format!("{scheme}.state"));
        write_state(&path, &model.mesh, &s, 17, 0.17).unwrap();
        let (back, step, time) = read_state(&path, &model.mesh).unwrap();
        assert_eq!(back, s);
        assert_eq!((step, time), (17, 0.17));
        let other = build_model(&config(scheme, "kind = \"hex\"\nn = 5", RANDOM, 0), None).unwrap();
        assert!(read_state(&path, &other.mesh).is_err());
    }
}

#[test]
fn mismatched_state_is_rejected() {
    let cfg = config("cgrid", "kind = \"hex\"\nn = 4", RANDOM, 0);
    let model = build_model(&cfg, None).unwrap();
    let z = State::Z(ZGridState::rest(&model.mesh, 1.0));
    assert!(model.tendency(&z).is_err());
}
