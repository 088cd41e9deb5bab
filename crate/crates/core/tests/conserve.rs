use std::path::Path;

use swcons::conserve::{contract, Scheme, Term, CSV_COLUMNS};
use swcons::driver::{run, RunConfig, RunOptions};
use swcons::qflux::QVariant;

fn config(scheme: &str, mesh: &str, initial: &str, steps: usize) -> RunConfig {
    let text = format!(
        "[run]\nscheme = \"{scheme}\"\ndt = 0.005\nsteps = {steps}\n\n[mesh]\n{mesh}\n\n\
         [physics]\ng = 9.80616\ndepth = 1.0\nf = 1.0\n\n[initial]\n{initial}\n"
    );
    RunConfig::from_toml(&text, Path::new(".")).unwrap()
}

const RANDOM: &str = "name = \"random_perturbation\"\namplitude = 0.05\nvelocity = 0.2";

#[test]
fn contraction_of_hand_computed_terms() {
    let c = contract(&[Term::new(&[1.0, 2.0], &[3.0, -1.5]), Term::new(&[-0.5], &[2.0])]);
    assert_eq!(c.rate, 3.0 - 3.0 - 1.0);
    assert_eq!(c.magnitude, 3.0 + 3.0 + 1.0);
    assert_eq!(c.relative(), 1.0 / 7.0);

    let c = contract(&[Term::weighted(&[1.0, 1.0], &[2.0, -1.0], &[0.5, 1.0])]);
    assert_eq!((c.rate, c.magnitude), (0.0, 2.0));
    assert_eq!(c.relative(), 0.0);
    assert_eq!(contract(&[Term::new(&[0.0], &[5.0])]).relative(), 0.0);
}

#[test]
fn cgrid_contractions_on_hexagons() {
    let cfg = config("cgrid", "kind = \"hex\"\nn = 4", RANDOM, 5);
    let out = run(&cfg, &RunOptions::default()).unwrap();
    assert!(out.violations.is_empty(), "{:?}", out.violations);
    assert!(out.series.max_energy_rate() < 1e-12);
    assert!(out.series.max_enstrophy_rate() < 1e-10);
    assert!(out.series.records.iter().all(|r| r.scheme == Scheme::CGrid));
}

#[test]
fn zgrid_contractions_on_the_sphere() {
    let cfg = config("zgrid", "kind = \"icosahedral\"\nlevel = 1", RANDOM, 5);
    let out = run(&cfg, &RunOptions::default()).unwrap();
    assert!(out.series.max_energy_rate() < 1e-11);
    assert!(out.series.max_enstrophy_rate() < 1e-11);
}

#[test]
fn reference_variants_are_detected() {
    let cfg = config("cgrid", "kind = \"hex\"\nn = 4", RANDOM, 2);
    let energy_only = RunOptions {
        q_variant: Some(QVariant::EnergyOnly),
        ..RunOptions::default()
    };
    let out = run(&cfg, &energy_only).unwrap();
    assert!(out.series.max_energy_rate() < 1e-12);
    // Near rest the exactly cancelling gravity terms dominate the magnitude,
    // so the relative violation is judged against the conserving tolerance.
    assert!(out.series.max_enstrophy_rate() > 1e4 * 1e-10);
    assert!(out.violations.iter().any(|v| v.contains("enstrophy")));

    let enstrophy_only = RunOptions {
        q_variant: Some(QVariant::EnstrophyOnly),
        ..RunOptions::default()
    };
    let out = run(&cfg, &enstrophy_only).unwrap();
    assert!(out.series.max_energy_rate() > 1e4 * 1e-12);
    assert!(out.violations.iter().any(|v| v.contains("energy")));
}

#[test]
fn series_and_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("cgrid", "kind = \"square\"\nnx = 4\nny = 4", RANDOM, 100);
    cfg.base_dir = dir.path().to_path_buf();
    let opts = RunOptions {
        write_files: true,
        ..RunOptions::default()
    };
    let out = run(&cfg, &opts).unwrap();
    assert_eq!(out.series.records.len(), 101);
    let first = &out.series.records[0];
    assert_eq!((first.energy_drift, first.enstrophy_drift), (0.0, 0.0));
    for (k, r) in out.series.records.iter().enumerate() {
        assert_eq!(r.step, k);
        assert!((r.time - 0.005 * k as f64).abs() < 1e-15);
        assert!(((r.mass - first.mass) / first.mass).abs() < 1e-14);
    }

    let csv = std::fs::read_to_string(cfg.output_dir().join("diag.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 102);
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(csv, out.series.to_csv());
    assert!(lines[1..].iter().all(|l| l.split(',').count() == CSV_COLUMNS.len()));
}

#[test]
fn rest_has_no_drift() {
    for scheme in ["cgrid", "zgrid"] {
        for mesh in ["kind = \"voronoi\"\nseeds = 16\nseed = 7", "kind = \"icosahedral\"\nlevel = 1"] {
            let out = run(&config(scheme, mesh, "name = \"rest\"", 20), &RunOptions::default()).unwrap();
            for r in &out.series.records {
                assert_eq!((r.energy_drift, r.enstrophy_drift), (0.0, 0.0), "{scheme} {mesh}");
                assert_eq!(r.energy_rate.rate, 0.0);
            }
        }
    }
}
