//! One line per acceptance criterion, then a single assertion over all of them.

use std::io::Write;
use std::path::Path;

use swcons::driver::{build_model, run, RunConfig, RunOptions};
use swcons::mesh::{
    build_hex_mesh, build_icosahedral_mesh, build_square_mesh, build_voronoi_mesh, Mesh,
};
use swcons::verify::{self, Bound, Check, Operators, SuiteOptions};

fn meshes() -> Vec<Mesh> {
    vec![
        build_square_mesh(4, 4, 1.0, 1.0).unwrap(),
        build_hex_mesh(4, 1.0).unwrap(),
        build_voronoi_mesh(16, 1.0, 1.0, 7).unwrap(),
        build_icosahedral_mesh(0, 1.0).unwrap(),
        build_icosahedral_mesh(1, 1.0).unwrap(),
        build_icosahedral_mesh(2, 1.0).unwrap(),
    ]
}

struct Criterion {
    number: usize,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    fn line(&self) -> String {
        let worst = self
            .checks
            .iter()
            .find(|c| !c.passed())
            .or_else(|| {
                self.checks
                    .iter()
                    .filter(|c| matches!(c.bound, Bound::AtMost(_)))
                    .max_by(|a, b| a.value.total_cmp(&b.value))
            })
            .or(self.checks.first());
        let detail = match worst {
            Some(c) => format!("{} on {}: {:.3e} ({})", c.name, c.mesh, c.value, c.bound),
            None => "no checks ran".into(),
        };
        format!(
            "criterion {:>2} {} {:<36} {} checks; {}",
            self.number,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            detail
        )
    }
}

fn select(checks: &[Check], names: &[&str]) -> Vec<Check> {
    checks.iter().filter(|c| names.contains(&c.name.as_str())).cloned().collect()
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml(text, Path::new(".")).unwrap()
}

fn time_convergence() -> Vec<Check> {
    let cfg = config(
        r#"
[run]
scheme = "cgrid"
dt = 0.01
steps = 100

[mesh]
kind = "hex"
n = 4
length = 1.0

[physics]
g = 0.02
depth = 1.0
f = 1.0

[initial]
name = "random_perturbation"
amplitude = 0.3
velocity = 0.3
seed = 3
"#,
    );
    let model = build_model(&cfg, None).unwrap();
    let state = model.initial_condition(&cfg.initial, &cfg.physics, cfg.run.seed).unwrap();
    let (coarse, fine, ratio) = verify::energy_drift_ratio(&model, &state, 1.0, cfg.run.dt).unwrap();
    println!("energy drift at dt {}: {coarse:.3e}, at dt/2: {fine:.3e}", cfg.run.dt);
    vec![Check::new("rk4_drift_ratio", &model.mesh, ratio, Bound::Within(13.0, 19.0))]
}

fn determinism() -> Vec<Check> {
    let cases = [
        ("cgrid", "kind = \"hex\"\nn = 4\nlength = 1.0", build_hex_mesh(4, 1.0).unwrap()),
        ("zgrid", "kind = \"icosahedral\"\nlevel = 1\nradius = 1.0", build_icosahedral_mesh(1, 1.0).unwrap()),
    ];
    let mut out = Vec::new();
    for (scheme, mesh_spec, mesh) in cases {
        let csv: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let text = format!(
                    "[run]\nscheme = \"{scheme}\"\ndt = 0.01\nsteps = 20\nseed = 1\noutput = \"{}\"\n\n\
                     [mesh]\n{mesh_spec}\n\n[physics]\ng = 9.80616\ndepth = 1.0\nf = 1.0\n\n\
                     [initial]\nname = \"random_perturbation\"\nvelocity = 0.1\n",
                    dir.path().join("run").display()
                );
                let cfg = config(&text);
                run(&cfg, &RunOptions { q_variant: None, write_files: true }).unwrap();
                std::fs::read(dir.path().join("run").join("diag.csv")).unwrap()
            })
            .collect();
        let differ = csv[0] != csv[1] || csv[0].is_empty();
        out.push(Check::new(
            &format!("{scheme}_csv_identical"),
            &mesh,
            differ as u8 as f64,
            Bound::AtMost(0.0),
        ));
    }
    out
}

#[test]
fn acceptance_criteria() {
    let opt = SuiteOptions::default();
    let mut all: Vec<Check> = Vec::new();
    let mut sizes = Vec::new();
    for mesh in meshes() {
        let ops = Operators::new(&mesh).unwrap();
        all.extend(verify::mesh_checks(&mesh));
        all.extend(verify::w_checks(&ops, opt.seed));
        all.extend(verify::alpha_checks(&ops));
        all.extend(verify::q_checks(&ops, opt.q_trials, opt.seed));
        all.extend(verify::cgrid_conservation(&ops, &opt).unwrap());
        all.extend(verify::negative_controls(&ops, &opt).unwrap());
        all.extend(verify::zgrid_conservation(&ops, &opt).unwrap());
        all.extend(verify::jacobian_agreement(&ops, opt.seed));
        all.extend(verify::derivative_checks(&ops, &opt).unwrap());
        all.extend(verify::steady_state_checks(&ops, &opt).unwrap());
        all.extend(verify::helmholtz_checks(&ops, &opt).unwrap());
        if mesh.label.starts_with("square") || mesh.label.starts_with("hex") {
            sizes.push((mesh.label.clone(), verify::alpha_system_size(&ops, 0)));
        }
    }

    let mut dims = Vec::new();
    for (label, (rows, cols)) in &sizes {
        let want = if label.starts_with("square") { (40, 24) } else { (126, 90) };
        let mesh = if label.starts_with("square") {
            build_square_mesh(4, 4, 1.0, 1.0).unwrap()
        } else {
            build_hex_mesh(4, 1.0).unwrap()
        };
        println!("alpha system on {label}: {rows} x {cols}");
        dims.push(Check::new(
            "alpha_system_size",
            &mesh,
            ((*rows, *cols) != want) as u8 as f64,
            Bound::AtMost(0.0),
        ));
    }
    let mut alpha = select(&all, &["alpha_residual"]);
    alpha.extend(dims);

    let criteria = vec![
        Criterion {
            number: 1,
            title: "DEC identities",
            checks: select(&all, &["d2_d1", "d2bar_d1bar", "d2t_minus_d1bar", "d2bar_t_d1"]),
        },
        Criterion {
            number: 2,
            title: "W contract",
            checks: select(&all, &["w_antisymmetry", "w_constraint", "w_constraint_random"]),
        },
        Criterion {
            number: 3,
            title: "alpha exactness and system size",
            checks: alpha,
        },
        Criterion {
            number: 4,
            title: "Q properties",
            checks: select(
                &all,
                &["q_adjoint", "q_enstrophy_condition", "q_indicator_condition", "q_pv_compatibility"],
            ),
        },
        Criterion {
            number: 5,
            title: "C-grid conservation",
            checks: select(
                &all,
                &[
                    "cgrid_energy_contraction",
                    "cgrid_enstrophy_contraction",
                    "mass_column_sums",
                    "circulation_column_sums",
                    "mass_tendency_sum",
                    "circulation_tendency_sum",
                ],
            ),
        },
        Criterion {
            number: 6,
            title: "negative controls",
            checks: select(&all, &["energy_only_enstrophy_loss", "enstrophy_only_energy_loss"]),
        },
        Criterion {
            number: 7,
            title: "Z-grid conservation",
            checks: select(
                &all,
                &["zgrid_energy_contraction", "zgrid_enstrophy_contraction", "jacobian_agreement"],
            ),
        },
        Criterion {
            number: 8,
            title: "functional-derivative oracles",
            checks: select(
                &all,
                &["cgrid_fd_phi", "cgrid_fd_flux", "zgrid_fd_phi", "zgrid_fd_psi", "zgrid_fd_chi"],
            ),
        },
        Criterion {
            number: 9,
            title: "steady states",
            checks: select(
                &all,
                &[
                    "cgrid_rest_tendency",
                    "zgrid_rest_tendency",
                    "cgrid_geostrophic_tendency",
                    "zgrid_geostrophic_tendency",
                ],
            ),
        },
        Criterion {
            number: 10,
            title: "Helmholtz solver",
            checks: select(&all, &["helmholtz_residual", "helmholtz_constant_depth"]),
        },
        Criterion {
            number: 11,
            title: "RK4 time convergence",
            checks: time_convergence(),
        },
        Criterion {
            number: 12,
            title: "determinism",
            checks: determinism(),
        },
    ];

    let mut out = std::io::stdout().lock();
    for c in &criteria {
        writeln!(out, "{}", c.line()).unwrap();
        for f in c.checks.iter().filter(|k| !k.passed()) {
            writeln!(out, "    {f}").unwrap();
        }
    }
    let failed: Vec<usize> = criteria.iter().filter(|c| !c.passed()).map(|c| c.number).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
