use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use swcons::driver::{model_on_mesh, run_model, MeshSpec, RunConfig};
use swcons::dec::Dec;
use swcons::hodge::{Hodge, WOperator};
use swcons::mesh::{read_mesh, validate_mesh, write_mesh};
use swcons::qflux::{
    solve_alpha_coupled, solve_alpha_unchecked, verify_q, AlphaCoefficients, QOperator, QVariant,
    ALPHA_RESIDUAL_TOLERANCE,
};
use swcons::verify::{q_report_checks, suite, Check, SuiteOptions};

/// Exit status when checks or tolerances fail.
const VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(name = "swcons", version, about = "Conservative shallow-water schemes on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or check meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Solve or check the nonlinear Coriolis coefficients.
    #[command(subcommand)]
    Q(QCommand),
    /// Integrate a configured run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 2 when a contraction exceeds its tolerance.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum)]
        q_variant: Option<VariantArg>,
    },
    /// Run the property suite on the mesh of a configuration.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write a generated mesh to a file.
    Build {
        #[command(flatten)]
        spec: MeshArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural and metric checks of a mesh file.
    Validate { path: PathBuf },
}

#[derive(Subcommand)]
enum QCommand {
    /// Solve the per-cell coefficient systems and write them to a file.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Decoupled)]
        mode: ModeArg,
    },
    /// Randomized checks of the operator built from stored coefficients.
    Verify {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Square,
    Hex,
    Voronoi,
    Icosahedral,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 4)]
    nx: usize,
    #[arg(long, default_value_t = 4)]
    ny: usize,
    #[arg(long, default_value_t = 1.0)]
    lx: f64,
    #[arg(long, default_value_t = 1.0)]
    ly: f64,
    /// Hexagons per side.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Hexagon edge length.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Generator points of a Voronoi mesh.
    #[arg(long, default_value_t = 16)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Icosahedral refinement level.
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

impl MeshArgs {
    fn spec(&self) -> MeshSpec {
        match self.kind {
            Kind::Square => MeshSpec::Square {
                nx: self.nx,
                ny: self.ny,
                lx: self.lx,
                ly: self.ly,
            },
            Kind::Hex => MeshSpec::Hex {
                n: self.n,
                length: self.length,
            },
            Kind::Voronoi => MeshSpec::Voronoi {
                seeds: self.seeds,
                lx: self.lx,
                ly: self.ly,
                seed: self.seed,
            },
            Kind::Icosahedral => MeshSpec::Icosahedral {
                level: self.level,
                radius: self.radius,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Conserving,
    #[value(name = "energy_only", alias = "energy-only")]
    EnergyOnly,
    #[value(name = "enstrophy_only", alias = "enstrophy-only")]
    EnstrophyOnly,
}

impl From<VariantArg> for QVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Conserving => QVariant::Conserving,
            VariantArg::EnergyOnly => QVariant::EnergyOnly,
            VariantArg::EnstrophyOnly => QVariant::EnstrophyOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Decoupled,
    Coupled,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Mesh(MeshCommand::Build { spec, out }) => {
            let mesh = spec.spec().build(Path::new(".")).context("mesh generation")?;
            write_mesh(&mesh, &out).context("writing mesh")?;
            println!(
                "{}: {} cells, {} edges, {} vertices -> {}",
                mesh.label,
                mesh.n_cells(),
                mesh.n_edges(),
                mesh.n_vertices(),
                out.display()
            );
            Ok(0)
        }
        Command::Mesh(MeshCommand::Validate { path }) => {
            let mesh = read_mesh(&path).context("reading mesh")?;
            let report = validate_mesh(&mesh);
            print!("{report}");
            Ok(if report.passed() { 0 } else { VIOLATION })
        }
        Command::Q(QCommand::Solve { mesh, out, mode }) => {
            let mesh = read_mesh(&mesh).context("reading mesh")?;
            let hodge = Hodge::new(&mesh).context("hodge operators")?;
            let alpha = match mode {
                ModeArg::Decoupled => solve_alpha_unchecked(&mesh, &hodge),
                ModeArg::Coupled => solve_alpha_coupled(&mesh, &hodge).context("coupled alpha solve")?,
            };
            alpha.write(&out).context("writing coefficients")?;
            let res = alpha.max_residual();
            println!("{} cells, max relative residual {res:.3e} -> {}", alpha.cells.len(), out.display());
            Ok(if res <= ALPHA_RESIDUAL_TOLERANCE { 0 } else { VIOLATION })
        }
        Command::Q(QCommand::Verify {
            mesh,
            alpha,
            trials,
            seed,
        }) => {
            let mesh = read_mesh(&mesh).context("reading mesh")?;
            let dec = Dec::new(&mesh);
            let hodge = Hodge::new(&mesh).context("hodge operators")?;
            let w = WOperator::build(&mesh, &dec, &hodge).context("W operator")?;
            let alpha = AlphaCoefficients::read(&alpha, &mesh).context("reading coefficients")?;
            let q = QOperator::Conserving(&alpha);
            let r = verify_q(&mesh, &dec, &hodge, &w, &q, trials, seed);
            let checks = q_report_checks(&mesh, &r);
            Ok(report(&checks))
        }
        Command::Run {
            config,
            strict,
            q_variant,
        } => run(&config, strict, q_variant.map(QVariant::from)),
        Command::Verify { config, trials } => {
            let cfg = RunConfig::load(&config).context("reading configuration")?;
            let mesh = cfg.mesh.build(&cfg.base_dir).context("mesh")?;
            let opt = SuiteOptions {
                g: cfg.physics.g,
                f: cfg.physics.f.unwrap_or(1.0),
                depth: cfg.physics.depth,
                q_trials: trials,
                seed: cfg.run.seed,
                ..SuiteOptions::default()
            };
            let checks = suite(&mesh, &opt).context("property suite")?;
            Ok(report(&checks))
        }
    }
}

fn report(checks: &[Check]) -> u8 {
    for c in checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {failed} failed", checks.len());
    if failed == 0 {
        0
    } else {
        VIOLATION
    }
}

fn run(config: &Path, strict: bool, variant: Option<QVariant>) -> Result<u8> {
    let mut cfg = RunConfig::load(config).context("reading configuration")?;
    if let Some(v) = variant {
        cfg.run.q_variant = v.name().into();
    }
    let out_dir = cfg.output_dir();
    std::fs::create_dir_all(&out_dir).with_context(|| format!("output: creating {}", out_dir.display()))?;
    let mesh = cfg.mesh.build(&cfg.base_dir).context("mesh")?;
    let model = model_on_mesh(&cfg, mesh, Some(&cfg.alpha_cache())).context("model setup")?;
    let state = model
        .initial_condition(&cfg.initial, &cfg.physics, cfg.run.seed)
        .context("initial condition")?;
    let outcome = run_model(&model, &cfg, state, Some(&out_dir)).context("time loop")?;
    let last = outcome.series.records.last();
    println!("{} on {}: {} steps of {}", model.scheme(), model.mesh.label, cfg.run.steps, cfg.run.dt);
    println!("courant number {:.3}", outcome.courant);
    if let Some(r) = last {
        println!("final energy drift {:.3e}, enstrophy drift {:.3e}", r.energy_drift, r.enstrophy_drift);
    }
    println!(
        "max energy contraction {:.3e}, enstrophy contraction {:.3e}",
        outcome.series.max_energy_rate(),
        outcome.series.max_enstrophy_rate()
    );
    println!("diagnostics -> {}", out_dir.join("diag.csv").display());
    for v in &outcome.violations {
        eprintln!("tolerance: {v}");
    }
    if strict && !outcome.violations.is_empty() {
        return Ok(VIOLATION);
    }
    if outcome.series.records.is_empty() {
        bail!("time loop produced no diagnostics");
    }
    Ok(0)
}
