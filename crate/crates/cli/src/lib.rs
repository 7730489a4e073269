//! Batch driver around the tdgl solver crate: resolves a run configuration,
//! executes the simulations, and writes stats.csv, errors.csv (manufactured
//! runs), and VTK field snapshots.

pub mod config;
pub mod output;

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};

use tdgl::scenarios::{self, error_norms, GeometrySpec, Scenario};
use tdgl::{
    run_simulation, AppliedField, ComplexField, Discretization, InitialData, Params, SolverConfig,
    VectorField,
};

use config::RunConfig;
use output::{attach_rates, write_errors_csv, write_stats_csv, write_vtk_snapshot, ErrorRow};

/// Resolves the configured scenario list (a sweep when several mesh
/// resolutions are given), with dt / T / snapshot overrides applied.
fn build_runs(cfg: &RunConfig) -> Result<Vec<Scenario>> {
    let mut runs = Vec::new();
    if let Some(name) = &cfg.scenario {
        let resolutions: Vec<Option<usize>> = if cfg.m_values.is_empty() {
            vec![None]
        } else {
            cfg.m_values.iter().copied().map(Some).collect()
        };
        for m in resolutions {
            let sc = scenarios::by_name(name, m, cfg.h_target)
                .ok_or_else(|| anyhow!("unknown scenario {name:?}; expected ex1, ex2, ex3, ex4-h08 or ex4-h11"))?;
            runs.push(sc);
        }
    } else {
        let custom = cfg.custom.as_ref().expect("validated");
        let m = cfg.m_values.first().copied().unwrap_or(16);
        let geometry = match custom.geometry.as_str() {
            "unit_square" => GeometrySpec::UnitSquare { m },
            "lshape" => GeometrySpec::LShape { m },
            "holes" => GeometrySpec::SquareWithHoles {
                h_target: cfg.h_target.unwrap_or(scenarios::EX4_DEFAULT_H),
            },
            other => bail!("unknown geometry {other:?}; expected unit_square, lshape or holes"),
        };
        let (p0, q0) = custom.psi0;
        let a0 = custom.a0;
        runs.push(Scenario {
            name: "custom".to_string(),
            geometry,
            kappa: custom.kappa,
            sigma: custom.sigma,
            h_ext: AppliedField::Constant(custom.h_field),
            initial: InitialData {
                psi0: ComplexField::constant(p0, q0),
                a0: VectorField::constant(a0),
            },
            sources: None,
            dt: cfg.dt.unwrap_or(1.0 / m as f64),
            t_final: cfg.t_final.unwrap_or(1.0),
            snapshot_times: cfg.snapshot_times.clone().unwrap_or_default(),
            manufactured: false,
        });
    }
    for sc in &mut runs {
        if let Some(dt) = cfg.dt {
            sc.dt = dt;
        }
        if let Some(t) = cfg.t_final {
            sc.t_final = t;
        }
        if let Some(snaps) = &cfg.snapshot_times {
            sc.snapshot_times = snaps.clone();
        }
    }
    Ok(runs)
}

fn mesh_label(geometry: &GeometrySpec) -> String {
    match geometry {
        GeometrySpec::UnitSquare { m } | GeometrySpec::LShape { m } => format!("M{m}"),
        GeometrySpec::SquareWithHoles { h_target } => format!("h{h_target}"),
    }
}

/// Executes every configured run and writes the outputs. Returns an error on
/// unknown scenarios, unparseable configs, or solver failure.
pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let runs = build_runs(cfg)?;
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {:?}", cfg.out_dir))?;
    let sweep = runs.len() > 1;
    let mut rows: Vec<ErrorRow> = Vec::new();

    for sc in &runs {
        let mesh = sc.geometry.build()?;
        let disc = Discretization::new(mesh)?;
        let params = Params::new(sc.kappa, sc.sigma, sc.dt, sc.h_ext.clone())?;
        let solver = SolverConfig {
            newton_tol: cfg.newton_tol,
            newton_max_iter: cfg.newton_max_iter,
            gmres_rel_tol: cfg.gmres_tol,
            // comparison runs without the preconditioner need far more room
            gmres_max_iter: if cfg.precondition {
                cfg.gmres_max_iter
            } else {
                cfg.gmres_max_iter.max(5000)
            },
            precondition: cfg.precondition,
        };
        eprintln!(
            "running {} ({}; {} elements, dt = {}, T = {})",
            sc.name,
            mesh_label(&sc.geometry),
            disc.mesh().n_triangles(),
            sc.dt,
            sc.t_final
        );
        let result = run_simulation(
            &disc,
            &params,
            &sc.initial,
            sc.sources.as_ref(),
            sc.t_final,
            &solver,
            &sc.snapshot_times,
        )?;

        let stats_name = if sweep {
            format!("stats_{}.csv", mesh_label(&sc.geometry))
        } else {
            "stats.csv".to_string()
        };
        write_stats_csv(&cfg.out_dir.join(stats_name), &result.stats)?;

        for (t, state) in &result.snapshots {
            let path = cfg
                .out_dir
                .join(format!("{}_t{:08.3}.vtk", sc.name, t));
            write_vtk_snapshot(&disc, state, &params, &path)?;
        }

        if sc.manufactured {
            let m = match sc.geometry {
                GeometrySpec::UnitSquare { m } => m,
                _ => unreachable!("manufactured runs use the unit square"),
            };
            rows.push(ErrorRow {
                m,
                errors: error_norms(&disc, &result.final_state, sc.t_final),
                rates: None,
            });
        }

        let stats = &result.stats;
        eprintln!(
            "  {} steps, avg Newton {:.2}, avg Krylov/Newton {:.2}, max |psi| {:.4}, final energy {:.6e}",
            stats.steps.len(),
            stats.avg_newton(),
            stats.avg_krylov(),
            stats.max_abs_psi_over_run(),
            stats.steps.last().map(|s| s.energy).unwrap_or(f64::NAN)
        );
    }

    if !rows.is_empty() {
        attach_rates(&mut rows);
        write_errors_csv(&cfg.out_dir.join("errors.csv"), &rows)?;
    }
    Ok(())
}

/// Command-line flags, merged over an optional config file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub scenario: Option<String>,
    pub config: Option<PathBuf>,
    pub m_values: Vec<usize>,
    pub h_target: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub no_precond: bool,
    pub out: Option<PathBuf>,
    pub newton_tol: Option<f64>,
    pub gmres_tol: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
}

/// defaults <- config file <- flags.
pub fn resolve_config(cli: &CliOverrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {path:?}"))?;
        cfg.apply_file_text(&text)
            .with_context(|| format!("parsing config file {path:?}"))?;
    }
    if let Some(s) = &cli.scenario {
        cfg.scenario = Some(s.clone());
    }
    if !cli.m_values.is_empty() {
        cfg.m_values = cli.m_values.clone();
    }
    if let Some(h) = cli.h_target {
        cfg.h_target = Some(h);
    }
    if let Some(dt) = cli.dt {
        cfg.dt = Some(dt);
    }
    if let Some(t) = cli.t_final {
        cfg.t_final = Some(t);
    }
    if cli.no_precond {
        cfg.precondition = false;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(tol) = cli.newton_tol {
        cfg.newton_tol = tol;
    }
    if let Some(tol) = cli.gmres_tol {
        cfg.gmres_tol = tol;
    }
    if let Some(snaps) = &cli.snapshots {
        cfg.snapshot_times = Some(snaps.clone());
    }
    Ok(cfg)
}
