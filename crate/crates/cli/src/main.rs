use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tdgl_cli::{resolve_config, run, CliOverrides};

/// Time-dependent Ginzburg-Landau simulator: H(curl) x P1 finite elements,
/// backward Euler, Newton with block-diagonal preconditioned GMRES.
#[derive(Parser, Debug)]
#[command(name = "tdgl", version)]
struct Cli {
    /// Built-in scenario: ex1, ex2, ex3, ex4-h08 or ex4-h11
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,

    /// Config file with scenario./solver./output. keys; flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    /// Mesh resolution; a comma-separated list sweeps several meshes
    #[arg(long = "M", value_delimiter = ',')]
    m: Vec<usize>,

    /// Target mesh size for the holes geometry
    #[arg(long)]
    h_target: Option<f64>,

    /// Time step (default: scenario convention)
    #[arg(long)]
    dt: Option<f64>,

    /// Final time (default: scenario convention)
    #[arg(long = "T")]
    t_final: Option<f64>,

    /// Disable the block-diagonal preconditioner (comparison mode)
    #[arg(long)]
    no_precond: bool,

    /// Output directory (default: out)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Newton tolerance on the increment norm
    #[arg(long)]
    newton_tol: Option<f64>,

    /// GMRES relative residual tolerance
    #[arg(long)]
    gmres_tol: Option<f64>,

    /// Snapshot times overriding the scenario defaults
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = CliOverrides {
        scenario: cli.scenario,
        config: cli.config,
        m_values: cli.m,
        h_target: cli.h_target,
        dt: cli.dt,
        t_final: cli.t_final,
        no_precond: cli.no_precond,
        out: cli.out,
        newton_tol: cli.newton_tol,
        gmres_tol: cli.gmres_tol,
        snapshots: cli.snapshots,
    };
    match resolve_config(&overrides).and_then(|cfg| run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
