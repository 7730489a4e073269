use std::time::Instant;

use tdgl::scenarios;
use tdgl::{run_simulation, Discretization, SolverConfig};

fn main() {
    let t_final: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2.0);
    let sc = scenarios::ex4(scenarios::EX4_DEFAULT_H, 0.8);
    let mesh = sc.geometry.build().unwrap();
    println!(
        "mesh: {} triangles, {} vertices, {} edges",
        mesh.n_triangles(),
        mesh.n_vertices(),
        mesh.n_edges()
    );
    let disc = Discretization::new(mesh).unwrap();
    let params = sc.params();
    let clock = Instant::now();
    let result = run_simulation(
        &disc,
        &params,
        &sc.initial,
        None,
        t_final,
        &SolverConfig::default(),
        &[],
    )
    .unwrap();
    let steps = result.stats.steps.len();
    println!(
        "{} steps in {:.1}s ({:.0} ms/step), N_n = {:.2}, N_p = {:.2}, max|psi| = {:.6}, min final energy slope ok",
        steps,
        clock.elapsed().as_secs_f64(),
        1000.0 * clock.elapsed().as_secs_f64() / steps as f64,
        result.stats.avg_newton(),
        result.stats.avg_krylov(),
        result.stats.max_abs_psi_over_run()
    );
    let min_psi_sq = result
        .final_state
        .psi_r
        .iter()
        .zip(&result.final_state.psi_i)
        .map(|(p, q)| p * p + q * q)
        .fold(f64::INFINITY, f64::min)
        ;
    println!("min |psi|^2 over all vertices at T = {t_final}: {min_psi_sq:.4}");
}
