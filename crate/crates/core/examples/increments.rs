use tdgl::assembly::initial_projection;
use tdgl::scenarios;
use tdgl::stepper::{newton_solve, Preconditioner};
use tdgl::{Discretization, SolverConfig};

fn main() {
    for (name, sc, t_final) in [
        ("ex1", scenarios::ex1(16), 1.0),
        ("ex2", scenarios::ex2(16), 2.0),
    ] {
        let disc = Discretization::new(sc.geometry.build().unwrap()).unwrap();
        let params = sc.params();
        let precond = Preconditioner::new(&disc, &params).unwrap();
        let config = SolverConfig {
            newton_tol: 1e-12,
            newton_max_iter: 12,
            ..SolverConfig::default()
        };
        let mut state = initial_projection(&disc, &sc.initial.a0, &sc.initial.psi0).unwrap();
        let n = (t_final / params.dt).round() as usize;
        for step in 0..n {
            let t_next = (step + 1) as f64 * params.dt;
            let out = newton_solve(
                &disc,
                &state,
                &params,
                sc.sources.as_ref(),
                t_next,
                &config,
                &precond,
            )
            .unwrap();
            if step < 3 || step == n - 1 {
                println!(
                    "{name} step {step}: increments {:?}",
                    out.increment_norms
                        .iter()
                        .map(|v| format!("{v:.2e}"))
                        .collect::<Vec<_>>()
                );
            }
            state = out.state;
        }
    }
}
