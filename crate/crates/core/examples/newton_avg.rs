use tdgl::scenarios;
use tdgl::{run_simulation, Discretization, SolverConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tol: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(1e-8);
    for (sc, t_final) in [
        (scenarios::ex2(16), 20.0),
        (scenarios::ex1(16), 1.0),
        (scenarios::ex1(32), 1.0),
    ] {
        let disc = Discretization::new(sc.geometry.build().unwrap()).unwrap();
        let params = sc.params();
        let config = SolverConfig {
            newton_tol: tol,
            ..SolverConfig::default()
        };
        let result = run_simulation(
            &disc,
            &params,
            &sc.initial,
            sc.sources.as_ref(),
            t_final,
            &config,
            &[],
        )
        .unwrap();
        let hist: Vec<usize> = {
            let mut h = vec![0usize; 10];
            for s in &result.stats.steps {
                h[s.newton_iters.min(9)] += 1;
            }
            h
        };
        println!(
            "{} tol={tol:.0e}: N_n={:.3} N_p={:.2} max|psi|={:.6} hist={:?}",
            sc.name,
            result.stats.avg_newton(),
            result.stats.avg_krylov(),
            result.stats.max_abs_psi_over_run(),
            hist
        );
    }
}
