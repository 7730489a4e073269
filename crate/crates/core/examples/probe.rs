use tdgl::scenarios::{self, error_norms};
use tdgl::{run_simulation, Discretization, SolverConfig};

fn main() {
    let mut prev: Option<scenarios::ErrorNorms> = None;
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ms = if args.is_empty() { vec![4, 8, 16] } else { args };
    for m in ms {
        let sc = scenarios::ex1(m);
        let mesh = sc.geometry.build().unwrap();
        let disc = Discretization::new(mesh).unwrap();
        let params = sc.params();
        let start = std::time::Instant::now();
        let result = run_simulation(
            &disc,
            &params,
            &sc.initial,
            sc.sources.as_ref(),
            sc.t_final,
            &SolverConfig::default(),
            &[],
        )
        .unwrap();
        let e = error_norms(&disc, &result.final_state, sc.t_final);
        let rates = prev
            .map(|p| {
                [
                    (p.e_a / e.e_a).log2(),
                    (p.e_r / e.e_r).log2(),
                    (p.e_i / e.e_i).log2(),
                    (p.e_d / e.e_d).log2(),
                ]
            })
            .unwrap_or([f64::NAN; 4]);
        println!(
            "M={m:3} eA={:.3e} ({:.2}) er={:.3e} ({:.2}) ei={:.3e} ({:.2}) ed={:.3e} ({:.2})  Nn={:.2} Np={:.2}  [{:.1}s]",
            e.e_a, rates[0], e.e_r, rates[1], e.e_i, rates[2], e.e_d, rates[3],
            result.stats.avg_newton(), result.stats.avg_krylov(),
            start.elapsed().as_secs_f64()
        );
        prev = Some(e);
    }
}
