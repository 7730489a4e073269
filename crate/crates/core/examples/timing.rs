use std::time::Instant;

use tdgl::assembly::{assemble_jacobian, assemble_residual};
use tdgl::krylov::{gmres, GmresOptions};
use tdgl::scenarios;
use tdgl::stepper::Preconditioner;
use tdgl::{Discretization, State};

fn main() {
    let m = 64;
    let sc = scenarios::ex1(m);
    let mesh = sc.geometry.build().unwrap();
    let t0 = Instant::now();
    let disc = Discretization::new(mesh).unwrap();
    println!("discretization: {:?}", t0.elapsed());

    let params = sc.params();
    let t0 = Instant::now();
    let precond = Preconditioner::new(&disc, &params).unwrap();
    println!("preconditioner assemble+factorize: {:?}", t0.elapsed());

    let state = State::zeros(&disc);
    let t0 = Instant::now();
    let jac = assemble_jacobian(&disc, &state, &params);
    println!("jacobian assembly: {:?} (nnz {})", t0.elapsed(), jac.nnz());

    let t0 = Instant::now();
    let r = assemble_residual(&disc, &state, &state, &params, sc.sources.as_ref(), sc.dt);
    println!("residual assembly: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let out = gmres(&jac, Some(precond.operator()), &r, &GmresOptions::default());
    println!(
        "gmres: {:?} ({} iters, converged {})",
        t0.elapsed(),
        out.iterations,
        out.converged
    );

    let t0 = Instant::now();
    let _ = precond.dual_norm(&r);
    println!("dual norm: {:?}", t0.elapsed());
}
