//! Shared fixtures for the solver benchmarks.

use tdgl::scenarios;
use tdgl::{Discretization, Params, State};

pub struct Fixture {
    pub disc: Discretization,
    pub params: Params,
    pub state: State,
}

/// Manufactured-problem setup at resolution `m`, with the exact solution
/// interpolated at t = 0 as a representative mid-run state.
pub fn ex1_fixture(m: usize) -> Fixture {
    let sc = scenarios::ex1(m);
    let disc = Discretization::new(sc.geometry.build().unwrap()).unwrap();
    let params = sc.params();
    let psi = scenarios::ex1_psi_field(0.0);
    let a = scenarios::ex1_a_field(0.0);
    let state = State {
        psi_r: disc.p1().interpolate(disc.mesh(), |x, y| psi.re.value(x, y)),
        psi_i: disc.p1().interpolate(disc.mesh(), |x, y| psi.im.value(x, y)),
        a: disc.nedelec().interpolate(disc.mesh(), |x, y| a.value(x, y)),
    };
    Fixture {
        disc,
        params,
        state,
    }
}
