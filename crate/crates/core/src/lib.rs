//! Finite-element solver for the time-dependent Ginzburg-Landau equations of
//! superconductivity in the temporal gauge.
//!
//! The magnetic potential is discretized in H(curl) with the lowest-order
//! second-kind Nedelec element, the complex order parameter with conforming
//! P1 elements (split into real and imaginary parts). Time stepping is
//! backward Euler with a Newton inner iteration; the linearized systems are
//! solved by GMRES with a block-diagonal SPD preconditioner that is assembled
//! and factorized once per simulation.

pub mod assembly;
pub mod krylov;
pub mod mesh;
pub mod scenarios;
pub mod spaces;
pub mod stepper;

pub use assembly::{
    AppliedField, AssemblyError, BlockSystem, ComplexField, Discretization, Params, PrecondBlocks,
    ScalarField, SourceTerms, State, VectorField,
};
pub use krylov::{CsrMatrix, FactorizedSpd, GmresOptions, GmresOutcome, KrylovError, LinearOperator};
pub use mesh::{Mesh, MeshError};
pub use scenarios::{ErrorNorms, GeometrySpec, Scenario};
pub use spaces::{NedelecSpace, P1Space, QuadratureRule, SpaceError};
pub use stepper::{
    energy_monitor, newton_solve, run_simulation, EnergyVerdict, InitialData, Preconditioner,
    RunStats, SimResult, SolverConfig, SolverError, StepStats,
};
