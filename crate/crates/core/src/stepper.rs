//! Backward-Euler time loop with a Newton inner iteration. Each Newton step
//! solves the linearized block system by GMRES, preconditioned with the
//! state-independent block-diagonal matrix P, which is factorized once per
//! simulation and reused for every step.

use std::time::Instant;

use thiserror::Error;

use crate::assembly::{
    assemble_jacobian, assemble_preconditioner_blocks, assemble_residual, gibbs_energy,
    initial_projection, AssemblyError, ComplexField, Discretization, Params, PrecondBlocks,
    SourceTerms, State, VectorField,
};
use crate::krylov::{gmres, BlockDiagSolve, FactorizedSpd, GmresOptions, KrylovError, LinearOperator};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(
        "Newton iteration did not converge at step {step} (t = {time}): {iters} iterations, increment norms {history:?}"
    )]
    NewtonDiverged {
        step: usize,
        time: f64,
        iters: usize,
        history: Vec<f64>,
    },
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("time step {dt} does not divide the final time {t_final}")]
    TimeGridMismatch { dt: f64, t_final: f64 },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
}

/// Tolerances and iteration limits for one simulation.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Newton stopping tolerance on the increment norm |||w|||.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub gmres_rel_tol: f64,
    pub gmres_max_iter: usize,
    /// When false, GMRES runs unpreconditioned (comparison mode).
    pub precondition: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            // Newton converges quadratically here, so the accepted state is
            // accurate to roughly the square of this tolerance.
            newton_tol: 1e-6,
            newton_max_iter: 20,
            gmres_rel_tol: 1e-8,
            gmres_max_iter: 500,
            precondition: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.newton_tol > 0.0 && self.newton_tol < 1.0) {
            return Err(SolverError::InvalidConfig("newton_tol must be in (0, 1)"));
        }
        if !(self.gmres_rel_tol > 0.0 && self.gmres_rel_tol < 1.0) {
            return Err(SolverError::InvalidConfig("gmres_rel_tol must be in (0, 1)"));
        }
        if self.newton_max_iter == 0 || self.gmres_max_iter == 0 {
            return Err(SolverError::InvalidConfig("iteration limits must be >= 1"));
        }
        Ok(())
    }
}

/// Assembled preconditioner blocks together with their Cholesky factors.
/// Also provides the norm |||w|||^2 = w^T P w used as the Newton error
/// measure, and its dual norm for residual diagnostics.
pub struct Preconditioner {
    blocks: PrecondBlocks,
    solve: BlockDiagSolve,
}

impl Preconditioner {
    pub fn new(disc: &Discretization, params: &Params) -> Result<Self, KrylovError> {
        let blocks = assemble_preconditioner_blocks(disc, params);
        let solve = BlockDiagSolve::new(vec![
            FactorizedSpd::new(&blocks.p_psi_r)?,
            FactorizedSpd::new(&blocks.p_psi_i)?,
            FactorizedSpd::new(&blocks.p_a)?,
        ]);
        Ok(Preconditioner { blocks, solve })
    }

    pub fn blocks(&self) -> &PrecondBlocks {
        &self.blocks
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        &self.solve
    }

    /// |||w|||^2 = w^T P w.
    pub fn norm_sq(&self, w: &[f64]) -> f64 {
        let nv = self.blocks.p_psi_r.rows();
        let na = self.blocks.p_a.rows();
        debug_assert_eq!(w.len(), 2 * nv + na);
        self.blocks.p_psi_r.quadratic_form(&w[..nv])
            + self.blocks.p_psi_i.quadratic_form(&w[nv..2 * nv])
            + self.blocks.p_a.quadratic_form(&w[2 * nv..])
    }

    pub fn norm(&self, w: &[f64]) -> f64 {
        self.norm_sq(w).max(0.0).sqrt()
    }

    /// Dual norm sqrt(r^T P^{-1} r) of a residual functional.
    pub fn dual_norm(&self, r: &[f64]) -> f64 {
        let mut z = vec![0.0; r.len()];
        self.solve.apply(r, &mut z);
        r.iter()
            .zip(&z)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }
}

/// Result of one Newton solve.
#[derive(Debug)]
pub struct NewtonOutcome {
    pub state: State,
    /// GMRES iteration count of each Newton step.
    pub krylov_iters: Vec<usize>,
    pub increment_norms: Vec<f64>,
    /// Dual norm of the nonlinear residual at the accepted state.
    pub residual_norm: f64,
}

/// Solves the nonlinear backward-Euler step for `t_next`, starting from the
/// previous time-step solution as the initial Newton iterate.
pub fn newton_solve(
    disc: &Discretization,
    prev: &State,
    params: &Params,
    sources: Option<&SourceTerms>,
    t_next: f64,
    config: &SolverConfig,
    precond: &Preconditioner,
) -> Result<NewtonOutcome, SolverError> {
    prev.validate(disc)?;
    let mut state = prev.clone();
    let mut krylov_iters = Vec::new();
    let mut increment_norms = Vec::new();
    let gmres_opts = GmresOptions {
        rel_tol: config.gmres_rel_tol,
        max_iter: config.gmres_max_iter,
        restart: None,
    };
    for _ in 0..config.newton_max_iter {
        let residual = assemble_residual(disc, &state, prev, params, sources, t_next);
        let jacobian = assemble_jacobian(disc, &state, params);
        let pre_op = config.precondition.then(|| precond.operator());
        let out = gmres(&jacobian, pre_op, &residual, &gmres_opts);
        krylov_iters.push(out.iterations);
        state.add_flat(&out.solution);
        if !state.is_finite() {
            return Err(SolverError::NonFiniteState { step: 0 });
        }
        let err = precond.norm(&out.solution);
        increment_norms.push(err);
        if err <= config.newton_tol {
            let residual = assemble_residual(disc, &state, prev, params, sources, t_next);
            return Ok(NewtonOutcome {
                state,
                krylov_iters,
                increment_norms,
                residual_norm: precond.dual_norm(&residual),
            });
        }
    }
    Err(SolverError::NewtonDiverged {
        step: 0,
        time: t_next,
        iters: config.newton_max_iter,
        history: increment_norms,
    })
}

/// Per-step solver statistics.
#[derive(Debug, Clone)]
pub struct StepStats {
    pub step: usize,
    pub time: f64,
    pub newton_iters: usize,
    pub krylov_iters: Vec<usize>,
    pub energy: f64,
    pub max_abs_psi: f64,
    pub wall_seconds: f64,
}

/// Full-run statistics: energies include the initial state at index 0 of
/// `energies()`; iteration averages are plain arithmetic means over the
/// recorded events.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub initial_energy: f64,
    pub steps: Vec<StepStats>,
}

impl RunStats {
    /// Average Newton iterations per time step (N_n).
    pub fn avg_newton(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        let total: usize = self.steps.iter().map(|s| s.newton_iters).sum();
        total as f64 / self.steps.len() as f64
    }

    /// Average Krylov iterations per Newton step (N_p or N_np).
    pub fn avg_krylov(&self) -> f64 {
        let newton: usize = self.steps.iter().map(|s| s.newton_iters).sum();
        if newton == 0 {
            return 0.0;
        }
        let krylov: usize = self
            .steps
            .iter()
            .flat_map(|s| s.krylov_iters.iter())
            .sum();
        krylov as f64 / newton as f64
    }

    /// Energies of the trajectory: G(0), G(t_1), ..., G(T).
    pub fn energies(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.steps.len() + 1);
        e.push(self.initial_energy);
        e.extend(self.steps.iter().map(|s| s.energy));
        e
    }

    pub fn max_abs_psi_over_run(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.max_abs_psi)
            .fold(0.0, f64::max)
    }
}

/// Energy-monitor verdict over one completed run.
#[derive(Debug, Clone)]
pub struct EnergyVerdict {
    /// G(n+1) <= G(n) + 1e-6 G(0) at every step.
    pub decay: bool,
    pub first_violation: Option<usize>,
    /// max_n G(n) / G(0).
    pub bound_factor: f64,
}

pub fn energy_monitor(stats: &RunStats) -> EnergyVerdict {
    let energies = stats.energies();
    let g0 = energies[0];
    let slack = 1e-6 * g0.abs();
    let mut first_violation = None;
    for (n, w) in energies.windows(2).enumerate() {
        if w[1] > w[0] + slack {
            first_violation = Some(n);
            break;
        }
    }
    let max = energies.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    EnergyVerdict {
        decay: first_violation.is_none(),
        first_violation,
        bound_factor: if g0 != 0.0 { max / g0 } else { f64::INFINITY },
    }
}

/// Initial data for a run.
#[derive(Clone)]
pub struct InitialData {
    pub psi0: ComplexField,
    pub a0: VectorField,
}

/// Result of a full simulation.
pub struct SimResult {
    pub final_state: State,
    /// States captured at the requested snapshot times (time, state).
    pub snapshots: Vec<(f64, State)>,
    pub stats: RunStats,
}

/// Runs the backward-Euler/Newton time loop from projected initial data to
/// `t_final` on a uniform time grid.
pub fn run_simulation(
    disc: &Discretization,
    params: &Params,
    initial: &InitialData,
    sources: Option<&SourceTerms>,
    t_final: f64,
    config: &SolverConfig,
    snapshot_times: &[f64],
) -> Result<SimResult, SolverError> {
    config.validate()?;
    let dt = params.dt;
    let n_steps = (t_final / dt).round() as usize;
    if n_steps == 0 || (n_steps as f64 * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(SolverError::TimeGridMismatch { dt, t_final });
    }

    let precond = Preconditioner::new(disc, params)?;
    let mut state = initial_projection(disc, &initial.a0, &initial.psi0)?;
    let mut stats = RunStats {
        initial_energy: gibbs_energy(disc, &state, params, 0.0),
        steps: Vec::with_capacity(n_steps),
    };
    let mut snapshots = Vec::new();
    let snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&ts| (ts / dt).round() as usize)
        .collect();
    if snapshot_times.iter().any(|&ts| ts.abs() < 1e-12) {
        snapshots.push((0.0, state.clone()));
    }

    for n in 0..n_steps {
        let t_next = (n + 1) as f64 * dt;
        let clock = Instant::now();
        let outcome =
            newton_solve(disc, &state, params, sources, t_next, config, &precond).map_err(
                |e| match e {
                    SolverError::NewtonDiverged {
                        time,
                        iters,
                        history,
                        ..
                    } => SolverError::NewtonDiverged {
                        step: n + 1,
                        time,
                        iters,
                        history,
                    },
                    SolverError::NonFiniteState { .. } => {
                        SolverError::NonFiniteState { step: n + 1 }
                    }
                    other => other,
                },
            )?;
        state = outcome.state;
        if !state.is_finite() {
            return Err(SolverError::NonFiniteState { step: n + 1 });
        }
        stats.steps.push(StepStats {
            step: n + 1,
            time: t_next,
            newton_iters: outcome.krylov_iters.len(),
            krylov_iters: outcome.krylov_iters,
            energy: gibbs_energy(disc, &state, params, t_next),
            max_abs_psi: state.max_abs_psi(),
            wall_seconds: clock.elapsed().as_secs_f64(),
        });
        if snap_steps.contains(&(n + 1)) {
            snapshots.push((t_next, state.clone()));
        }
    }

    Ok(SimResult {
        final_state: state,
        snapshots,
        stats,
    })
}
