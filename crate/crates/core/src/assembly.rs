//! Assembly of the real-split Ginzburg-Landau system: nonlinear residual,
//! Newton Jacobian, block-diagonal preconditioner, Gibbs free energy, initial
//! projections, and derived fields (supercurrent, magnetic induction).
//!
//! The complex order parameter is carried as two real P1 fields (psi_r,
//! psi_i); the magnetic potential lives in the lowest-order second-kind
//! Nedelec space. Unknowns are ordered (psi_r | psi_i | A) everywhere.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::krylov::{CsrMatrix, FactorizedSpd, KrylovError};
use crate::mesh::Mesh;
use crate::spaces::{make_quadrature, NedelecSpace, P1Space, QuadratureRule, SpaceError};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("parameter {name} must be strictly positive, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("state dimensions do not match the discretization")]
    DimensionMismatch,
    #[error("state contains non-finite entries")]
    NonFiniteState,
    #[error("projection solve failed: {0}")]
    Projection(#[from] KrylovError),
}

/// Sparsity pattern of the Newton Jacobian with a per-element scatter table,
/// built once per mesh: entry k of element t lands in values slot
/// `slots[144 t + k]`.
struct JacobianPattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    slots: Vec<u32>,
}

/// Mesh plus the two discrete spaces and the quadrature rules used for
/// assembly (degree 4, exact for the quartic nonlinear terms) and for norms
/// and projections (degree 6). Caches everything that is constant across
/// assemblies: basis tables at the degree-4 points and the Jacobian pattern.
pub struct Discretization {
    mesh: Mesh,
    p1: P1Space,
    nedelec: NedelecSpace,
    quad: QuadratureRule,
    quad_high: QuadratureRule,
    /// Nedelec basis values at the degree-4 quadrature points, element-major.
    ned_table: Vec<[[f64; 2]; 6]>,
    jac_pattern: JacobianPattern,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self, SpaceError> {
        let p1 = P1Space::new(&mesh)?;
        let nedelec = NedelecSpace::new(&mesh)?;
        let quad = make_quadrature(4)?;
        let quad_high = make_quadrature(6)?;

        let nq = quad.points.len();
        let mut ned_table = Vec::with_capacity(mesh.n_triangles() * nq);
        for t in 0..mesh.n_triangles() {
            for &bary in &quad.points {
                let (vals, _) = nedelec.eval(&mesh, t, bary);
                ned_table.push(vals);
            }
        }

        let jac_pattern = Self::build_jacobian_pattern(&mesh, &nedelec, p1.dof_count());
        Ok(Discretization {
            mesh,
            p1,
            nedelec,
            quad,
            quad_high,
            ned_table,
            jac_pattern,
        })
    }

    fn element_dofs(mesh: &Mesh, nedelec: &NedelecSpace, nv: usize, t: usize) -> [usize; 12] {
        let verts = mesh.triangle(t);
        let adofs = nedelec.tri_dofs(t);
        let mut gdofs = [0usize; 12];
        for i in 0..3 {
            gdofs[i] = verts[i];
            gdofs[3 + i] = nv + verts[i];
        }
        for j in 0..6 {
            gdofs[6 + j] = 2 * nv + adofs[j];
        }
        gdofs
    }

    fn build_jacobian_pattern(mesh: &Mesh, nedelec: &NedelecSpace, nv: usize) -> JacobianPattern {
        let n = 2 * nv + nedelec.dof_count();
        let n_entries = mesh.n_triangles() * 144;
        let mut entries: Vec<(u32, u32, u32)> = Vec::with_capacity(n_entries);
        for t in 0..mesh.n_triangles() {
            let gdofs = Self::element_dofs(mesh, nedelec, nv, t);
            for &r in &gdofs {
                for &c in &gdofs {
                    entries.push((r as u32, c as u32, entries.len() as u32));
                }
            }
        }
        let mut order: Vec<u32> = (0..n_entries as u32).collect();
        order.sort_unstable_by_key(|&k| {
            let e = entries[k as usize];
            (e.0, e.1, e.2)
        });
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut slots = vec![0u32; n_entries];
        let mut last: Option<(u32, u32)> = None;
        for &k in &order {
            let (r, c, orig) = entries[k as usize];
            if last != Some((r, c)) {
                col_idx.push(c as usize);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
            slots[orig as usize] = (col_idx.len() - 1) as u32;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        JacobianPattern {
            row_ptr,
            col_idx,
            slots,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn p1(&self) -> &P1Space {
        &self.p1
    }

    pub fn nedelec(&self) -> &NedelecSpace {
        &self.nedelec
    }

    pub fn n_psi_dofs(&self) -> usize {
        self.p1.dof_count()
    }

    pub fn n_a_dofs(&self) -> usize {
        self.nedelec.dof_count()
    }

    pub fn n_total_dofs(&self) -> usize {
        2 * self.n_psi_dofs() + self.n_a_dofs()
    }

    /// Start offsets of the (psi_r, psi_i, A) blocks in the flat ordering,
    /// plus the total dimension.
    pub fn block_offsets(&self) -> [usize; 4] {
        let nv = self.n_psi_dofs();
        [0, nv, 2 * nv, 2 * nv + self.n_a_dofs()]
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn quadrature_high(&self) -> &QuadratureRule {
        &self.quad_high
    }
}

/// Applied magnetic field H(x, y, t); constant in all built-in vortex runs,
/// space-time dependent for the manufactured problem.
#[derive(Clone)]
pub enum AppliedField {
    Constant(f64),
    Varying(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
}

impl AppliedField {
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            AppliedField::Constant(h) => *h,
            AppliedField::Varying(f) => f(x, y, t),
        }
    }
}

impl fmt::Debug for AppliedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppliedField::Constant(h) => write!(f, "AppliedField::Constant({h})"),
            AppliedField::Varying(_) => write!(f, "AppliedField::Varying(..)"),
        }
    }
}

/// Physical and discretization parameters of one simulation.
#[derive(Debug, Clone)]
pub struct Params {
    pub kappa: f64,
    pub sigma: f64,
    pub dt: f64,
    pub h_ext: AppliedField,
}

impl Params {
    pub fn new(kappa: f64, sigma: f64, dt: f64, h_ext: AppliedField) -> Result<Self, AssemblyError> {
        for (name, value) in [("kappa", kappa), ("sigma", sigma), ("dt", dt)] {
            if value <= 0.0 || !value.is_finite() {
                return Err(AssemblyError::InvalidParam { name, value });
            }
        }
        Ok(Params {
            kappa,
            sigma,
            dt,
            h_ext,
        })
    }
}

/// Manufactured source terms (g for the order-parameter equation split into
/// real and imaginary parts, f for the magnetic-potential equation).
#[derive(Clone)]
pub struct SourceTerms {
    g: Arc<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>,
    f: Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>,
}

impl SourceTerms {
    pub fn new(
        g: impl Fn(f64, f64, f64) -> (f64, f64) + Send + Sync + 'static,
        f: impl Fn(f64, f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        SourceTerms {
            g: Arc::new(g),
            f: Arc::new(f),
        }
    }

    pub fn g(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        (self.g)(x, y, t)
    }

    pub fn f(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        (self.f)(x, y, t)
    }
}

impl fmt::Debug for SourceTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SourceTerms(..)")
    }
}

/// Analytic scalar field with its gradient, for projections and error norms.
#[derive(Clone)]
pub struct ScalarField {
    value: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    gradient: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
}

impl ScalarField {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_, _| c, |_, _| [0.0, 0.0])
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        (self.gradient)(x, y)
    }
}

/// Complex scalar field as (real, imaginary) parts.
#[derive(Clone)]
pub struct ComplexField {
    pub re: ScalarField,
    pub im: ScalarField,
}

impl ComplexField {
    pub fn constant(re: f64, im: f64) -> Self {
        ComplexField {
            re: ScalarField::constant(re),
            im: ScalarField::constant(im),
        }
    }
}

/// Analytic vector field with its scalar curl.
#[derive(Clone)]
pub struct VectorField {
    value: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
    curl: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl VectorField {
    pub fn new(
        value: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        curl: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            value: Arc::new(value),
            curl: Arc::new(curl),
        }
    }

    pub fn constant(v: [f64; 2]) -> Self {
        VectorField::new(move |_, _| v, |_, _| 0.0)
    }

    pub fn value(&self, x: f64, y: f64) -> [f64; 2] {
        (self.value)(x, y)
    }

    pub fn curl(&self, x: f64, y: f64) -> f64 {
        (self.curl)(x, y)
    }
}

/// Discrete solution triple: coefficients of psi_r, psi_i over P1 and of the
/// magnetic potential over the Nedelec space.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub psi_r: Vec<f64>,
    pub psi_i: Vec<f64>,
    pub a: Vec<f64>,
}

impl State {
    pub fn zeros(disc: &Discretization) -> Self {
        State {
            psi_r: vec![0.0; disc.n_psi_dofs()],
            psi_i: vec![0.0; disc.n_psi_dofs()],
            a: vec![0.0; disc.n_a_dofs()],
        }
    }

    pub fn validate(&self, disc: &Discretization) -> Result<(), AssemblyError> {
        if self.psi_r.len() != disc.n_psi_dofs()
            || self.psi_i.len() != disc.n_psi_dofs()
            || self.a.len() != disc.n_a_dofs()
        {
            return Err(AssemblyError::DimensionMismatch);
        }
        let finite = self
            .psi_r
            .iter()
            .chain(&self.psi_i)
            .chain(&self.a)
            .all(|v| v.is_finite());
        if !finite {
            return Err(AssemblyError::NonFiniteState);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.psi_r
            .iter()
            .chain(&self.psi_i)
            .chain(&self.a)
            .all(|v| v.is_finite())
    }

    /// Largest |psi_h| over the vertices.
    pub fn max_abs_psi(&self) -> f64 {
        self.psi_r
            .iter()
            .zip(&self.psi_i)
            .map(|(p, q)| (p * p + q * q).sqrt())
            .fold(0.0, f64::max)
    }

    /// Flat vector in the (psi_r | psi_i | A) ordering.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.psi_r.len() + self.a.len());
        v.extend_from_slice(&self.psi_r);
        v.extend_from_slice(&self.psi_i);
        v.extend_from_slice(&self.a);
        v
    }

    pub fn from_flat(disc: &Discretization, flat: &[f64]) -> Self {
        let [_, o1, o2, o3] = disc.block_offsets();
        assert_eq!(flat.len(), o3);
        State {
            psi_r: flat[..o1].to_vec(),
            psi_i: flat[o1..o2].to_vec(),
            a: flat[o2..o3].to_vec(),
        }
    }

    /// Adds a flat increment (Newton update).
    pub fn add_flat(&mut self, w: &[f64]) {
        let nv = self.psi_r.len();
        for (i, v) in self.psi_r.iter_mut().enumerate() {
            *v += w[i];
        }
        for (i, v) in self.psi_i.iter_mut().enumerate() {
            *v += w[nv + i];
        }
        for (i, v) in self.a.iter_mut().enumerate() {
            *v += w[2 * nv + i];
        }
    }
}

/// 3x3 block sparse system for one Newton step, ordered (psi_r | psi_i | A).
#[derive(Debug)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub offsets: [usize; 4],
}

/// The three state-independent preconditioner blocks:
/// P_xi_r = P_xi_i = (1/dt) M + (1/kappa^2) K over P1,
/// P_a = (sigma/dt) M_edge + K_curl over the Nedelec space.
#[derive(Debug, Clone)]
pub struct PrecondBlocks {
    pub p_psi_r: CsrMatrix,
    pub p_psi_i: CsrMatrix,
    pub p_a: CsrMatrix,
}

/// Values of the discrete fields at one quadrature point.
#[derive(Debug, Clone, Copy)]
struct PointState {
    p: f64,
    q: f64,
    gp: [f64; 2],
    gq: [f64; 2],
    a: [f64; 2],
    curl_a: f64,
}

struct ElementData {
    verts: [usize; 3],
    adofs: [usize; 6],
    x: f64,
    y: f64,
    w: f64,
    lam: [f64; 3],
    glam: [[f64; 2]; 3],
    nval: [[f64; 2]; 6],
    ncurl: [f64; 6],
}

impl ElementData {
    fn point_state(&self, state: &State) -> PointState {
        let mut p = 0.0;
        let mut q = 0.0;
        let mut gp = [0.0; 2];
        let mut gq = [0.0; 2];
        for i in 0..3 {
            let (cr, ci) = (state.psi_r[self.verts[i]], state.psi_i[self.verts[i]]);
            p += cr * self.lam[i];
            q += ci * self.lam[i];
            gp[0] += cr * self.glam[i][0];
            gp[1] += cr * self.glam[i][1];
            gq[0] += ci * self.glam[i][0];
            gq[1] += ci * self.glam[i][1];
        }
        let mut a = [0.0; 2];
        let mut curl_a = 0.0;
        for j in 0..6 {
            let c = state.a[self.adofs[j]];
            a[0] += c * self.nval[j][0];
            a[1] += c * self.nval[j][1];
            curl_a += c * self.ncurl[j];
        }
        PointState {
            p,
            q,
            gp,
            gq,
            a,
            curl_a,
        }
    }
}

/// Visits every degree-4 quadrature point of every element with cached basis
/// data in place.
fn for_each_qp(disc: &Discretization, mut f: impl FnMut(&ElementData)) {
    let mesh = disc.mesh();
    let rule = disc.quadrature();
    let nq = rule.points.len();
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle(t);
        let adofs = disc.nedelec().tri_dofs(t);
        let jac = 2.0 * mesh.triangle_area(t);
        let glam = disc.p1().grads(t);
        let ncurl = disc.nedelec().curls(t);
        for (k, &bary) in rule.points.iter().enumerate() {
            let [x, y] = mesh.point_at(t, bary);
            f(&ElementData {
                verts,
                adofs,
                x,
                y,
                w: rule.weights[k] * jac,
                lam: bary,
                glam,
                nval: disc.ned_table[t * nq + k],
                ncurl,
            });
        }
    }
}

/// Gibbs free energy
/// ||(i/kappa) grad psi + A psi||^2 + 1/2 || |psi|^2 - 1 ||^2 + ||curl A - H||^2
/// evaluated with degree-4 quadrature (H sampled at time `t`).
pub fn gibbs_energy(disc: &Discretization, state: &State, params: &Params, t: f64) -> f64 {
    let inv_k = 1.0 / params.kappa;
    let mut total = 0.0;
    for_each_qp(disc, |e| {
        let s = e.point_state(state);
        // (i/kappa) grad psi + A psi split into real and imaginary parts
        let re = [
            -inv_k * s.gq[0] + s.a[0] * s.p,
            -inv_k * s.gq[1] + s.a[1] * s.p,
        ];
        let im = [
            inv_k * s.gp[0] + s.a[0] * s.q,
            inv_k * s.gp[1] + s.a[1] * s.q,
        ];
        let kinetic = re[0] * re[0] + re[1] * re[1] + im[0] * im[0] + im[1] * im[1];
        let dens = s.p * s.p + s.q * s.q - 1.0;
        let field = s.curl_a - params.h_ext.eval(e.x, e.y, t);
        total += e.w * (kinetic + 0.5 * dens * dens + field * field);
    });
    total
}

/// Newton right-hand side: for every test function, the backward-Euler data
/// terms (previous state, applied field, sources at `t_next`) minus the
/// nonlinear forms G_r + G_i + G_A evaluated at `state`. Zero exactly when
/// `state` solves the time step.
pub fn assemble_residual(
    disc: &Discretization,
    state: &State,
    prev: &State,
    params: &Params,
    sources: Option<&SourceTerms>,
    t_next: f64,
) -> Vec<f64> {
    let nv = disc.n_psi_dofs();
    let inv_k = 1.0 / params.kappa;
    let inv_k2 = inv_k * inv_k;
    let inv_dt = 1.0 / params.dt;
    let sigma = params.sigma;
    let mut r = vec![0.0; disc.n_total_dofs()];
    for_each_qp(disc, |e| {
        let s = e.point_state(state);
        let sp = e.point_state(prev);
        let h = params.h_ext.eval(e.x, e.y, t_next);
        let (gsrc_r, gsrc_i, fsrc) = match sources {
            Some(src) => {
                let (gr, gi) = src.g(e.x, e.y, t_next);
                (gr, gi, src.f(e.x, e.y, t_next))
            }
            None => (0.0, 0.0, [0.0, 0.0]),
        };
        let asq = s.a[0] * s.a[0] + s.a[1] * s.a[1];
        let dens = s.p * s.p + s.q * s.q;
        let a_dot_gq = s.a[0] * s.gq[0] + s.a[1] * s.gq[1];
        let a_dot_gp = s.a[0] * s.gp[0] + s.a[1] * s.gp[1];
        for i in 0..3 {
            let li = e.lam[i];
            let gli = e.glam[i];
            let a_dot_gli = s.a[0] * gli[0] + s.a[1] * gli[1];
            // G_r(state; lambda_i)
            let g_r = inv_dt * s.p * li
                + inv_k2 * (s.gp[0] * gli[0] + s.gp[1] * gli[1])
                + asq * s.p * li
                + (dens - 1.0) * s.p * li
                - inv_k * a_dot_gq * li
                + inv_k * s.q * a_dot_gli;
            // G_i(state; lambda_i)
            let g_i = inv_dt * s.q * li
                + inv_k2 * (s.gq[0] * gli[0] + s.gq[1] * gli[1])
                + asq * s.q * li
                + (dens - 1.0) * s.q * li
                + inv_k * a_dot_gp * li
                - inv_k * s.p * a_dot_gli;
            r[e.verts[i]] += e.w * (inv_dt * sp.p * li + gsrc_r * li - g_r);
            r[nv + e.verts[i]] += e.w * (inv_dt * sp.q * li + gsrc_i * li - g_i);
        }
        for j in 0..6 {
            let nj = e.nval[j];
            let cj = e.ncurl[j];
            let a_dot_nj = s.a[0] * nj[0] + s.a[1] * nj[1];
            let supercurrent_term =
                inv_k * ((s.p * s.gq[0] - s.q * s.gp[0]) * nj[0] + (s.p * s.gq[1] - s.q * s.gp[1]) * nj[1]);
            // G_A(state; N_j)
            let g_a = sigma * inv_dt * a_dot_nj + s.curl_a * cj + dens * a_dot_nj
                - supercurrent_term;
            let prev_term = sigma * inv_dt * (sp.a[0] * nj[0] + sp.a[1] * nj[1]);
            let forcing = h * cj + fsrc[0] * nj[0] + fsrc[1] * nj[1];
            r[2 * nv + e.adofs[j]] += e.w * (prev_term + forcing - g_a);
        }
    });
    r
}

/// Newton Jacobian: the linearization of G_r, G_i, G_A at `state`, with rows
/// and columns ordered (psi_r | psi_i | A). Contributions are accumulated
/// into a dense 12x12 element matrix (local ordering psi_r 0..3, psi_i 3..6,
/// A 6..12) and scattered through the precomputed pattern.
pub fn assemble_jacobian(disc: &Discretization, state: &State, params: &Params) -> CsrMatrix {
    let n = disc.n_total_dofs();
    let inv_k = 1.0 / params.kappa;
    let inv_k2 = inv_k * inv_k;
    let inv_dt = 1.0 / params.dt;
    let sigma = params.sigma;
    let mesh = disc.mesh();
    let rule = disc.quadrature();
    let nq = rule.points.len();
    let pattern = &disc.jac_pattern;
    let mut values = vec![0.0f64; pattern.col_idx.len()];
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle(t);
        let adofs = disc.nedelec().tri_dofs(t);
        let jac = 2.0 * mesh.triangle_area(t);
        let glam = disc.p1().grads(t);
        let ncurl = disc.nedelec().curls(t);
        let mut local = [[0.0f64; 12]; 12];
        for (k, &bary) in rule.points.iter().enumerate() {
            let w = rule.weights[k] * jac;
            let lam = bary;
            let nval = disc.ned_table[t * nq + k];
            let e = ElementData {
                verts,
                adofs,
                x: 0.0,
                y: 0.0,
                w,
                lam,
                glam,
                nval,
                ncurl,
            };
            let s = e.point_state(state);
            let asq = s.a[0] * s.a[0] + s.a[1] * s.a[1];
            let psq = s.p * s.p;
            let qsq = s.q * s.q;
            // coefficient fields of the linearized system
            let react_r = asq + 3.0 * psq + qsq - 1.0;
            let react_i = asq + psq + 3.0 * qsq - 1.0;
            let cross = 2.0 * s.p * s.q;
            // 2 psi_r A - (1/kappa) grad psi_i and 2 psi_i A + (1/kappa) grad psi_r
            let vr = [
                2.0 * s.p * s.a[0] - inv_k * s.gq[0],
                2.0 * s.p * s.a[1] - inv_k * s.gq[1],
            ];
            let vi = [
                2.0 * s.q * s.a[0] + inv_k * s.gp[0],
                2.0 * s.q * s.a[1] + inv_k * s.gp[1],
            ];
            for i in 0..3 {
                let li = lam[i];
                let gli = glam[i];
                let a_dot_gli = s.a[0] * gli[0] + s.a[1] * gli[1];
                for j in 0..3 {
                    let lj = lam[j];
                    let glj = glam[j];
                    let grad_dot = gli[0] * glj[0] + gli[1] * glj[1];
                    let a_dot_glj = s.a[0] * glj[0] + s.a[1] * glj[1];
                    let diag = inv_dt * lj * li + inv_k2 * grad_dot;
                    // a_L1: (xi_r, psi_r) and (xi_i, psi_r) couplings
                    local[i][j] += w * (diag + react_r * lj * li);
                    local[i][3 + j] +=
                        w * (-inv_k * a_dot_glj * li + inv_k * lj * a_dot_gli + cross * lj * li);
                    // a_L2: (xi_i, psi_i) and (xi_r, psi_i) couplings
                    local[3 + i][3 + j] += w * (diag + react_i * lj * li);
                    local[3 + i][j] +=
                        w * (inv_k * a_dot_glj * li - inv_k * lj * a_dot_gli + cross * lj * li);
                }
                for j in 0..6 {
                    let nj = nval[j];
                    let nj_dot_gli = nj[0] * gli[0] + nj[1] * gli[1];
                    // a_L1 / a_L2: B couplings into the psi rows
                    let b_to_r = (vr[0] * nj[0] + vr[1] * nj[1]) * li + inv_k * s.q * nj_dot_gli;
                    let b_to_i = (vi[0] * nj[0] + vi[1] * nj[1]) * li - inv_k * s.p * nj_dot_gli;
                    local[i][6 + j] += w * b_to_r;
                    local[3 + i][6 + j] += w * b_to_i;
                    // a_L3: xi_r, xi_i couplings into the A rows
                    local[6 + j][i] += w * b_to_r;
                    local[6 + j][3 + i] += w * b_to_i;
                }
            }
            let dens = psq + qsq;
            for i in 0..6 {
                let ni = nval[i];
                let ci = ncurl[i];
                for j in 0..6 {
                    let nj = nval[j];
                    let n_dot = ni[0] * nj[0] + ni[1] * nj[1];
                    local[6 + i][6 + j] +=
                        w * (sigma * inv_dt * n_dot + ci * ncurl[j] + dens * n_dot);
                }
            }
        }
        let base = 144 * t;
        for (i, row) in local.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                values[pattern.slots[base + 12 * i + j] as usize] += v;
            }
        }
    }
    CsrMatrix::from_parts(
        n,
        n,
        pattern.row_ptr.clone(),
        pattern.col_idx.clone(),
        values,
    )
}

/// Assembles the Jacobian and residual of one Newton step as a block system.
pub fn assemble_block_system(
    disc: &Discretization,
    state: &State,
    prev: &State,
    params: &Params,
    sources: Option<&SourceTerms>,
    t_next: f64,
) -> BlockSystem {
    BlockSystem {
        matrix: assemble_jacobian(disc, state, params),
        rhs: assemble_residual(disc, state, prev, params, sources, t_next),
        offsets: disc.block_offsets(),
    }
}

/// mass_coef * (u, v) + stiff_coef * (grad u, grad v) over the P1 space.
pub fn assemble_p1_matrix(disc: &Discretization, mass_coef: f64, stiff_coef: f64) -> CsrMatrix {
    let nv = disc.n_psi_dofs();
    let mesh = disc.mesh();
    let rule = disc.quadrature();
    let mut trips = Vec::with_capacity(mesh.n_triangles() * 9);
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle(t);
        let jac = 2.0 * mesh.triangle_area(t);
        let mut local = [[0.0f64; 3]; 3];
        for (k, &bary) in rule.points.iter().enumerate() {
            let w = rule.weights[k] * jac;
            let (lam, glam) = disc.p1().eval(t, bary);
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += w
                        * (mass_coef * lam[i] * lam[j]
                            + stiff_coef
                                * (glam[i][0] * glam[j][0] + glam[i][1] * glam[j][1]));
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                trips.push((verts[i], verts[j], local[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(nv, nv, &trips)
}

/// mass_coef * (u, v) + curl_coef * (curl u, curl v) over the Nedelec space.
pub fn assemble_nedelec_matrix(disc: &Discretization, mass_coef: f64, curl_coef: f64) -> CsrMatrix {
    let na = disc.n_a_dofs();
    let mesh = disc.mesh();
    let rule = disc.quadrature();
    let mut trips = Vec::with_capacity(mesh.n_triangles() * 36);
    for t in 0..mesh.n_triangles() {
        let adofs = disc.nedelec().tri_dofs(t);
        let jac = 2.0 * mesh.triangle_area(t);
        let mut local = [[0.0f64; 6]; 6];
        for (k, &bary) in rule.points.iter().enumerate() {
            let w = rule.weights[k] * jac;
            let (nval, ncurl) = disc.nedelec().eval(mesh, t, bary);
            for i in 0..6 {
                for j in 0..6 {
                    local[i][j] += w
                        * (mass_coef * (nval[i][0] * nval[j][0] + nval[i][1] * nval[j][1])
                            + curl_coef * ncurl[i] * ncurl[j]);
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                trips.push((adofs[i], adofs[j], local[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(na, na, &trips)
}

/// The three state-independent SPD preconditioner blocks.
pub fn assemble_preconditioner_blocks(disc: &Discretization, params: &Params) -> PrecondBlocks {
    let inv_dt = 1.0 / params.dt;
    let scalar = assemble_p1_matrix(disc, inv_dt, 1.0 / (params.kappa * params.kappa));
    let p_a = assemble_nedelec_matrix(disc, params.sigma * inv_dt, 1.0);
    PrecondBlocks {
        p_psi_i: scalar.clone(),
        p_psi_r: scalar,
        p_a,
    }
}

/// Projects initial data into the discrete spaces: an H(curl) projection for
/// the magnetic potential and H1 projections for the two parts of the order
/// parameter (degree-6 quadrature on the right-hand sides).
pub fn initial_projection(
    disc: &Discretization,
    a0: &VectorField,
    psi0: &ComplexField,
) -> Result<State, AssemblyError> {
    let nv = disc.n_psi_dofs();
    let na = disc.n_a_dofs();
    let mut rhs_r = vec![0.0; nv];
    let mut rhs_i = vec![0.0; nv];
    let mut rhs_a = vec![0.0; na];
    let mesh = disc.mesh();
    let rule = disc.quadrature_high();
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle(t);
        let adofs = disc.nedelec().tri_dofs(t);
        let jac = 2.0 * mesh.triangle_area(t);
        let glam = disc.p1().grads(t);
        for (k, &bary) in rule.points.iter().enumerate() {
            let w = rule.weights[k] * jac;
            let [x, y] = mesh.point_at(t, bary);
            let (nval, ncurl) = disc.nedelec().eval(mesh, t, bary);
            let pr = psi0.re.value(x, y);
            let pi = psi0.im.value(x, y);
            let gr = psi0.re.gradient(x, y);
            let gi = psi0.im.gradient(x, y);
            for i in 0..3 {
                rhs_r[verts[i]] +=
                    w * (pr * bary[i] + gr[0] * glam[i][0] + gr[1] * glam[i][1]);
                rhs_i[verts[i]] +=
                    w * (pi * bary[i] + gi[0] * glam[i][0] + gi[1] * glam[i][1]);
            }
            let av = a0.value(x, y);
            let ac = a0.curl(x, y);
            for j in 0..6 {
                rhs_a[adofs[j]] +=
                    w * (av[0] * nval[j][0] + av[1] * nval[j][1] + ac * ncurl[j]);
            }
        }
    }
    let scalar = FactorizedSpd::new(&assemble_p1_matrix(disc, 1.0, 1.0))?;
    let vector = FactorizedSpd::new(&assemble_nedelec_matrix(disc, 1.0, 1.0))?;
    Ok(State {
        psi_r: scalar.solve(&rhs_r),
        psi_i: scalar.solve(&rhs_i),
        a: vector.solve(&rhs_a),
    })
}

/// Supercurrent j_s = (1/kappa)(psi_r grad psi_i - psi_i grad psi_r) - |psi|^2 A
/// at one point of a triangle.
pub fn supercurrent_at(
    disc: &Discretization,
    state: &State,
    params: &Params,
    t: usize,
    bary: [f64; 3],
) -> [f64; 2] {
    let mesh = disc.mesh();
    let verts = mesh.triangle(t);
    let (lam, glam) = disc.p1().eval(t, bary);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut gp = [0.0; 2];
    let mut gq = [0.0; 2];
    for i in 0..3 {
        let (cr, ci) = (state.psi_r[verts[i]], state.psi_i[verts[i]]);
        p += cr * lam[i];
        q += ci * lam[i];
        gp[0] += cr * glam[i][0];
        gp[1] += cr * glam[i][1];
        gq[0] += ci * glam[i][0];
        gq[1] += ci * glam[i][1];
    }
    let (a, _) = disc.nedelec().eval_function(mesh, &state.a, t, bary);
    let inv_k = 1.0 / params.kappa;
    let dens = p * p + q * q;
    [
        inv_k * (p * gq[0] - q * gp[0]) - dens * a[0],
        inv_k * (p * gq[1] - q * gp[1]) - dens * a[1],
    ]
}

/// Supercurrent sampled at every quadrature point of every element
/// (degree-4 rule, element-major order).
pub fn supercurrent(disc: &Discretization, state: &State, params: &Params) -> Vec<[f64; 2]> {
    let rule = disc.quadrature();
    let mut out = Vec::with_capacity(disc.mesh().n_triangles() * rule.points.len());
    for t in 0..disc.mesh().n_triangles() {
        for &bary in &rule.points {
            out.push(supercurrent_at(disc, state, params, t, bary));
        }
    }
    out
}

/// Area-averaged supercurrent per element, for cell data output.
pub fn supercurrent_element_avg(
    disc: &Discretization,
    state: &State,
    params: &Params,
) -> Vec<[f64; 2]> {
    let rule = disc.quadrature();
    let wsum: f64 = rule.weights.iter().sum();
    let mut out = Vec::with_capacity(disc.mesh().n_triangles());
    for t in 0..disc.mesh().n_triangles() {
        let mut acc = [0.0; 2];
        for (k, &bary) in rule.points.iter().enumerate() {
            let j = supercurrent_at(disc, state, params, t, bary);
            acc[0] += rule.weights[k] * j[0];
            acc[1] += rule.weights[k] * j[1];
        }
        out.push([acc[0] / wsum, acc[1] / wsum]);
    }
    out
}

/// Magnetic induction curl A_h, constant on each element.
pub fn curl_field(disc: &Discretization, state: &State) -> Vec<f64> {
    let mesh = disc.mesh();
    (0..mesh.n_triangles())
        .map(|t| {
            let (_, curl) = disc
                .nedelec()
                .eval_function(mesh, &state.a, t, [1.0 / 3.0; 3]);
            curl
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_square_disc(m: usize) -> Discretization {
        Discretization::new(Mesh::unit_square(m).unwrap()).unwrap()
    }

    fn const_params(dt: f64, kappa: f64, h: f64) -> Params {
        Params::new(kappa, 1.0, dt, AppliedField::Constant(h)).unwrap()
    }

    fn random_state(disc: &Discretization, rng: &mut impl Rng, scale: f64) -> State {
        let mesh = disc.mesh();
        let mut s = State::zeros(disc);
        for v in s.psi_r.iter_mut().chain(s.psi_i.iter_mut()) {
            *v = rng.gen_range(-scale..scale);
        }
        for e in 0..mesh.n_edges() {
            let len = mesh.edge_length(e);
            s.a[2 * e] = rng.gen_range(-scale..scale) * len;
            s.a[2 * e + 1] = rng.gen_range(-scale..scale) * len;
        }
        s
    }

    #[test]
    fn params_reject_nonpositive() {
        assert!(Params::new(0.0, 1.0, 1.0, AppliedField::Constant(0.0)).is_err());
        assert!(Params::new(1.0, -1.0, 1.0, AppliedField::Constant(0.0)).is_err());
        assert!(Params::new(1.0, 1.0, 0.0, AppliedField::Constant(0.0)).is_err());
    }

    #[test]
    fn gibbs_energy_of_uniform_states() {
        let disc = unit_square_disc(4);
        let params = const_params(0.1, 1.0, 5.0);
        // psi = 1, A = 0: only the field term survives
        let mut state = State::zeros(&disc);
        state.psi_r.iter_mut().for_each(|v| *v = 1.0);
        assert_abs_diff_eq!(gibbs_energy(&disc, &state, &params, 0.0), 25.0, epsilon = 1e-12);
        // psi = 0, A = 0: 1/2 * 1 + 25
        let state = State::zeros(&disc);
        assert_abs_diff_eq!(gibbs_energy(&disc, &state, &params, 0.0), 25.5, epsilon = 1e-12);
    }

    #[test]
    fn residual_vanishes_at_stationary_states() {
        let disc = unit_square_disc(3);
        let params = const_params(0.25, 2.0, 0.0);
        // zero state
        let zero = State::zeros(&disc);
        let r = assemble_residual(&disc, &zero, &zero, &params, None, 0.25);
        assert!(r.iter().all(|v| v.abs() < 1e-14));
        // psi = 1, A = 0
        let mut one = State::zeros(&disc);
        one.psi_r.iter_mut().for_each(|v| *v = 1.0);
        let r = assemble_residual(&disc, &one, &one, &params, None, 0.25);
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-13, "residual {worst}");
    }

    #[test]
    fn jacobian_at_zero_state_has_decoupled_blocks() {
        let disc = unit_square_disc(2);
        let params = const_params(0.5, 2.0, 0.0);
        let jac = assemble_jacobian(&disc, &State::zeros(&disc), &params);
        let nv = disc.n_psi_dofs();
        let [_, _, o2, o3] = disc.block_offsets();
        // coupling blocks vanish
        for r in 0..nv {
            for c in 0..nv {
                assert_eq!(jac.get(r, nv + c), 0.0);
                assert_eq!(jac.get(nv + r, c), 0.0);
            }
            for c in o2..o3 {
                assert_eq!(jac.get(r, c), 0.0);
                assert_eq!(jac.get(c, r), 0.0);
            }
        }
        // scalar diagonal blocks reduce to (1/dt) M + kappa^-2 K - M
        let expected = assemble_p1_matrix(&disc, 1.0 / params.dt - 1.0, 1.0 / (params.kappa * params.kappa));
        for r in 0..nv {
            for c in 0..nv {
                assert_abs_diff_eq!(jac.get(r, c), expected.get(r, c), epsilon = 1e-13);
                assert_abs_diff_eq!(jac.get(nv + r, nv + c), expected.get(r, c), epsilon = 1e-13);
            }
        }
        // A block reduces to (sigma/dt) M_e + K_curl
        let expected_a = assemble_nedelec_matrix(&disc, params.sigma / params.dt, 1.0);
        for r in 0..disc.n_a_dofs() {
            let (cols, vals) = expected_a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                assert_abs_diff_eq!(jac.get(o2 + r, o2 + c), v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let disc = unit_square_disc(3);
        let params = const_params(0.2, 1.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let prev = State::zeros(&disc);
        for trial in 0..10 {
            let state = random_state(&disc, &mut rng, 0.8);
            let dir = random_state(&disc, &mut rng, 1.0);
            let jac = assemble_jacobian(&disc, &state, &params);
            let w = dir.to_flat();
            let mut jw = vec![0.0; w.len()];
            jac.matvec(&w, &mut jw);

            let sup = state
                .to_flat()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let eps = 1e-6 * (1.0 + sup);
            let mut plus = state.clone();
            let scaled: Vec<f64> = w.iter().map(|v| v * eps).collect();
            plus.add_flat(&scaled);
            let mut minus = state.clone();
            let neg: Vec<f64> = w.iter().map(|v| -v * eps).collect();
            minus.add_flat(&neg);
            // residual = data - G, so the directional derivative of G is
            // -(residual(u+) - residual(u-)) / (2 eps)
            let rp = assemble_residual(&disc, &plus, &prev, &params, None, 0.2);
            let rm = assemble_residual(&disc, &minus, &prev, &params, None, 0.2);
            let fd: Vec<f64> = rp
                .iter()
                .zip(&rm)
                .map(|(a, b)| -(a - b) / (2.0 * eps))
                .collect();
            let norm_fd = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = jw
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(
                err <= 1e-6 * norm_fd.max(1e-12),
                "trial {trial}: relative error {}",
                err / norm_fd
            );
        }
    }

    #[test]
    fn jacobian_is_positive_for_small_time_steps() {
        let disc = unit_square_disc(3);
        let params = const_params(1e-3, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let state = random_state(&disc, &mut rng, 1.0);
        let jac = assemble_jacobian(&disc, &state, &params);
        for _ in 0..100 {
            let w = random_state(&disc, &mut rng, 1.0).to_flat();
            let mut jw = vec![0.0; w.len()];
            jac.matvec(&w, &mut jw);
            let quad: f64 = w.iter().zip(&jw).map(|(a, b)| a * b).sum();
            assert!(quad > 0.0, "w^T J w = {quad}");
        }
    }

    #[test]
    fn jacobian_pattern_is_symmetric() {
        let disc = unit_square_disc(3);
        let params = const_params(0.125, 2.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = random_state(&disc, &mut rng, 0.5);
        let jac = assemble_jacobian(&disc, &state, &params);
        assert!(jac.is_pattern_symmetric());
    }

    #[test]
    fn preconditioner_blocks_are_state_independent_and_spd() {
        let disc = unit_square_disc(4);
        for dt in [1.0, 1e-2, 1e-4] {
            let params = const_params(dt, 2.0, 5.0);
            let blocks = assemble_preconditioner_blocks(&disc, &params);
            // scalar blocks bit-identical
            assert_eq!(blocks.p_psi_r.nnz(), blocks.p_psi_i.nnz());
            for r in 0..disc.n_psi_dofs() {
                let (ca, va) = blocks.p_psi_r.row(r);
                let (cb, vb) = blocks.p_psi_i.row(r);
                assert_eq!(ca, cb);
                assert_eq!(va, vb);
            }
            // symmetric and positive definite
            assert!(blocks.p_psi_r.symmetry_defect() < 1e-12);
            assert!(blocks.p_a.symmetry_defect() < 1e-12);
            FactorizedSpd::new(&blocks.p_psi_r).unwrap();
            FactorizedSpd::new(&blocks.p_psi_i).unwrap();
            FactorizedSpd::new(&blocks.p_a).unwrap();
        }
    }

    #[test]
    fn p1_element_mass_matrix_closed_form() {
        // on a single triangle: diagonal A/6, off-diagonal A/12
        let mesh = Mesh::from_triangles(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let area = mesh.triangle_area(0);
        let disc = Discretization::new(mesh).unwrap();
        let mass = assemble_p1_matrix(&disc, 1.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { area / 6.0 } else { area / 12.0 };
                assert_abs_diff_eq!(mass.get(i, j), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projection_reproduces_constants_and_linears() {
        let disc = unit_square_disc(4);
        let state = initial_projection(
            &disc,
            &VectorField::constant([0.0, 0.0]),
            &ComplexField::constant(0.6, 0.8),
        )
        .unwrap();
        for v in &state.psi_r {
            assert_abs_diff_eq!(*v, 0.6, epsilon = 1e-10);
        }
        for v in &state.psi_i {
            assert_abs_diff_eq!(*v, 0.8, epsilon = 1e-10);
        }
        for v in &state.a {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        // a rotation field lies in the Nedelec space: projection = interpolant
        let rot = VectorField::new(|x, y| [-y, x], |_, _| 2.0);
        let state = initial_projection(&disc, &rot, &ComplexField::constant(0.0, 0.0)).unwrap();
        let interp = disc.nedelec().interpolate(disc.mesh(), |x, y| [-y, x]);
        for (a, b) in state.a.iter().zip(&interp) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn supercurrent_uniform_cases() {
        let disc = unit_square_disc(3);
        let params = const_params(0.1, 1.0, 0.0);
        // psi = 1, A = 0
        let mut state = State::zeros(&disc);
        state.psi_r.iter_mut().for_each(|v| *v = 1.0);
        for j in supercurrent(&disc, &state, &params) {
            assert_abs_diff_eq!(j[0], 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(j[1], 0.0, epsilon = 1e-13);
        }
        // psi = 1, A = (1, 0): j_s = -A
        state.a = disc.nedelec().interpolate(disc.mesh(), |_, _| [1.0, 0.0]);
        for j in supercurrent(&disc, &state, &params) {
            assert_abs_diff_eq!(j[0], -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(j[1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn supercurrent_matches_complex_arithmetic_oracle() {
        let disc = unit_square_disc(3);
        let params = const_params(0.1, 2.5, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = random_state(&disc, &mut rng, 1.0);
        let mesh = disc.mesh();
        for t in (0..mesh.n_triangles()).step_by(3) {
            let bary = [0.3, 0.45, 0.25];
            let js = supercurrent_at(&disc, &state, &params, t, bary);
            // oracle: -Re[psi^* ((i/kappa) grad + A) psi] in complex arithmetic
            let verts = mesh.triangle(t);
            let (lam, glam) = disc.p1().eval(t, bary);
            let (mut re, mut im) = (0.0, 0.0);
            let (mut gre, mut gim) = ([0.0; 2], [0.0; 2]);
            for i in 0..3 {
                re += state.psi_r[verts[i]] * lam[i];
                im += state.psi_i[verts[i]] * lam[i];
                for d in 0..2 {
                    gre[d] += state.psi_r[verts[i]] * glam[i][d];
                    gim[d] += state.psi_i[verts[i]] * glam[i][d];
                }
            }
            let (a, _) = disc.nedelec().eval_function(mesh, &state.a, t, bary);
            let inv_k = 1.0 / params.kappa;
            for d in 0..2 {
                // ((i/kappa) d + A) psi, complex components
                let op_re = -inv_k * gim[d] + a[d] * re;
                let op_im = inv_k * gre[d] + a[d] * im;
                // -Re[conj(psi) * op]
                let oracle = -(re * op_re + im * op_im);
                assert_abs_diff_eq!(js[d], oracle, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn curl_field_of_interpolants() {
        let disc = unit_square_disc(4);
        let mut state = State::zeros(&disc);
        state.a = disc.nedelec().interpolate(disc.mesh(), |x, y| [-y, x]);
        for c in curl_field(&disc, &state) {
            assert_abs_diff_eq!(c, 2.0, epsilon = 1e-12);
        }
        state.a = disc.nedelec().interpolate(disc.mesh(), |_, _| [3.0, -1.0]);
        for c in curl_field(&disc, &state) {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn curl_integral_matches_boundary_circulation() {
        // Stokes: integral of curl A_h = circulation of A_h along the boundary.
        // The two edge moments of an edge sum to its tangential line integral.
        let disc = Discretization::new(Mesh::l_shape(4).unwrap()).unwrap();
        let mesh = disc.mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = random_state(&disc, &mut rng, 1.0);
        let curls = curl_field(&disc, &state);
        let integral: f64 = (0..mesh.n_triangles())
            .map(|t| mesh.triangle_area(t) * curls[t])
            .sum();
        let mut circulation = 0.0;
        for t in 0..mesh.n_triangles() {
            for (e, sign) in mesh.tri_edges(t) {
                if mesh.is_boundary_edge(e) {
                    circulation +=
                        sign as f64 * (state.a[2 * e] + state.a[2 * e + 1]);
                }
            }
        }
        assert_abs_diff_eq!(integral, circulation, epsilon = 1e-10);
    }

    #[test]
    fn state_flat_roundtrip() {
        let disc = unit_square_disc(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let state = random_state(&disc, &mut rng, 1.0);
        let flat = state.to_flat();
        let back = State::from_flat(&disc, &flat);
        assert_eq!(state, back);
    }
}
