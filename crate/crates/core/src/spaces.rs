//! Finite-element spaces on triangle meshes: conforming P1 scalars and the
//! lowest-order second-kind Nedelec H(curl) element, plus quadrature rules.
//!
//! 2D curl conventions used throughout: for a vector field A = (A1, A2),
//! curl A = dx A2 - dy A1 (a scalar); for a scalar H, curl H = (dy H, -dx H).

use thiserror::Error;

use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("unsupported quadrature degree {0}; supported: 2, 4, 6")]
    UnsupportedDegree(usize),
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
}

/// Quadrature on the reference triangle (barycentric points, weights summing
/// to the reference area 1/2) together with a 2-point Gauss rule on [0,1] for
/// edge moments.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub edge_points: [f64; 2],
    pub edge_weights: [f64; 2],
    pub degree: usize,
}

fn sym3(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    points.push([b, a, a]);
    points.push([a, b, a]);
    points.push([a, a, b]);
    weights.extend([w, w, w]);
}

fn sym6(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[c, a, b], [c, b, a], [a, c, b], [b, c, a], [a, b, c], [b, a, c]] {
        points.push(p);
        weights.push(w);
    }
}

/// Builds a rule exact for polynomials up to `degree` on the reference
/// triangle. Supported degrees: 2, 4, 6.
pub fn make_quadrature(degree: usize) -> Result<QuadratureRule, SpaceError> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match degree {
        2 => {
            // edge midpoints
            sym3(&mut points, &mut weights, 0.5, 1.0 / 6.0);
        }
        4 => {
            sym3(
                &mut points,
                &mut weights,
                0.4459484909159649,
                0.11169079483900574,
            );
            sym3(
                &mut points,
                &mut weights,
                0.09157621350977074,
                0.054975871827660935,
            );
        }
        6 => {
            sym3(
                &mut points,
                &mut weights,
                0.06308901449150223,
                0.02542245318510341,
            );
            sym3(
                &mut points,
                &mut weights,
                0.24928674517091043,
                0.058393137863189684,
            );
            sym6(
                &mut points,
                &mut weights,
                0.053145049844816945,
                0.3103524510337844,
                0.041425537809186785,
            );
        }
        other => return Err(SpaceError::UnsupportedDegree(other)),
    }
    let g = 0.5 / 3.0_f64.sqrt();
    Ok(QuadratureRule {
        points,
        weights,
        edge_points: [0.5 - g, 0.5 + g],
        edge_weights: [0.5, 0.5],
        degree,
    })
}

/// Conforming piecewise-linear scalars; one degree of freedom per vertex.
#[derive(Debug, Clone)]
pub struct P1Space {
    dof_count: usize,
    // physical gradients of the three barycentric basis functions, per triangle
    grads: Vec<[[f64; 2]; 3]>,
}

impl P1Space {
    pub fn new(mesh: &Mesh) -> Result<Self, SpaceError> {
        let mut grads = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let c = mesh.triangle_coords(t);
            let two_a = 2.0 * mesh.triangle_area(t);
            if two_a <= 0.0 || !two_a.is_finite() {
                return Err(SpaceError::DegenerateTriangle(t));
            }
            let mut g = [[0.0; 2]; 3];
            for i in 0..3 {
                let (p1, p2) = (c[(i + 1) % 3], c[(i + 2) % 3]);
                g[i] = [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a];
            }
            grads.push(g);
        }
        Ok(P1Space {
            dof_count: mesh.n_vertices(),
            grads,
        })
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Basis values (the barycentric coordinates) and their constant physical
    /// gradients on triangle `t`.
    pub fn eval(&self, t: usize, bary: [f64; 3]) -> ([f64; 3], [[f64; 2]; 3]) {
        (bary, self.grads[t])
    }

    /// Constant physical gradients of the three basis functions on `t`.
    pub fn grads(&self, t: usize) -> [[f64; 2]; 3] {
        self.grads[t]
    }

    /// Vertex interpolation of a scalar function.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        mesh.vertices().iter().map(|v| f(v[0], v[1])).collect()
    }
}

const MONOMIALS: usize = 6;

fn monomial(b: usize, x: f64, y: f64) -> [f64; 2] {
    match b {
        0 => [1.0, 0.0],
        1 => [x, 0.0],
        2 => [y, 0.0],
        3 => [0.0, 1.0],
        4 => [0.0, x],
        _ => [0.0, y],
    }
}

/// Lowest-order second-kind Nedelec space: the local space on each triangle
/// is the full six-dimensional space of linear vector fields, with two
/// tangential moments per edge as degrees of freedom (weighted by the linear
/// Lagrange functions of the edge, in global low-to-high direction).
#[derive(Debug, Clone)]
pub struct NedelecSpace {
    dof_count: usize,
    // coeffs[t][m][j]: coefficient of monomial m in local dual basis j
    coeffs: Vec<[[f64; 6]; 6]>,
    tri_dofs: Vec<[usize; 6]>,
    curls: Vec<[f64; 6]>,
}

impl NedelecSpace {
    pub fn new(mesh: &Mesh) -> Result<Self, SpaceError> {
        let rule = make_quadrature(2).expect("degree 2 supported");
        let mut coeffs = Vec::with_capacity(mesh.n_triangles());
        let mut tri_dofs = Vec::with_capacity(mesh.n_triangles());
        let mut curls = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            if mesh.triangle_area(t) <= 0.0 {
                return Err(SpaceError::DegenerateTriangle(t));
            }
            let mut dofs = [0usize; 6];
            let mut d = [[0.0; MONOMIALS]; 6];
            for (le, (edge, _)) in mesh.tri_edges(t).into_iter().enumerate() {
                let [lo, hi] = mesh.edge(edge);
                dofs[2 * le] = 2 * edge;
                dofs[2 * le + 1] = 2 * edge + 1;
                let (pa, pb) = (mesh.vertex(lo), mesh.vertex(hi));
                let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                let tang = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
                for b in 0..MONOMIALS {
                    let mut m0 = 0.0;
                    let mut m1 = 0.0;
                    for (&s, &w) in rule.edge_points.iter().zip(&rule.edge_weights) {
                        let x = pa[0] + s * (pb[0] - pa[0]);
                        let y = pa[1] + s * (pb[1] - pa[1]);
                        let v = monomial(b, x, y);
                        let ut = v[0] * tang[0] + v[1] * tang[1];
                        m0 += w * len * ut * (1.0 - s);
                        m1 += w * len * ut * s;
                    }
                    d[2 * le][b] = m0;
                    d[2 * le + 1][b] = m1;
                }
            }
            let c = invert6(&d).ok_or(SpaceError::DegenerateTriangle(t))?;
            // curl of (A1,A2) = dx A2 - dy A1: monomial (0,x) contributes +1,
            // monomial (y,0) contributes -1
            let mut cu = [0.0; 6];
            for (j, entry) in cu.iter_mut().enumerate() {
                *entry = c[4][j] - c[2][j];
            }
            coeffs.push(c);
            tri_dofs.push(dofs);
            curls.push(cu);
        }
        Ok(NedelecSpace {
            dof_count: 2 * mesh.n_edges(),
            coeffs,
            tri_dofs,
            curls,
        })
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Global DOF indices for the six local basis functions of triangle `t`,
    /// ordered (edge0 lo-moment, edge0 hi-moment, edge1 lo, edge1 hi, ...).
    pub fn tri_dofs(&self, t: usize) -> [usize; 6] {
        self.tri_dofs[t]
    }

    /// Constant scalar curls of the six local basis fields on triangle `t`.
    pub fn curls(&self, t: usize) -> [f64; 6] {
        self.curls[t]
    }

    /// Values of the six local basis vector fields at a point of triangle `t`,
    /// plus their (constant) scalar curls.
    pub fn eval(&self, mesh: &Mesh, t: usize, bary: [f64; 3]) -> ([[f64; 2]; 6], [f64; 6]) {
        let [x, y] = mesh.point_at(t, bary);
        let c = &self.coeffs[t];
        let mut vals = [[0.0; 2]; 6];
        for (j, val) in vals.iter_mut().enumerate() {
            // expand coefficients against the monomial basis
            val[0] = c[0][j] + c[1][j] * x + c[2][j] * y;
            val[1] = c[3][j] + c[4][j] * x + c[5][j] * y;
        }
        (vals, self.curls[t])
    }

    /// Edge-moment interpolation of a vector field into the space.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let rule = make_quadrature(2).expect("degree 2 supported");
        let mut dofs = vec![0.0; self.dof_count];
        for e in 0..mesh.n_edges() {
            let [lo, hi] = mesh.edge(e);
            let (pa, pb) = (mesh.vertex(lo), mesh.vertex(hi));
            let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            let tang = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            for (&s, &w) in rule.edge_points.iter().zip(&rule.edge_weights) {
                let x = pa[0] + s * (pb[0] - pa[0]);
                let y = pa[1] + s * (pb[1] - pa[1]);
                let v = f(x, y);
                let ut = v[0] * tang[0] + v[1] * tang[1];
                m0 += w * len * ut * (1.0 - s);
                m1 += w * len * ut * s;
            }
            dofs[2 * e] = m0;
            dofs[2 * e + 1] = m1;
        }
        dofs
    }

    /// Evaluates a coefficient vector as a vector field with its curl.
    pub fn eval_function(
        &self,
        mesh: &Mesh,
        coeffs: &[f64],
        t: usize,
        bary: [f64; 3],
    ) -> ([f64; 2], f64) {
        let (vals, curls) = self.eval(mesh, t, bary);
        let dofs = self.tri_dofs[t];
        let mut v = [0.0; 2];
        let mut c = 0.0;
        for j in 0..6 {
            let a = coeffs[dofs[j]];
            v[0] += a * vals[j][0];
            v[1] += a * vals[j][1];
            c += a * curls[j];
        }
        (v, c)
    }
}

/// Inverts a 6x6 matrix by Gauss-Jordan elimination with partial pivoting.
/// Returns None when singular.
fn invert6(a: &[[f64; 6]; 6]) -> Option<[[f64; 6]; 6]> {
    let mut m = *a;
    let mut inv = [[0.0; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .expect("finite entries")
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for k in 0..6 {
            m[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..6 {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..6 {
                        m[row][k] -= f * m[col][k];
                        inv[row][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}
