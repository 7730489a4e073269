//! Sparse linear algebra: compressed-row matrices, right-preconditioned
//! GMRES, and a profile Cholesky factorization (with reverse Cuthill-McKee
//! reordering) for the symmetric positive-definite preconditioner blocks.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: operator dim {op}, vector length {vec}")]
    DimensionMismatch { op: usize, vec: usize },
}

/// Square or rectangular sparse matrix in compressed-row layout. Column
/// indices are sorted and unique within each row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        // stable sort keeps duplicate contributions in insertion order, so
        // accumulation is deterministic and structurally symmetric input
        // yields bitwise-symmetric sums
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a CSR matrix from an already-compressed structure.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_ptr.len(), rows + 1);
        assert_eq!(*row_ptr.last().unwrap(), col_idx.len());
        assert_eq!(col_idx.len(), values.len());
        CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    /// Entry accessor by binary search; zero when absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for r in 0..self.rows {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// x^T A x without forming A x separately.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut total = 0.0;
        for r in 0..self.rows {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            total += x[r] * acc;
        }
        total
    }

    pub fn is_pattern_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            let (cols, _) = self.row(r);
            for &c in cols {
                let (cc, _) = self.row(c);
                if cc.binary_search(&r).is_err() {
                    return false;
                }
            }
        }
        true
    }

    /// max |A - A^T| over all entries, for symmetry checks.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

/// Anything that can act on a vector: assembled matrices, factorizations used
/// as preconditioners, matrix-free operators in tests.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

#[derive(Debug, Clone)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            rel_tol: 1e-8,
            max_iter: 500,
            restart: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual estimates after each Arnoldi step; non-increasing.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Arnoldi breakdown: the solution is exact in the current subspace.
    pub breakdown: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned GMRES: solves A M^{-1} y = b, x = M^{-1} y, so the
/// iteration tracks the true unpreconditioned residual b - A x.
pub fn gmres(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    opts: &GmresOptions,
) -> GmresOutcome {
    let n = b.len();
    assert_eq!(a.dim(), n, "operator/rhs dimension mismatch");
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    if b_norm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            residual_history: history,
            converged: true,
            breakdown: false,
        };
    }

    let apply_m = |v: &[f64], out: &mut Vec<f64>| match precond {
        Some(m) => {
            out.resize(n, 0.0);
            m.apply(v, out);
        }
        None => {
            out.clear();
            out.extend_from_slice(v);
        }
    };

    let cycle_len = opts.restart.unwrap_or(opts.max_iter).max(1);
    let mut total_iters = 0usize;
    let mut converged = false;
    let mut breakdown = false;
    let mut work = vec![0.0; n];

    'outer: while total_iters < opts.max_iter {
        // residual of the current iterate
        a.apply(&x, &mut work);
        let mut r: Vec<f64> = b.iter().zip(&work).map(|(bi, axi)| bi - axi).collect();
        let beta = norm(&r);
        if beta / b_norm <= opts.rel_tol {
            converged = true;
            break;
        }
        for v in r.iter_mut() {
            *v /= beta;
        }
        let mut basis: Vec<Vec<f64>> = vec![r];
        let mut h_cols: Vec<Vec<f64>> = Vec::new(); // Hessenberg columns after Givens
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];

        let m = cycle_len.min(opts.max_iter - total_iters);
        let mut j_done = 0;
        for j in 0..m {
            let mut z = Vec::new();
            apply_m(&basis[j], &mut z);
            let mut w = vec![0.0; n];
            a.apply(&z, &mut w);
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(&w, v);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= h[i] * vk;
                }
            }
            let wn = norm(&w);
            h[j + 1] = wn;
            total_iters += 1;
            j_done = j + 1;

            // apply accumulated Givens rotations to the new column
            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let t = c * h[i] + s * h[i + 1];
                h[i + 1] = -s * h[i] + c * h[i + 1];
                h[i] = t;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            let t = c * h[j] + s * h[j + 1];
            h[j] = t;
            h[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            let res_est = g[j + 1].abs() / b_norm;
            history.push(res_est);

            let happy = wn <= 1e-14 * beta;
            if happy {
                breakdown = true;
            }
            h_cols.push(h);
            if !happy {
                for v in w.iter_mut() {
                    *v /= wn;
                }
                basis.push(w);
            }
            if res_est <= opts.rel_tol || happy {
                update_solution(&mut x, &basis, &h_cols, &g, j_done, &apply_m);
                a.apply(&x, &mut work);
                let true_res: f64 = b
                    .iter()
                    .zip(&work)
                    .map(|(bi, axi)| (bi - axi) * (bi - axi))
                    .sum::<f64>()
                    .sqrt()
                    / b_norm;
                converged = true_res <= opts.rel_tol || happy;
                break 'outer;
            }
            if total_iters >= opts.max_iter {
                break;
            }
        }
        // restart (or out of budget): fold the best iterate into x
        if j_done > 0 {
            update_solution(&mut x, &basis, &h_cols, &g, j_done, &apply_m);
        }
        if opts.restart.is_none() {
            break;
        }
    }

    GmresOutcome {
        solution: x,
        iterations: total_iters,
        residual_history: history,
        converged,
        breakdown,
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

fn update_solution(
    x: &mut [f64],
    basis: &[Vec<f64>],
    h_cols: &[Vec<f64>],
    g: &[f64],
    k: usize,
    apply_m: &impl Fn(&[f64], &mut Vec<f64>),
) {
    // back substitution on the k x k upper-triangular system
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut v = g[i];
        for j in i + 1..k {
            v -= h_cols[j][i] * y[j];
        }
        y[i] = v / h_cols[i][i];
    }
    let n = x.len();
    let mut u = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        for (ui, vi) in u.iter_mut().zip(&basis[j]) {
            *ui += yj * vi;
        }
    }
    let mut z = Vec::new();
    apply_m(&u, &mut z);
    for (xi, zi) in x.iter_mut().zip(&z) {
        *xi += zi;
    }
}

/// Direct Cholesky factorization of a sparse SPD matrix in profile (envelope)
/// storage after reverse Cuthill-McKee reordering. Factors once, solves many.
#[derive(Debug, Clone)]
pub struct FactorizedSpd {
    n: usize,
    perm: Vec<usize>, // new index -> old index
    band_start: Vec<usize>,
    offsets: Vec<usize>,
    l: Vec<f64>,
}

/// Reverse Cuthill-McKee ordering of the pattern of `a` (new -> old).
fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.rows();
    let degree = |v: usize| a.row(v).0.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut component = Vec::new();
    let mut queue = std::collections::VecDeque::new();

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: BFS twice from a low-degree vertex
        let mut start = seed;
        for _ in 0..2 {
            component.clear();
            let mut seen = vec![false; n];
            seen[start] = true;
            queue.clear();
            queue.push_back(start);
            let mut last = start;
            while let Some(v) = queue.pop_front() {
                last = v;
                component.push(v);
                let mut nbrs: Vec<usize> = a
                    .row(v)
                    .0
                    .iter()
                    .copied()
                    .filter(|&u| u != v && !seen[u] && !visited[u])
                    .collect();
                nbrs.sort_by_key(|&u| degree(u));
                for u in nbrs {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            start = last;
        }
        // Cuthill-McKee from the chosen start over this component
        let base = order.len();
        visited[start] = true;
        queue.clear();
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a
                .row(v)
                .0
                .iter()
                .copied()
                .filter(|&u| u != v && !visited[u])
                .collect();
            nbrs.sort_by_key(|&u| degree(u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        order[base..].reverse();
    }
    order
}

impl FactorizedSpd {
    pub fn new(a: &CsrMatrix) -> Result<Self, KrylovError> {
        if a.rows() != a.cols() {
            return Err(KrylovError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let perm = rcm_order(a);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // profile: first coupled column (in new ordering) per row
        let mut band_start: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &c in a.row(old).0 {
                let cn = iperm[c];
                if cn < new && cn < band_start[new] {
                    band_start[new] = cn;
                }
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + (i - band_start[i] + 1);
        }
        let mut l = vec![0.0; offsets[n]];
        // scatter A into the envelope (lower triangle, new ordering)
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let cn = iperm[c];
                if cn <= new {
                    l[offsets[new] + (cn - band_start[new])] = v;
                }
            }
        }

        // profile Cholesky, row by row
        for i in 0..n {
            let si = band_start[i];
            for j in si..i {
                let sj = band_start[j];
                let k0 = si.max(sj);
                let mut sum = l[offsets[i] + (j - si)];
                for k in k0..j {
                    sum -= l[offsets[i] + (k - si)] * l[offsets[j] + (k - sj)];
                }
                l[offsets[i] + (j - si)] = sum / l[offsets[j] + (j - sj)];
            }
            let mut d = l[offsets[i] + (i - si)];
            for k in si..i {
                let lik = l[offsets[i] + (k - si)];
                d -= lik * lik;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(KrylovError::NotPositiveDefinite {
                    pivot: perm[i],
                    value: d,
                });
            }
            l[offsets[i] + (i - si)] = d.sqrt();
        }

        Ok(FactorizedSpd {
            n,
            perm,
            band_start,
            offsets,
            l,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] = b[self.perm[i]];
        }
        // forward: L z = Pb
        for i in 0..self.n {
            let si = self.band_start[i];
            let mut v = y[i];
            for k in si..i {
                v -= self.l[self.offsets[i] + (k - si)] * y[k];
            }
            y[i] = v / self.l[self.offsets[i] + (i - si)];
        }
        // backward: L^T w = z (column sweep over the same storage)
        for i in (0..self.n).rev() {
            let si = self.band_start[i];
            y[i] /= self.l[self.offsets[i] + (i - si)];
            let yi = y[i];
            for k in si..i {
                y[k] -= self.l[self.offsets[i] + (k - si)] * yi;
            }
        }
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }
}

impl LinearOperator for FactorizedSpd {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve_into(x, y);
    }
}

/// Block-diagonal preconditioner: independent SPD solves on consecutive
/// index ranges of the unknown vector.
pub struct BlockDiagSolve {
    factors: Vec<FactorizedSpd>,
    offsets: Vec<usize>,
}

impl BlockDiagSolve {
    pub fn new(factors: Vec<FactorizedSpd>) -> Self {
        let mut offsets = vec![0usize];
        for f in &factors {
            offsets.push(offsets.last().unwrap() + f.dim());
        }
        BlockDiagSolve { factors, offsets }
    }

    pub fn block(&self, k: usize) -> &FactorizedSpd {
        &self.factors[k]
    }
}

impl LinearOperator for BlockDiagSolve {
    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (k, f) in self.factors.iter().enumerate() {
            let (s, e) = (self.offsets[k], self.offsets[k + 1]);
            f.solve_into(&x[s..e], &mut y[s..e]);
        }
    }
}
