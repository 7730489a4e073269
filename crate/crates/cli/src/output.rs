//! CSV and VTK writers. All numbers are written in scientific notation with
//! seven significant digits; single-threaded runs reproduce byte-identical
//! files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Result;

use tdgl::assembly::{curl_field, supercurrent_element_avg};
use tdgl::scenarios::ErrorNorms;
use tdgl::{Discretization, Params, RunStats, State};

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

/// stats.csv: one row per time step.
pub fn write_stats_csv(path: &Path, stats: &RunStats) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "step,time,newton_iters,krylov_iters_total,energy,max_abs_psi"
    )?;
    for s in &stats.steps {
        let krylov: usize = s.krylov_iters.iter().sum();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.step,
            fmt(s.time),
            s.newton_iters,
            krylov,
            fmt(s.energy),
            fmt(s.max_abs_psi)
        )?;
    }
    Ok(())
}

/// One row of the manufactured-problem error table.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub m: usize,
    pub errors: ErrorNorms,
    /// log2 ratios against the previous row; absent for the first row.
    pub rates: Option<[f64; 4]>,
}

/// Computes the rate columns of an error sweep from consecutive rows.
pub fn attach_rates(rows: &mut [ErrorRow]) {
    for i in 1..rows.len() {
        let prev = rows[i - 1].errors;
        let cur = rows[i].errors;
        rows[i].rates = Some([
            (prev.e_a / cur.e_a).log2(),
            (prev.e_r / cur.e_r).log2(),
            (prev.e_i / cur.e_i).log2(),
            (prev.e_d / cur.e_d).log2(),
        ]);
    }
}

/// errors.csv with the convergence-table columns
/// M, eA, rateA, er, rater, ei, ratei, ed, rated.
pub fn write_errors_csv(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "M,eA,rateA,er,rater,ei,ratei,ed,rated")?;
    for row in rows {
        let r = |k: usize| {
            row.rates
                .map(|rates| format!("{:.2}", rates[k]))
                .unwrap_or_default()
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            row.m,
            fmt(row.errors.e_a),
            r(0),
            fmt(row.errors.e_r),
            r(1),
            fmt(row.errors.e_i),
            r(2),
            fmt(row.errors.e_d),
            r(3)
        )?;
    }
    Ok(())
}

/// VTK legacy ASCII snapshot (UNSTRUCTURED_GRID, triangle cells): vertex
/// scalar psi_sq = |psi_h|^2, cell scalar curl_A, cell vector supercurrent.
pub fn write_vtk_snapshot(
    disc: &Discretization,
    state: &State,
    params: &Params,
    path: &Path,
) -> Result<()> {
    let mesh = disc.mesh();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "tdgl snapshot")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} 0.0", fmt(v[0]), fmt(v[1]))?;
    }
    writeln!(w, "CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles())?;
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        writeln!(w, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_triangles())?;
    for _ in 0..mesh.n_triangles() {
        writeln!(w, "5")?;
    }

    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(w, "SCALARS psi_sq double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (p, q) in state.psi_r.iter().zip(&state.psi_i) {
        writeln!(w, "{}", fmt(p * p + q * q))?;
    }

    let curls = curl_field(disc, state);
    let current = supercurrent_element_avg(disc, state, params);
    writeln!(w, "CELL_DATA {}", mesh.n_triangles())?;
    writeln!(w, "SCALARS curl_A double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for c in &curls {
        writeln!(w, "{}", fmt(*c))?;
    }
    writeln!(w, "VECTORS supercurrent double")?;
    for j in &current {
        writeln!(w, "{} {} 0.0", fmt(j[0]), fmt(j[1]))?;
    }
    Ok(())
}
