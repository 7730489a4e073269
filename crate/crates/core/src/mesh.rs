//! Conforming triangle meshes with globally oriented edges.
//!
//! Every edge is stored low-vertex-index -> high-vertex-index; that direction
//! defines the global tangential direction used by the edge-based degrees of
//! freedom. Each triangle records, per local edge, the global edge index and
//! an orientation sign (+1 when the local traversal direction matches the
//! global one).

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("segment count must be at least 1")]
    ZeroSegments,
    #[error("L-shape meshes need an even segment count to resolve the corner, got {0}")]
    OddLShapeSegments(usize),
    #[error("mesh size must be positive, got {0}")]
    NonPositiveMeshSize(f64),
    #[error("mesh size {0} is larger than the unit holes")]
    UnresolvedHoles(f64),
    #[error("triangle {tri} has non-positive signed area {area}")]
    NonPositiveArea { tri: usize, area: f64 },
    #[error("triangle {tri} references vertex {vertex} out of range")]
    VertexOutOfRange { tri: usize, vertex: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("vertex {0} is not referenced by any triangle")]
    DanglingVertex(usize),
}

/// Immutable conforming triangulation of a planar domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[(usize, i8); 3]>,
    boundary_edge: Vec<bool>,
}

fn signed_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = [v[t[0]], v[t[1]], v[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a mesh from raw vertex and triangle lists, deriving the edge
    /// structure and validating conformity. Triangles must be counter-clockwise.
    pub fn from_triangles(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { tri: t, vertex: v });
                }
                used[v] = true;
            }
            let area = signed_area(&vertices, tri);
            if area <= 0.0 {
                return Err(MeshError::NonPositiveArea { tri: t, area });
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(MeshError::DanglingVertex(v));
        }

        let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(3 * triangles.len());
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                pairs.push([a.min(b), a.max(b)]);
            }
        }
        pairs.sort_unstable();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut incidence: Vec<usize> = Vec::new();
        for p in pairs {
            if edges.last() == Some(&p) {
                *incidence.last_mut().unwrap() += 1;
            } else {
                edges.push(p);
                incidence.push(1);
            }
        }
        for (e, &c) in incidence.iter().enumerate() {
            if c > 2 {
                return Err(MeshError::NonManifoldEdge(edges[e][0], edges[e][1]));
            }
        }
        let boundary_edge: Vec<bool> = incidence.iter().map(|&c| c == 1).collect();

        let tri_edges = triangles
            .iter()
            .map(|tri| {
                let mut local = [(0usize, 0i8); 3];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let key = [a.min(b), a.max(b)];
                    let idx = edges.binary_search(&key).expect("edge registered above");
                    local[k] = (idx, if a < b { 1 } else { -1 });
                }
                local
            })
            .collect();

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary_edge,
        })
    }

    /// Uniform triangulation of the unit square into 2 M^2 right triangles,
    /// each cell cut by its north-east diagonal.
    pub fn unit_square(m: usize) -> Result<Self, MeshError> {
        if m == 0 {
            return Err(MeshError::ZeroSegments);
        }
        let n = m + 1;
        let h = 1.0 / m as f64;
        let mut vertices = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                let v00 = j * n + i;
                let v10 = v00 + 1;
                let v01 = v00 + n;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_triangles(vertices, triangles)
    }

    /// Quasi-uniform triangulation of the L-shaped domain
    /// (0,1)^2 minus [1/2,1]x[0,1/2], with `m` segments per unit length.
    /// `m` must be even so that the reentrant corner is a mesh vertex.
    pub fn l_shape(m: usize) -> Result<Self, MeshError> {
        if m == 0 {
            return Err(MeshError::ZeroSegments);
        }
        if m % 2 != 0 {
            return Err(MeshError::OddLShapeSegments(m));
        }
        let n = m + 1;
        let h = 1.0 / m as f64;
        let keep_cell =
            |i: usize, j: usize| !((i as f64 + 0.5) * h > 0.5 && (j as f64 + 0.5) * h < 0.5);
        Self::structured_subset(n, n, |i| i as f64 * h, |j| j as f64 * h, keep_cell)
    }

    /// Triangulation of (0,10)^2 minus the four unit holes
    /// [2,3]x[2,3], [2,3]x[7,8], [7,8]x[2,3], [7,8]x[7,8].
    /// The axis is subdivided between the hole break points so that every hole
    /// boundary lies on mesh edges; the cell size is at most `h_target`.
    pub fn square_with_holes(h_target: f64) -> Result<Self, MeshError> {
        if h_target <= 0.0 || h_target.is_nan() {
            return Err(MeshError::NonPositiveMeshSize(h_target));
        }
        if h_target > 1.0 {
            return Err(MeshError::UnresolvedHoles(h_target));
        }
        let breaks = [0.0, 2.0, 3.0, 7.0, 8.0, 10.0];
        let mut coords = vec![0.0];
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            let segs = (len / h_target - 1e-9).ceil().max(1.0) as usize;
            for s in 1..=segs {
                coords.push(w[0] + len * s as f64 / segs as f64);
            }
        }
        let n = coords.len();
        let in_hole_band = |c: f64| (2.0..3.0).contains(&c) || (7.0..8.0).contains(&c);
        let cx = coords.clone();
        let cy = coords.clone();
        let keep_cell = move |i: usize, j: usize| {
            let x = 0.5 * (cx[i] + cx[i + 1]);
            let y = 0.5 * (cy[j] + cy[j + 1]);
            !(in_hole_band(x) && in_hole_band(y))
        };
        let coords2 = coords.clone();
        Self::structured_subset(n, n, move |i| coords[i], move |j| coords2[j], keep_cell)
    }

    /// Structured grid of (nx-1)x(ny-1) cells, keeping only the cells selected
    /// by `keep_cell`, each kept cell split along its north-east diagonal.
    fn structured_subset(
        nx: usize,
        ny: usize,
        x_of: impl Fn(usize) -> f64,
        y_of: impl Fn(usize) -> f64,
        keep_cell: impl Fn(usize, usize) -> bool,
    ) -> Result<Self, MeshError> {
        let mut vertex_id = vec![usize::MAX; nx * ny];
        let mut used = vec![false; nx * ny];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                if keep_cell(i, j) {
                    for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        used[(j + dj) * nx + (i + di)] = true;
                    }
                }
            }
        }
        let mut vertices = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if used[j * nx + i] {
                    vertex_id[j * nx + i] = vertices.len();
                    vertices.push([x_of(i), y_of(j)]);
                }
            }
        }
        let mut triangles = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                if keep_cell(i, j) {
                    let v00 = vertex_id[j * nx + i];
                    let v10 = vertex_id[j * nx + i + 1];
                    let v01 = vertex_id[(j + 1) * nx + i];
                    let v11 = vertex_id[(j + 1) * nx + i + 1];
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
            }
        }
        Self::from_triangles(vertices, triangles)
    }

    /// Red refinement: each triangle is split into 4 congruent children via
    /// its edge midpoints. Midpoint vertices are appended after the originals,
    /// indexed by parent edge.
    pub fn uniform_refine(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|&[a, b]| {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[v0, v1, v2]) in self.triangles.iter().enumerate() {
            let m01 = nv + self.tri_edges[t][0].0;
            let m12 = nv + self.tri_edges[t][1].0;
            let m20 = nv + self.tri_edges[t][2].0;
            triangles.push([v0, m01, m20]);
            triangles.push([m01, v1, m12]);
            triangles.push([m20, m12, v2]);
            triangles.push([m01, m12, m20]);
        }
        Self::from_triangles(vertices, triangles).expect("refinement preserves validity")
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Per-triangle (global edge index, orientation sign) for the three local
    /// edges (v0,v1), (v1,v2), (v2,v0).
    pub fn tri_edges(&self, t: usize) -> [(usize, i8); 3] {
        self.tri_edges[t]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt()
    }

    /// Longest edge, a proxy for the mesh size h.
    pub fn mesh_size(&self) -> f64 {
        (0..self.edges.len())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Maps barycentric coordinates on a triangle to physical coordinates.
    pub fn point_at(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let c = self.triangle_coords(t);
        [
            bary[0] * c[0][0] + bary[1] * c[1][0] + bary[2] * c[2][0],
            bary[0] * c[0][1] + bary[1] * c[1][1] + bary[2] * c[2][1],
        ]
    }

    /// Writes the bare mesh as VTK legacy ASCII (UNSTRUCTURED_GRID, cell
    /// type 5) for inspection.
    pub fn write_vtk<W: Write>(&self, w: &mut W, title: &str) -> io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{title}")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.n_vertices())?;
        for v in &self.vertices {
            writeln!(w, "{:.6e} {:.6e} 0.0", v[0], v[1])?;
        }
        writeln!(w, "CELLS {} {}", self.n_triangles(), 4 * self.n_triangles())?;
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {}", self.n_triangles())?;
        for _ in 0..self.n_triangles() {
            writeln!(w, "5")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn euler_characteristic(mesh: &Mesh) -> isize {
        mesh.n_vertices() as isize - mesh.n_edges() as isize + mesh.n_triangles() as isize
    }

    #[test]
    fn unit_square_m1_counts() {
        let mesh = Mesh::unit_square(1).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_triangles(), 2);
        assert_eq!(mesh.n_edges(), 5);
    }

    #[test]
    fn unit_square_m2_euler() {
        let mesh = Mesh::unit_square(2).unwrap();
        assert_eq!(mesh.n_vertices(), 9);
        assert_eq!(mesh.n_triangles(), 8);
        // V - E + T = 1 for a disk
        assert_eq!(mesh.n_edges(), 16);
        assert_eq!(euler_characteristic(&mesh), 1);
    }

    #[test]
    fn unit_square_m16_counts_and_area() {
        let mesh = Mesh::unit_square(16).unwrap();
        assert_eq!(mesh.n_vertices(), 289);
        assert_eq!(mesh.n_triangles(), 512);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_rejects_zero() {
        assert!(matches!(Mesh::unit_square(0), Err(MeshError::ZeroSegments)));
    }

    #[test]
    fn interior_edges_have_opposite_local_orientations() {
        let mesh = Mesh::unit_square(4).unwrap();
        let mut signs: Vec<Vec<i8>> = vec![Vec::new(); mesh.n_edges()];
        for t in 0..mesh.n_triangles() {
            for (e, s) in mesh.tri_edges(t) {
                signs[e].push(s);
            }
        }
        for e in 0..mesh.n_edges() {
            if mesh.is_boundary_edge(e) {
                assert_eq!(signs[e].len(), 1);
            } else {
                assert_eq!(signs[e].len(), 2);
                assert_eq!(signs[e][0] + signs[e][1], 0, "edge {e}");
            }
        }
    }

    #[test]
    fn lshape_m2_counts() {
        let mesh = Mesh::l_shape(2).unwrap();
        assert_eq!(mesh.n_triangles(), 6);
        assert!((mesh.total_area() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn lshape_rejects_odd() {
        assert!(matches!(
            Mesh::l_shape(3),
            Err(MeshError::OddLShapeSegments(3))
        ));
    }

    #[test]
    fn lshape_m16_geometry() {
        let mesh = Mesh::l_shape(16).unwrap();
        assert!((mesh.total_area() - 0.75).abs() < 1e-12);
        // reentrant corner is a vertex
        assert!(mesh
            .vertices()
            .iter()
            .any(|v| (v[0] - 0.5).abs() < 1e-14 && (v[1] - 0.5).abs() < 1e-14));
        // no triangle pokes into the removed quadrant
        for t in 0..mesh.n_triangles() {
            let c = mesh.triangle_coords(t);
            let cx = (c[0][0] + c[1][0] + c[2][0]) / 3.0;
            let cy = (c[0][1] + c[1][1] + c[2][1]) / 3.0;
            assert!(!(cx > 0.5 && cy < 0.5), "triangle {t} in removed quadrant");
        }
        assert_eq!(euler_characteristic(&mesh), 1);
    }

    #[test]
    fn holes_mesh_area_and_flags() {
        let mesh = Mesh::square_with_holes(0.25).unwrap();
        assert!((mesh.total_area() - 96.0).abs() < 1e-9);
        // V - E + T = 1 - number of holes
        assert_eq!(euler_characteristic(&mesh), 1 - 4);
        // every edge on x = 2, 2 <= y <= 3 is flagged boundary
        let mut found = 0;
        for e in 0..mesh.n_edges() {
            let [a, b] = mesh.edge(e);
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            let on_hole_side = (pa[0] - 2.0).abs() < 1e-12
                && (pb[0] - 2.0).abs() < 1e-12
                && pa[1] >= 2.0 - 1e-12
                && pa[1] <= 3.0 + 1e-12
                && pb[1] >= 2.0 - 1e-12
                && pb[1] <= 3.0 + 1e-12;
            if on_hole_side {
                found += 1;
                assert!(mesh.is_boundary_edge(e), "hole edge {e} not boundary");
            }
        }
        assert!(found >= 4);
    }

    #[test]
    fn holes_mesh_matches_published_element_count() {
        // resolution used by the built-in four-holes scenario
        let mesh = Mesh::square_with_holes(0.154).unwrap();
        let n = mesh.n_triangles() as f64;
        assert!((n - 8144.0).abs() / 8144.0 < 0.2, "got {n} elements");
    }

    #[test]
    fn holes_mesh_rejects_coarse_target() {
        assert!(matches!(
            Mesh::square_with_holes(1.5),
            Err(MeshError::UnresolvedHoles(_))
        ));
        assert!(matches!(
            Mesh::square_with_holes(0.0),
            Err(MeshError::NonPositiveMeshSize(_))
        ));
    }

    #[test]
    fn refine_quadruples_and_preserves_area() {
        let mesh = Mesh::unit_square(1).unwrap();
        let fine = mesh.uniform_refine();
        assert_eq!(fine.n_triangles(), 8);
        assert!((fine.total_area() - mesh.total_area()).abs() < 1e-12);

        let lshape = Mesh::l_shape(4).unwrap();
        let lfine = lshape.uniform_refine();
        assert_eq!(lfine.n_triangles(), 4 * lshape.n_triangles());
        assert!((lfine.total_area() - lshape.total_area()).abs() < 1e-12);
    }

    #[test]
    fn refined_unit_square_matches_doubled_resolution() {
        let key = |v: [f64; 2]| ((v[0] * 1e12).round() as i64, (v[1] * 1e12).round() as i64);
        for m in [1usize, 3] {
            let refined = Mesh::unit_square(m).unwrap().uniform_refine();
            let direct = Mesh::unit_square(2 * m).unwrap();
            let set_a: BTreeSet<_> = refined.vertices().iter().map(|&v| key(v)).collect();
            let set_b: BTreeSet<_> = direct.vertices().iter().map(|&v| key(v)).collect();
            assert_eq!(set_a, set_b, "vertex sets differ at m = {m}");
        }
    }

    #[test]
    fn from_triangles_rejects_clockwise() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::from_triangles(verts, vec![[0, 2, 1]]);
        assert!(matches!(err, Err(MeshError::NonPositiveArea { .. })));
    }

    #[test]
    fn vtk_export_counts() {
        let mesh = Mesh::unit_square(2).unwrap();
        let mut buf = Vec::new();
        mesh.write_vtk(&mut buf, "mesh").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 8 32"));
        assert!(text.contains("CELL_TYPES 8"));
    }
}
