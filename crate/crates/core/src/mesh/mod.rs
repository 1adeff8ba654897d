//! Simplicial meshes of the disk and ball: generation, refinement with
//! boundary projection, the facet complex and quality metrics.

mod facets;
mod io;
mod quality;
mod refine;

pub use facets::{Facet, FacetComplex};
pub use io::{export_mesh, import_mesh, ImportedMesh};
pub use quality::{mesh_quality, QualityReport};

use crate::error::{Error, Result};
use crate::geometry::{cross, dist, dot, sub, Point, SmoothDomain};

/// Lower bound on min ρ_T/h_T enforced after every refinement.
pub const MIN_REGULARITY: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
}

impl SimplexMesh {
    /// Builds a mesh from vertices and (N+1)-tuples of vertex indices.
    /// Every cell must have strictly positive signed volume.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<[usize; 4]>) -> Result<Self> {
        assert!(dim == 2 || dim == 3, "only triangles and tetrahedra are supported");
        let mesh = Self { dim, vertices, cells };
        for c in 0..mesh.n_cells() {
            let v = mesh.signed_volume(c);
            if !(v > 0.0) {
                return Err(Error::InvertedCell { cell: c, volume: v });
            }
        }
        Ok(mesh)
    }

    pub(crate) fn new_unchecked(dim: usize, vertices: Vec<Point>, cells: Vec<[usize; 4]>) -> Self {
        Self { dim, vertices, cells }
    }

    /// Hexagon fan for the disk, octahedron fan for the ball. All vertices
    /// except the center lie on the boundary.
    pub fn coarse(domain: SmoothDomain) -> Self {
        match domain {
            SmoothDomain::Disk2d => {
                let mut vertices = vec![[0.0; 3]];
                for k in 0..6 {
                    let t = k as f64 * std::f64::consts::PI / 3.0;
                    vertices.push([t.cos(), t.sin(), 0.0]);
                }
                let cells = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6, usize::MAX]).collect();
                Self::new_unchecked(2, vertices, cells)
            }
            SmoothDomain::Ball3d => {
                let vertices = vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0],
                    [-1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [0.0, -1.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0, 0.0, -1.0],
                ];
                let mut mesh = Self::new_unchecked(3, vertices, Vec::new());
                for sx in [1, 2] {
                    for sy in [3, 4] {
                        for sz in [5, 6] {
                            let mut cell = [0, sx, sy, sz];
                            mesh.orient(&mut cell);
                            mesh.cells.push(cell);
                        }
                    }
                }
                mesh
            }
        }
    }

    /// Uniform red refinement; midpoints of boundary edges are projected onto
    /// the domain boundary.
    pub fn refine(&self, domain: SmoothDomain) -> Result<Self> {
        refine::refine(self, domain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Vertex indices of cell `c` (N+1 entries).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.iter().map(move |c| &c[..=self.dim])
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn centroid(&self, c: usize) -> Point {
        let mut x = [0.0; 3];
        for &v in self.cell(c) {
            for k in 0..3 {
                x[k] += self.vertices[v][k];
            }
        }
        x.map(|s| s / (self.dim + 1) as f64)
    }

    pub fn signed_volume(&self, c: usize) -> f64 {
        signed_volume(self.dim, &self.cell_points(c))
    }

    pub fn volume(&self, c: usize) -> f64 {
        self.signed_volume(c).abs()
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.volume(c)).sum()
    }

    /// Cell diameter h_T (longest edge).
    pub fn diameter(&self, c: usize) -> f64 {
        let pts = self.cell_points(c);
        let mut h: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                h = h.max(dist(&pts[i], &pts[j]));
            }
        }
        h
    }

    /// Diameter of the inscribed ball, ρ_T = 2N·|T| / |∂T|.
    pub fn inball_diameter(&self, c: usize) -> f64 {
        let pts = self.cell_points(c);
        let surface: f64 = (0..=self.dim)
            .map(|i| {
                let face: Vec<Point> = (0..=self.dim).filter(|&j| j != i).map(|j| pts[j]).collect();
                simplex_measure(&face)
            })
            .sum();
        2.0 * self.dim as f64 * self.volume(c) / surface
    }

    /// Mesh size h = max_T h_T.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.diameter(c)).fold(0.0, f64::max)
    }

    /// min_T ρ_T / h_T.
    pub fn min_regularity(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.inball_diameter(c) / self.diameter(c))
            .fold(f64::INFINITY, f64::min)
    }

    /// Gradients of the barycentric coordinates of cell `c`, in local vertex order.
    pub fn barycentric_gradients(&self, c: usize) -> [Point; 4] {
        let pts = self.cell_points(c);
        let mut g = [[0.0; 3]; 4];
        match self.dim {
            2 => {
                let e1 = sub(&pts[1], &pts[0]);
                let e2 = sub(&pts[2], &pts[0]);
                let det = e1[0] * e2[1] - e1[1] * e2[0];
                g[1] = [e2[1] / det, -e2[0] / det, 0.0];
                g[2] = [-e1[1] / det, e1[0] / det, 0.0];
            }
            _ => {
                let e1 = sub(&pts[1], &pts[0]);
                let e2 = sub(&pts[2], &pts[0]);
                let e3 = sub(&pts[3], &pts[0]);
                let det = dot(&e1, &cross(&e2, &e3));
                g[1] = cross(&e2, &e3).map(|v| v / det);
                g[2] = cross(&e3, &e1).map(|v| v / det);
                g[3] = cross(&e1, &e2).map(|v| v / det);
            }
        }
        for k in 0..3 {
            g[0][k] = -(1..=self.dim).map(|i| g[i][k]).sum::<f64>();
        }
        g
    }

    /// Barycentric coordinates of `x` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, x: &Point) -> [f64; 4] {
        let g = self.barycentric_gradients(c);
        let x0 = self.vertices[self.cell(c)[0]];
        let d = sub(x, &x0);
        let mut b = [0.0; 4];
        for i in 1..=self.dim {
            b[i] = dot(&g[i], &d);
        }
        b[0] = 1.0 - b[1..=self.dim].iter().sum::<f64>();
        b
    }

    pub(crate) fn orient(&self, cell: &mut [usize; 4]) {
        let pts: Vec<Point> = cell[..=self.dim].iter().map(|&v| self.vertices[v]).collect();
        if signed_volume(self.dim, &pts) < 0.0 {
            cell.swap(0, 1);
        }
    }
}

pub(crate) fn signed_volume(dim: usize, pts: &[Point]) -> f64 {
    let e1 = sub(&pts[1], &pts[0]);
    let e2 = sub(&pts[2], &pts[0]);
    if dim == 2 {
        0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    } else {
        let e3 = sub(&pts[3], &pts[0]);
        dot(&e1, &cross(&e2, &e3)) / 6.0
    }
}

/// Unsigned measure of a k-simplex embedded in 3D given its k+1 vertices.
pub fn simplex_measure(pts: &[Point]) -> f64 {
    match pts.len() {
        1 => 1.0,
        2 => dist(&pts[0], &pts[1]),
        3 => {
            let c = cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]));
            0.5 * dot(&c, &c).sqrt()
        }
        4 => signed_volume(3, pts).abs(),
        n => panic!("unsupported simplex with {n} vertices"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn hexagon_fan() {
        let mesh = SimplexMesh::coarse(SmoothDomain::Disk2d);
        assert_eq!(mesh.n_vertices(), 7);
        assert_eq!(mesh.n_cells(), 6);
        let area = 3.0 * 3f64.sqrt() / 2.0;
        assert!((mesh.total_volume() - area).abs() < 1e-14);
        for c in 0..6 {
            assert!(mesh.signed_volume(c) > 0.0);
            let q = mesh.inball_diameter(c) / mesh.diameter(c);
            assert!((q - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        }
        for v in &mesh.vertices()[1..] {
            assert!(SmoothDomain::Disk2d.signed_distance(v).abs() < 1e-15);
        }
    }

    #[test]
    fn octahedron_fan() {
        let mesh = SimplexMesh::coarse(SmoothDomain::Ball3d);
        assert_eq!(mesh.n_vertices(), 7);
        assert_eq!(mesh.n_cells(), 8);
        assert!((mesh.total_volume() - 4.0 / 3.0).abs() < 1e-14);
        for c in 0..8 {
            assert!(mesh.signed_volume(c) > 0.0);
        }
        for v in &mesh.vertices()[1..] {
            assert!(SmoothDomain::Ball3d.signed_distance(v).abs() < 1e-15);
        }
    }

    #[test]
    fn barycentric_coordinates_reproduce_vertices() {
        for domain in [SmoothDomain::Disk2d, SmoothDomain::Ball3d] {
            let mesh = SimplexMesh::coarse(domain).refine(domain).unwrap();
            for c in 0..mesh.n_cells() {
                for (i, &v) in mesh.cell(c).iter().enumerate() {
                    let b = mesh.barycentric(c, &mesh.vertices()[v]);
                    for (j, bj) in b.iter().take(mesh.dim() + 1).enumerate() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((bj - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn inverted_cell_is_rejected() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(SimplexMesh::new(2, v.clone(), vec![[0, 1, 2, 0]]).is_ok());
        assert!(matches!(
            SimplexMesh::new(2, v, vec![[0, 2, 1, 0]]),
            Err(Error::InvertedCell { cell: 0, .. })
        ));
    }
}
