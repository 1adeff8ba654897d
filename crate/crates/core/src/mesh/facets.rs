use std::collections::HashMap;

use super::{simplex_measure, SimplexMesh};
use crate::error::{Error, Result};
use crate::geometry::{cross, dist, dot, sub, Point};

/// An (N-1)-dimensional face of the triangulation.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Sorted vertex indices; only the first N entries are used.
    pub vertices: [usize; 3],
    /// `cells[0]` is the adjacent cell with the smaller index (T_e^-);
    /// `cells[1]` is T_e^+ or `None` on the boundary.
    pub cells: (usize, Option<usize>),
    /// Local index (in each adjacent cell) of the vertex opposite the facet.
    pub local: (usize, usize),
    pub midpoint: Point,
    pub measure: f64,
    pub diameter: f64,
    /// Points from `cells.0` into `cells.1`; outward on the boundary (n_h).
    pub normal: Point,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct FacetComplex {
    dim: usize,
    facets: Vec<Facet>,
    cell_facets: Vec<[usize; 4]>,
    boundary: Vec<usize>,
    boundary_index: Vec<Option<usize>>,
    boundary_vertices: Vec<usize>,
    boundary_vertex_index: Vec<Option<usize>>,
    vertex_boundary_facets: Vec<Vec<usize>>,
}

impl FacetComplex {
    pub fn build(mesh: &SimplexMesh) -> Result<Self> {
        let n = mesh.dim();
        let mut index: HashMap<[usize; 3], usize> = HashMap::with_capacity(mesh.n_cells() * (n + 1));
        let mut adj: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut keys: Vec<[usize; 3]> = Vec::new();
        let mut cell_facets = vec![[usize::MAX; 4]; mesh.n_cells()];

        for (c, cell) in mesh.cells().enumerate() {
            for skip in 0..=n {
                let mut key = [usize::MAX; 3];
                let mut k = 0;
                for (i, &v) in cell.iter().enumerate() {
                    if i != skip {
                        key[k] = v;
                        k += 1;
                    }
                }
                key[..n].sort_unstable();
                let f = *index.entry(key).or_insert_with(|| {
                    keys.push(key);
                    adj.push(Vec::with_capacity(2));
                    keys.len() - 1
                });
                adj[f].push((c, skip));
                cell_facets[c][skip] = f;
            }
        }

        let mut facets = Vec::with_capacity(keys.len());
        for (key, cells) in keys.iter().zip(&adj) {
            if cells.len() > 2 {
                return Err(Error::NonManifold { vertices: key[..n].to_vec(), count: cells.len() });
            }
            let pts: Vec<Point> = key[..n].iter().map(|&v| mesh.vertices()[v]).collect();
            let mut midpoint = [0.0; 3];
            for p in &pts {
                for k in 0..3 {
                    midpoint[k] += p[k] / n as f64;
                }
            }
            let mut diameter: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    diameter = diameter.max(dist(&pts[i], &pts[j]));
                }
            }
            let mut normal = if n == 2 {
                let t = sub(&pts[1], &pts[0]);
                [t[1], -t[0], 0.0]
            } else {
                cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]))
            };
            let len = dot(&normal, &normal).sqrt();
            normal = normal.map(|v| v / len);
            // cells are visited in increasing order, so cells[0] is the smaller index
            let (c0, l0) = cells[0];
            if dot(&normal, &sub(&midpoint, &mesh.centroid(c0))) < 0.0 {
                normal = normal.map(|v| -v);
            }
            let (plus, l1) = match cells.get(1) {
                Some(&(c1, l1)) => (Some(c1), l1),
                None => (None, usize::MAX),
            };
            facets.push(Facet {
                vertices: *key,
                cells: (c0, plus),
                local: (l0, l1),
                midpoint,
                measure: simplex_measure(&pts),
                diameter,
                normal,
            });
        }

        let mut boundary = Vec::new();
        let mut boundary_index = vec![None; facets.len()];
        for (f, facet) in facets.iter().enumerate() {
            if facet.is_boundary() {
                boundary_index[f] = Some(boundary.len());
                boundary.push(f);
            }
        }
        let mut boundary_vertex_index = vec![None; mesh.n_vertices()];
        let mut boundary_vertices = Vec::new();
        for &f in &boundary {
            for &v in &facets[f].vertices[..n] {
                if boundary_vertex_index[v].is_none() {
                    boundary_vertex_index[v] = Some(0);
                    boundary_vertices.push(v);
                }
            }
        }
        boundary_vertices.sort_unstable();
        for (i, &v) in boundary_vertices.iter().enumerate() {
            boundary_vertex_index[v] = Some(i);
        }
        let mut vertex_boundary_facets = vec![Vec::new(); boundary_vertices.len()];
        for (b, &f) in boundary.iter().enumerate() {
            for &v in &facets[f].vertices[..n] {
                vertex_boundary_facets[boundary_vertex_index[v].unwrap()].push(b);
            }
        }

        Ok(Self {
            dim: n,
            facets,
            cell_facets,
            boundary,
            boundary_index,
            boundary_vertices,
            boundary_vertex_index,
            vertex_boundary_facets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn facet(&self, f: usize) -> &Facet {
        &self.facets[f]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Facet indices of cell `c`; entry `i` is the facet opposite local vertex `i`.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c][..=self.dim]
    }

    /// Facet indices of E_h^∂ in boundary order.
    pub fn boundary_facets(&self) -> &[usize] {
        &self.boundary
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    /// Position of facet `f` in `boundary_facets`, if it is a boundary facet.
    pub fn boundary_index(&self, f: usize) -> Option<usize> {
        self.boundary_index[f]
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(move |&f| !self.facets[f].is_boundary())
    }

    /// Mesh vertices on Γ_h, sorted.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn boundary_vertex_index(&self, v: usize) -> Option<usize> {
        self.boundary_vertex_index[v]
    }

    /// Boundary facets (boundary order) containing boundary vertex `bv`.
    pub fn facets_at_boundary_vertex(&self, bv: usize) -> &[usize] {
        &self.vertex_boundary_facets[bv]
    }

    /// Boundary facets sharing at least one vertex with boundary facet `b`
    /// (including `b` itself).
    pub fn boundary_neighbours(&self, b: usize) -> Vec<usize> {
        let f = &self.facets[self.boundary[b]];
        let mut out: Vec<usize> = f.vertices[..self.dim]
            .iter()
            .flat_map(|&v| self.vertex_boundary_facets[self.boundary_vertex_index[v].unwrap()].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Total measure of Γ_h.
    pub fn boundary_measure(&self) -> f64 {
        self.boundary.iter().map(|&f| self.facets[f].measure).sum()
    }

    pub fn facet_points(&self, mesh: &SimplexMesh, f: usize) -> Vec<Point> {
        self.facets[f].vertices[..self.dim].iter().map(|&v| mesh.vertices()[v]).collect()
    }
}
