//! Assembly of the bilinear forms and load vectors of the penalized scheme.

use std::collections::BTreeMap;

use crate::cases::ProblemData;
use crate::geometry::{dot, Point};
use crate::mesh::{FacetComplex, SimplexMesh};
use crate::quadrature::QuadratureRule;
use crate::spaces::{boundary_mean_with, local_index, FacetFunction, DATA_DEGREE};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Gradients of the CR basis functions of cell `c` (local facet order).
fn basis_gradients(mesh: &SimplexMesh, c: usize) -> [Point; 4] {
    let n = mesh.dim() as f64;
    mesh.barycentric_gradients(c).map(|g| g.map(|v| -n * v))
}

fn velocity_dofs(facets: &FacetComplex) -> usize {
    facets.dim() * facets.len()
}

/// Σ_T (u, v)_T + (ν/2)(𝔼u, 𝔼v)_T with 𝔼u = ∇u + ∇uᵀ.
pub fn assemble_a(mesh: &SimplexMesh, facets: &FacetComplex, nu: f64) -> CsrMatrix {
    let mut mass = assemble_mass(mesh, facets);
    let strain = assemble_strain(mesh, facets, nu);
    mass = mass.add_scaled(&strain, 1.0);
    mass
}

/// Σ_T (u, v)_T on the CR space.
pub fn assemble_mass(mesh: &SimplexMesh, facets: &FacetComplex) -> CsrMatrix {
    let n = mesh.dim();
    let nf = n as f64;
    let ndof = velocity_dofs(facets);
    let mut t = TripletBuilder::with_capacity(ndof, ndof, mesh.n_cells() * (n + 1) * (n + 1) * n);
    let off = 1.0 - 2.0 * nf / (nf + 1.0) + nf * nf / ((nf + 1.0) * (nf + 2.0));
    let diag = 1.0 - 2.0 * nf / (nf + 1.0) + 2.0 * nf * nf / ((nf + 1.0) * (nf + 2.0));
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let fs = facets.cell_facets(c);
        for (i, &fi) in fs.iter().enumerate() {
            for (j, &fj) in fs.iter().enumerate() {
                let m = vol * if i == j { diag } else { off };
                for a in 0..n {
                    t.push(fi * n + a, fj * n + a, m);
                }
            }
        }
    }
    t.build()
}

/// Σ_T (ν/2)(𝔼u, 𝔼v)_T on the CR space.
pub fn assemble_strain(mesh: &SimplexMesh, facets: &FacetComplex, nu: f64) -> CsrMatrix {
    let n = mesh.dim();
    let ndof = velocity_dofs(facets);
    let mut t = TripletBuilder::with_capacity(ndof, ndof, mesh.n_cells() * (n + 1) * (n + 1) * n * n);
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let g = basis_gradients(mesh, c);
        let fs = facets.cell_facets(c);
        for (i, &fi) in fs.iter().enumerate() {
            for (j, &fj) in fs.iter().enumerate() {
                let gg = dot(&g[i], &g[j]);
                for a in 0..n {
                    for b in 0..n {
                        let mut v = g[i][b] * g[j][a];
                        if a == b {
                            v += gg;
                        }
                        t.push(fi * n + a, fj * n + b, nu * vol * v);
                    }
                }
            }
        }
    }
    t.build()
}

/// Broken H¹ seminorm Gram: Σ_T (∇u, ∇v)_T.
pub fn assemble_broken_stiffness(mesh: &SimplexMesh, facets: &FacetComplex) -> CsrMatrix {
    let n = mesh.dim();
    let ndof = velocity_dofs(facets);
    let mut t = TripletBuilder::with_capacity(ndof, ndof, mesh.n_cells() * (n + 1) * (n + 1) * n);
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let g = basis_gradients(mesh, c);
        let fs = facets.cell_facets(c);
        for (i, &fi) in fs.iter().enumerate() {
            for (j, &fj) in fs.iter().enumerate() {
                let v = vol * dot(&g[i], &g[j]);
                for a in 0..n {
                    t.push(fi * n + a, fj * n + a, v);
                }
            }
        }
    }
    t.build()
}

/// Gram matrix of ‖·‖_{V_h}.
pub fn assemble_vh_gram(mesh: &SimplexMesh, facets: &FacetComplex) -> CsrMatrix {
    assemble_mass(mesh, facets).add_scaled(&assemble_broken_stiffness(mesh, facets), 1.0)
}

/// b_h(p, v) = −Σ_T (p, div v)_T, one row per cell.
pub fn assemble_b(mesh: &SimplexMesh, facets: &FacetComplex) -> CsrMatrix {
    let n = mesh.dim();
    let mut t = TripletBuilder::with_capacity(mesh.n_cells(), velocity_dofs(facets), mesh.n_cells() * (n + 1) * n);
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let g = basis_gradients(mesh, c);
        for (i, &f) in facets.cell_facets(c).iter().enumerate() {
            for a in 0..n {
                t.push(c, f * n + a, -vol * g[i][a]);
            }
        }
    }
    t.build()
}

/// Reduced (midpoint) penalty Gram: Σ_{e ∈ E_h^∂} |e| (u(m_e)·n_h)(v(m_e)·n_h).
pub fn assemble_c(facets: &FacetComplex) -> CsrMatrix {
    let n = facets.dim();
    let ndof = velocity_dofs(facets);
    let mut t = TripletBuilder::with_capacity(ndof, ndof, facets.n_boundary() * n * n);
    for &f in facets.boundary_facets() {
        let e = facets.facet(f);
        for a in 0..n {
            for b in 0..n {
                t.push(f * n + a, f * n + b, e.measure * e.normal[a] * e.normal[b]);
            }
        }
    }
    t.build()
}

/// Σ_e |e| ḡ(e) (v(m_e)·n_h) for boundary facet means ḡ = Π_h^∂ g̃.
pub fn penalty_load(facets: &FacetComplex, g_mean: &FacetFunction) -> Vec<f64> {
    let n = facets.dim();
    let mut out = vec![0.0; velocity_dofs(facets)];
    for (b, &f) in facets.boundary_facets().iter().enumerate() {
        let e = facets.facet(f);
        for a in 0..n {
            out[f * n + a] += e.measure * g_mean.get(b)[0] * e.normal[a];
        }
    }
    out
}

/// Coefficients of the trace of cell `c` at its local vertex `i` in terms of
/// the cell's facet DOFs: u|_T(x_i) = Σ_j (1 − N δ_ij) u_{f_j}.
fn vertex_trace(facets: &FacetComplex, c: usize, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let n = facets.dim() as f64;
    facets
        .cell_facets(c)
        .iter()
        .enumerate()
        .map(move |(j, &f)| (f, if i == j { 1.0 - n } else { 1.0 }))
}

/// Σ_{e interior} (γ/h_e)(⟦u⟧, ⟦v⟧)_e, integrated exactly.
pub fn assemble_j(mesh: &SimplexMesh, facets: &FacetComplex, gamma: f64) -> CsrMatrix {
    let n = mesh.dim();
    let ndof = velocity_dofs(facets);
    let mut t = TripletBuilder::with_capacity(ndof, ndof, facets.len() * 25 * n);
    for f in facets.interior_facets() {
        let e = facets.facet(f);
        let (minus, plus) = (e.cells.0, e.cells.1.unwrap());
        // jump at each facet vertex as a sparse combination of facet DOFs
        let mut rows: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(n + 1);
        for &v in &e.vertices[..n] {
            let mut d = BTreeMap::new();
            for (g, w) in vertex_trace(facets, plus, local_index(mesh, plus, v)) {
                *d.entry(g).or_insert(0.0) += w;
            }
            for (g, w) in vertex_trace(facets, minus, local_index(mesh, minus, v)) {
                *d.entry(g).or_insert(0.0) -= w;
            }
            rows.push(d);
        }
        let mut total = BTreeMap::new();
        for d in &rows {
            for (&g, &w) in d {
                *total.entry(g).or_insert(0.0) += w;
            }
        }
        rows.push(total);
        // ∫_e w² = |e| (Σ_v d_v² + (Σ_v d_v)²) / (N (N + 1)) for affine w
        let scale = gamma / e.diameter * e.measure / (n * (n + 1)) as f64;
        for d in &rows {
            for (&g1, &w1) in d {
                if w1 == 0.0 {
                    continue;
                }
                for (&g2, &w2) in d {
                    if w2 == 0.0 {
                        continue;
                    }
                    for a in 0..n {
                        t.push(g1 * n + a, g2 * n + a, scale * w1 * w2);
                    }
                }
            }
        }
    }
    t.build()
}

/// Σ_e h_e^{-1}‖⟦u⟧‖²_{L²(e)} Gram matrix (J with γ = 1).
pub fn assemble_jump_gram(mesh: &SimplexMesh, facets: &FacetComplex) -> CsrMatrix {
    assemble_j(mesh, facets, 1.0)
}

/// (f̃, v)_{Ω_h} + (τ̃, v)_{Γ_h} with rules exact to `degree` on cells and facets.
pub fn assemble_load(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    f: &dyn Fn(&Point) -> Point,
    tau: &dyn Fn(&Point) -> Point,
    degree: usize,
) -> Vec<f64> {
    let n = mesh.dim();
    let nf = n as f64;
    let mut out = vec![0.0; velocity_dofs(facets)];
    let cell_rule = QuadratureRule::for_degree(n, degree);
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let fs = facets.cell_facets(c);
        for (x, b, w) in cell_rule.mapped(&pts, mesh.volume(c)) {
            let val = f(&x);
            for (i, &fi) in fs.iter().enumerate() {
                let phi = 1.0 - nf * b[i];
                for a in 0..n {
                    out[fi * n + a] += w * phi * val[a];
                }
            }
        }
    }
    let facet_rule = QuadratureRule::for_degree(n - 1, degree);
    for &f in facets.boundary_facets() {
        let e = facets.facet(f);
        let c = e.cells.0;
        let fs = facets.cell_facets(c);
        let pts = facets.facet_points(mesh, f);
        for (x, _, w) in facet_rule.mapped(&pts, e.measure) {
            let val = tau(&x);
            let b = mesh.barycentric(c, &x);
            for (i, &fi) in fs.iter().enumerate() {
                let phi = 1.0 - nf * b[i];
                for a in 0..n {
                    out[fi * n + a] += w * phi * val[a];
                }
            }
        }
    }
    out
}

/// Discretization parameters of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub eps: f64,
    pub gamma: f64,
    pub nu: f64,
    pub quad_degree: usize,
}

impl SchemeParams {
    pub fn new(eps: f64, gamma: f64, nu: f64) -> Self {
        Self { eps, gamma, nu, quad_degree: DATA_DEGREE }
    }
}

/// [A + J + C/ε, Bᵀ; B, 0] together with its blocks.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub params: SchemeParams,
    pub a: CsrMatrix,
    pub j: CsrMatrix,
    pub c: CsrMatrix,
    pub b: CsrMatrix,
    /// (f̃, v) + (τ̃, v)
    pub load: Vec<f64>,
    /// Π_h^∂ g̃
    pub g_mean: FacetFunction,
    pub penalty: Vec<f64>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SaddleSystem {
    pub fn n_velocity(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// A + J + C/ε
    pub fn velocity_block(&self) -> CsrMatrix {
        self.a.add_scaled(&self.j, 1.0).add_scaled(&self.c, 1.0 / self.params.eps)
    }
}

pub fn assemble_system(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    data: &ProblemData,
    params: SchemeParams,
) -> SaddleSystem {
    let a = assemble_a(mesh, facets, params.nu);
    let j = assemble_j(mesh, facets, params.gamma);
    let c = assemble_c(facets);
    let b = assemble_b(mesh, facets);
    let load = assemble_load(mesh, facets, &*data.f, &*data.tau, params.quad_degree);
    let g_mean = boundary_mean_with(mesh, facets, params.quad_degree, &*data.g);
    let penalty = penalty_load(facets, &g_mean);

    let nu_dofs = a.nrows();
    let size = nu_dofs + b.nrows();
    let mut t = TripletBuilder::with_capacity(size, size, a.nnz() + j.nnz() + c.nnz() + 2 * b.nnz());
    for (r, col, v) in a.triplets().chain(j.triplets()) {
        t.push(r, col, v);
    }
    for (r, col, v) in c.triplets() {
        t.push(r, col, v / params.eps);
    }
    for (r, col, v) in b.triplets() {
        t.push(nu_dofs + r, col, v);
        t.push(col, nu_dofs + r, v);
    }
    let matrix = t.build();
    let mut rhs = vec![0.0; size];
    for i in 0..nu_dofs {
        rhs[i] = load[i] + penalty[i] / params.eps;
    }
    SaddleSystem { params, a, j, c, b, load, g_mean, penalty, matrix, rhs }
}
