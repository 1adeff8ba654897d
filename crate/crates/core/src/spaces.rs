//! Finite element functions and the interpolation, enriching and lifting
//! operators acting on them.
//!
//! Velocity DOFs are facet-global: component `a` on facet `f` lives at index
//! `f * N + a`.

use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::linalg::DirectSolver;
use crate::mesh::{FacetComplex, SimplexMesh};
use crate::quadrature::QuadratureRule;
use crate::sparse::TripletBuilder;

/// Polynomial degree integrated exactly by the data quadrature rules.
pub const DATA_DEGREE: usize = 4;

/// Nonconforming P1 vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct CrFunction {
    dim: usize,
    values: Vec<f64>,
}

impl CrFunction {
    pub fn zeros(facets: &FacetComplex) -> Self {
        Self { dim: facets.dim(), values: vec![0.0; facets.dim() * facets.len()] }
    }

    pub fn from_values(dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len() % dim, 0);
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at the midpoint of facet `f`.
    pub fn facet_value(&self, f: usize) -> Point {
        let mut v = [0.0; 3];
        v[..self.dim].copy_from_slice(&self.values[f * self.dim..(f + 1) * self.dim]);
        v
    }

    pub fn set_facet_value(&mut self, f: usize, v: &Point) {
        let n = self.dim;
        self.values[f * n..(f + 1) * n].copy_from_slice(&v[..n]);
    }

    /// Restriction to cell `c` evaluated at barycentric coordinates `b`.
    pub fn eval_barycentric(&self, facets: &FacetComplex, c: usize, b: &[f64; 4]) -> Point {
        let n = self.dim as f64;
        let mut out = [0.0; 3];
        for (i, &f) in facets.cell_facets(c).iter().enumerate() {
            let phi = 1.0 - n * b[i];
            let v = self.facet_value(f);
            for k in 0..self.dim {
                out[k] += phi * v[k];
            }
        }
        out
    }

    /// Value of the restriction to cell `c` at its local vertex `i`.
    pub fn cell_vertex_value(&self, facets: &FacetComplex, c: usize, i: usize) -> Point {
        let mut b = [0.0; 4];
        b[i] = 1.0;
        self.eval_barycentric(facets, c, &b)
    }

    /// Gradient on cell `c`: `g[a][k] = ∂u_a/∂x_k`.
    pub fn cell_gradient(&self, mesh: &SimplexMesh, facets: &FacetComplex, c: usize) -> [[f64; 3]; 3] {
        let n = self.dim;
        let grads = mesh.barycentric_gradients(c);
        let mut g = [[0.0; 3]; 3];
        for (i, &f) in facets.cell_facets(c).iter().enumerate() {
            let v = self.facet_value(f);
            for a in 0..n {
                for k in 0..n {
                    g[a][k] -= n as f64 * v[a] * grads[i][k];
                }
            }
        }
        g
    }

    /// Piecewise divergence on cell `c`.
    pub fn cell_divergence(&self, mesh: &SimplexMesh, facets: &FacetComplex, c: usize) -> f64 {
        let g = self.cell_gradient(mesh, facets, c);
        (0..self.dim).map(|a| g[a][a]).sum()
    }

    /// Values of the traces from `T_e^+` and `T_e^-` minus each other at the
    /// vertices of interior facet `f` (in the facet's vertex order).
    pub fn facet_jump_at_vertices(&self, mesh: &SimplexMesh, facets: &FacetComplex, f: usize) -> Vec<Point> {
        let e = facets.facet(f);
        let plus = e.cells.1.expect("jump requested on a boundary facet");
        let minus = e.cells.0;
        e.vertices[..self.dim]
            .iter()
            .map(|&v| {
                let up = self.cell_vertex_value(facets, plus, local_index(mesh, plus, v));
                let um = self.cell_vertex_value(facets, minus, local_index(mesh, minus, v));
                std::array::from_fn(|k| up[k] - um[k])
            })
            .collect()
    }

    /// ∫_e |⟦u⟧|² over interior facet `f`, exact for the affine jump.
    pub fn facet_jump_squared(&self, mesh: &SimplexMesh, facets: &FacetComplex, f: usize) -> f64 {
        let d = self.facet_jump_at_vertices(mesh, facets, f);
        affine_square_integral(facets.facet(f).measure, &d)
    }

    pub fn add_scaled(&mut self, other: &CrFunction, s: f64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }
}

/// Local index of global vertex `v` in cell `c`.
pub(crate) fn local_index(mesh: &SimplexMesh, c: usize, v: usize) -> usize {
    mesh.cell(c).iter().position(|&w| w == v).expect("vertex not in cell")
}

/// ∫_e |w|² for an affine vector field on a simplex with vertex values `d`.
pub(crate) fn affine_square_integral(measure: f64, d: &[Point]) -> f64 {
    let k = d.len() as f64;
    let mut sum_sq = 0.0;
    let mut total = [0.0; 3];
    for v in d {
        sum_sq += dot(v, v);
        for c in 0..3 {
            total[c] += v[c];
        }
    }
    measure * (sum_sq + dot(&total, &total)) / (k * (k + 1.0))
}

/// Piecewise-constant scalar field on cells.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Function {
    pub values: Vec<f64>,
}

impl P0Function {
    pub fn zeros(mesh: &SimplexMesh) -> Self {
        Self { values: vec![0.0; mesh.n_cells()] }
    }

    /// (p, 1)_{Ω_h}
    pub fn integral(&self, mesh: &SimplexMesh) -> f64 {
        self.values.iter().enumerate().map(|(c, p)| p * mesh.volume(c)).sum()
    }

    /// Mean value over Ω_h.
    pub fn mean(&self, mesh: &SimplexMesh) -> f64 {
        self.integral(mesh) / mesh.total_volume()
    }

    pub fn shifted(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|p| p + s).collect() }
    }
}

/// Piecewise-constant field on boundary facets (indexed in boundary order),
/// with `ncomp` components per facet.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetFunction {
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl FacetFunction {
    pub fn scalar(values: Vec<f64>) -> Self {
        Self { ncomp: 1, values }
    }

    pub fn zeros(facets: &FacetComplex) -> Self {
        Self::scalar(vec![0.0; facets.n_boundary()])
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.ncomp
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, b: usize) -> &[f64] {
        &self.values[b * self.ncomp..(b + 1) * self.ncomp]
    }

    /// (μ, λ)_{Γ_h} for scalar facet functions.
    pub fn inner(&self, other: &FacetFunction, facets: &FacetComplex) -> f64 {
        facets
            .boundary_facets()
            .iter()
            .enumerate()
            .map(|(b, &f)| {
                let e = facets.facet(f).measure;
                e * self.get(b).iter().zip(other.get(b)).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm(&self, facets: &FacetComplex) -> f64 {
        self.inner(self, facets).sqrt()
    }

    /// The vector function μ n_h.
    pub fn times_normal(&self, facets: &FacetComplex) -> FacetFunction {
        assert_eq!(self.ncomp, 1);
        let n = facets.dim();
        let mut values = Vec::with_capacity(n * self.values.len());
        for (b, &f) in facets.boundary_facets().iter().enumerate() {
            let nh = facets.facet(f).normal;
            values.extend((0..n).map(|k| self.values[b] * nh[k]));
        }
        FacetFunction { ncomp: n, values }
    }
}

/// Conforming P1 field with `ncomp` components per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct P1Function {
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl P1Function {
    pub fn get(&self, v: usize) -> &[f64] {
        &self.values[v * self.ncomp..(v + 1) * self.ncomp]
    }

    /// Component `k` on cell `c` at barycentric point `b`.
    pub fn eval_barycentric(&self, mesh: &SimplexMesh, c: usize, b: &[f64; 4], k: usize) -> f64 {
        mesh.cell(c).iter().enumerate().map(|(i, &v)| b[i] * self.get(v)[k]).sum()
    }

    /// CR function with the same facet means (exact, the field is affine on
    /// every facet).
    pub fn to_cr(&self, facets: &FacetComplex) -> CrFunction {
        let n = facets.dim();
        assert_eq!(self.ncomp, n);
        let mut u = CrFunction::zeros(facets);
        for (f, e) in facets.facets().iter().enumerate() {
            let mut m = [0.0; 3];
            for &v in &e.vertices[..n] {
                for k in 0..n {
                    m[k] += self.get(v)[k] / n as f64;
                }
            }
            u.set_facet_value(f, &m);
        }
        u
    }
}

/// Continuous piecewise-linear field on Γ_h; values indexed by boundary
/// vertex position (see `FacetComplex::boundary_vertices`).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryP1Function {
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl BoundaryP1Function {
    pub fn get(&self, bv: usize) -> &[f64] {
        &self.values[bv * self.ncomp..(bv + 1) * self.ncomp]
    }
}

fn facet_rule(dim: usize, degree: usize) -> QuadratureRule {
    QuadratureRule::for_degree(dim - 1, degree)
}

/// Π_h: facet means of `v`, computed with a rule exact to degree `degree`.
pub fn cr_interpolate_with(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    degree: usize,
    v: impl Fn(&Point) -> Point,
) -> CrFunction {
    let rule = facet_rule(mesh.dim(), degree);
    let mut u = CrFunction::zeros(facets);
    for f in 0..facets.len() {
        let pts = facets.facet_points(mesh, f);
        let mut mean = [0.0; 3];
        let mut wsum = 0.0;
        for (x, _, w) in rule.mapped(&pts, 1.0) {
            let val = v(&x);
            for k in 0..3 {
                mean[k] += w * val[k];
            }
            wsum += w;
        }
        u.set_facet_value(f, &mean.map(|m| m / wsum));
    }
    u
}

pub fn cr_interpolate(mesh: &SimplexMesh, facets: &FacetComplex, v: impl Fn(&Point) -> Point) -> CrFunction {
    cr_interpolate_with(mesh, facets, DATA_DEGREE, v)
}

/// Π_h^∂: boundary facet means of the scalar `g`.
pub fn boundary_mean_with(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    degree: usize,
    g: impl Fn(&Point) -> f64,
) -> FacetFunction {
    let rule = facet_rule(mesh.dim(), degree);
    let values = facets
        .boundary_facets()
        .iter()
        .map(|&f| {
            let pts = facets.facet_points(mesh, f);
            let (mut s, mut wsum) = (0.0, 0.0);
            for (x, _, w) in rule.mapped(&pts, 1.0) {
                s += w * g(&x);
                wsum += w;
            }
            s / wsum
        })
        .collect();
    FacetFunction::scalar(values)
}

pub fn boundary_mean(mesh: &SimplexMesh, facets: &FacetComplex, g: impl Fn(&Point) -> f64) -> FacetFunction {
    boundary_mean_with(mesh, facets, DATA_DEGREE, g)
}

/// Π_h^∂ of the scalar `u·n_h` for a function `u` evaluable on Γ_h.
pub fn boundary_normal_mean(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    degree: usize,
    u: impl Fn(&Point) -> Point,
) -> FacetFunction {
    let rule = facet_rule(mesh.dim(), degree);
    let values = facets
        .boundary_facets()
        .iter()
        .map(|&f| {
            let pts = facets.facet_points(mesh, f);
            let nh = facets.facet(f).normal;
            let (mut s, mut wsum) = (0.0, 0.0);
            for (x, _, w) in rule.mapped(&pts, 1.0) {
                s += w * dot(&u(&x), &nh);
                wsum += w;
            }
            s / wsum
        })
        .collect();
    FacetFunction::scalar(values)
}

/// Boundary facet values `u_h(m_e)·n_h` of a CR function.
pub fn cr_normal_trace(u: &CrFunction, facets: &FacetComplex) -> FacetFunction {
    FacetFunction::scalar(
        facets.boundary_facets().iter().map(|&f| dot(&u.facet_value(f), &facets.facet(f).normal)).collect(),
    )
}

/// R_h: cell means of `p`.
pub fn p0_project_with(mesh: &SimplexMesh, degree: usize, p: impl Fn(&Point) -> f64) -> P0Function {
    let rule = QuadratureRule::for_degree(mesh.dim(), degree);
    let values = (0..mesh.n_cells())
        .map(|c| {
            let pts = mesh.cell_points(c);
            // unit measure turns the integral into a mean
            rule.integrate(&pts, 1.0, &p)
        })
        .collect();
    P0Function { values }
}

pub fn p0_project(mesh: &SimplexMesh, p: impl Fn(&Point) -> f64) -> P0Function {
    p0_project_with(mesh, DATA_DEGREE, p)
}

/// Tolerance on barycentric coordinates when deciding whether a point is in a cell.
const INSIDE_TOL: f64 = 1e-10;

/// Evaluates `u` restricted to `cell` at `x`.
pub fn cr_eval(u: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex, cell: usize, x: &Point) -> Result<Point> {
    let b = mesh.barycentric(cell, x);
    if b[..=mesh.dim()].iter().any(|&l| l < -INSIDE_TOL) {
        return Err(Error::PointOutsideCell { cell, point: *x });
    }
    Ok(u.eval_barycentric(facets, cell, &b))
}

/// E_h^∂: vertex value is the average of μ over the boundary facets
/// containing the vertex.
pub fn enrich_boundary(mu: &FacetFunction, facets: &FacetComplex) -> BoundaryP1Function {
    let m = mu.ncomp;
    let nbv = facets.boundary_vertices().len();
    let mut values = vec![0.0; m * nbv];
    for bv in 0..nbv {
        let adj = facets.facets_at_boundary_vertex(bv);
        for &b in adj {
            for k in 0..m {
                values[bv * m + k] += mu.get(b)[k] / adj.len() as f64;
            }
        }
    }
    BoundaryP1Function { ncomp: m, values }
}

/// E_h: vertex value is the average of the cell restrictions of `u` over
/// the cells containing the vertex.
pub fn enrich_volume(u: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> P1Function {
    let n = u.dim();
    let mut values = vec![0.0; n * mesh.n_vertices()];
    let mut count = vec![0usize; mesh.n_vertices()];
    for c in 0..mesh.n_cells() {
        for (i, &v) in mesh.cell(c).iter().enumerate() {
            let val = u.cell_vertex_value(facets, c, i);
            for k in 0..n {
                values[v * n + k] += val[k];
            }
            count[v] += 1;
        }
    }
    for (v, &cnt) in count.iter().enumerate() {
        for k in 0..n {
            values[v * n + k] /= cnt as f64;
        }
    }
    P1Function { ncomp: n, values }
}

/// Discrete lifting of boundary data: boundary facet DOFs are `μ n_h`,
/// interior facet DOFs come from the conforming P1 harmonic extension of
/// E_h^∂(μ n_h). The interior Laplace factorization is reused across calls.
pub struct DiscreteLift {
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
    stiffness_ib: Vec<Vec<(usize, f64)>>,
    solver: Option<DirectSolver>,
}

impl DiscreteLift {
    pub fn new(mesh: &SimplexMesh, facets: &FacetComplex) -> Result<Self> {
        let nv = mesh.n_vertices();
        let interior: Vec<usize> = (0..nv).filter(|&v| facets.boundary_vertex_index(v).is_none()).collect();
        let mut interior_index = vec![None; nv];
        for (i, &v) in interior.iter().enumerate() {
            interior_index[v] = Some(i);
        }
        let k = p1_stiffness(mesh);
        let mut t = TripletBuilder::new(interior.len(), interior.len());
        let mut stiffness_ib = vec![Vec::new(); interior.len()];
        for (i, &v) in interior.iter().enumerate() {
            for (w, val) in k.row(v) {
                match interior_index[w] {
                    Some(j) => t.push(i, j, val),
                    None => stiffness_ib[i].push((facets.boundary_vertex_index(w).unwrap(), val)),
                }
            }
        }
        let solver = if interior.is_empty() {
            None
        } else {
            Some(DirectSolver::spd(&t.build()).map_err(|e| Error::SolveFailure(format!("harmonic extension: {e}")))?)
        };
        Ok(Self { interior, interior_index, stiffness_ib, solver })
    }

    /// Conforming P1 harmonic extension of boundary data `g` (vector valued).
    pub fn harmonic_extension(&self, mesh: &SimplexMesh, facets: &FacetComplex, g: &BoundaryP1Function) -> P1Function {
        let m = g.ncomp;
        let nv = mesh.n_vertices();
        let mut values = vec![0.0; m * nv];
        for (bv, &v) in facets.boundary_vertices().iter().enumerate() {
            values[v * m..(v + 1) * m].copy_from_slice(g.get(bv));
        }
        if let Some(solver) = &self.solver {
            for k in 0..m {
                let rhs: Vec<f64> = self
                    .stiffness_ib
                    .iter()
                    .map(|row| -row.iter().map(|&(bv, a)| a * g.get(bv)[k]).sum::<f64>())
                    .collect();
                let (x, _) = solver.solve(&rhs);
                for (i, &v) in self.interior.iter().enumerate() {
                    values[v * m + k] = x[i];
                }
            }
        }
        debug_assert!(self.interior_index.len() == nv);
        P1Function { ncomp: m, values }
    }

    pub fn apply(&self, mesh: &SimplexMesh, facets: &FacetComplex, mu: &FacetFunction) -> CrFunction {
        let mun = mu.times_normal(facets);
        let ext = self.harmonic_extension(mesh, facets, &enrich_boundary(&mun, facets));
        let mut v = ext.to_cr(facets);
        for (b, &f) in facets.boundary_facets().iter().enumerate() {
            let mut val = [0.0; 3];
            val[..mun.ncomp].copy_from_slice(mun.get(b));
            v.set_facet_value(f, &val);
        }
        v
    }
}

pub fn discrete_lift(mu: &FacetFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> Result<CrFunction> {
    Ok(DiscreteLift::new(mesh, facets)?.apply(mesh, facets, mu))
}

/// Conforming P1 stiffness matrix (scalar Laplacian) over all vertices.
pub fn p1_stiffness(mesh: &SimplexMesh) -> crate::sparse::CsrMatrix {
    let n = mesh.dim();
    let mut t = TripletBuilder::with_capacity(mesh.n_vertices(), mesh.n_vertices(), mesh.n_cells() * (n + 1) * (n + 1));
    for c in 0..mesh.n_cells() {
        let g = mesh.barycentric_gradients(c);
        let vol = mesh.volume(c);
        let cell = mesh.cell(c);
        for i in 0..=n {
            for j in 0..=n {
                t.push(cell[i], cell[j], vol * dot(&g[i], &g[j]));
            }
        }
    }
    t.build()
}

/// Conforming P1 mass matrix (scalar) over all vertices.
pub fn p1_mass(mesh: &SimplexMesh) -> crate::sparse::CsrMatrix {
    let n = mesh.dim();
    let mut t = TripletBuilder::with_capacity(mesh.n_vertices(), mesh.n_vertices(), mesh.n_cells() * (n + 1) * (n + 1));
    let denom = ((n + 1) * (n + 2)) as f64;
    for c in 0..mesh.n_cells() {
        let vol = mesh.volume(c);
        let cell = mesh.cell(c);
        for i in 0..=n {
            for j in 0..=n {
                let factor = if i == j { 2.0 } else { 1.0 };
                t.push(cell[i], cell[j], vol * factor / denom);
            }
        }
    }
    t.build()
}
