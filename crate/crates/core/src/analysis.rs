//! Error norms, convergence orders and diagnostic quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cases::AnalyticSolution;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, Domain, Point};
use crate::linalg::DirectSolver;
use crate::mesh::{FacetComplex, SimplexMesh};
use crate::quadrature::{map_barycentric, QuadratureRule};
use crate::solver::Solution;
use crate::spaces::{enrich_boundary, enrich_volume, CrFunction, FacetFunction, P0Function};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Polynomial degree of the rules used for error integrals.
pub const ERROR_DEGREE: usize = 8;

/// Σ_T ‖u − u_h‖²_{L²(T)}
fn l2_squared(u: &dyn Fn(&Point) -> Point, uh: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex, degree: usize) -> f64 {
    let rule = QuadratureRule::for_degree(mesh.dim(), degree);
    let n = mesh.dim();
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        for (x, b, w) in rule.mapped(&pts, mesh.volume(c)) {
            let e = u(&x);
            let v = uh.eval_barycentric(facets, c, b);
            total += w * (0..n).map(|k| (e[k] - v[k]).powi(2)).sum::<f64>();
        }
    }
    total
}

/// Σ_T ‖∇u − ∇u_h‖²_{L²(T)}
fn grad_squared(
    grad: &dyn Fn(&Point) -> [[f64; 3]; 3],
    uh: &CrFunction,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    degree: usize,
) -> f64 {
    let rule = QuadratureRule::for_degree(mesh.dim(), degree);
    let n = mesh.dim();
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let gh = uh.cell_gradient(mesh, facets, c);
        let pts = mesh.cell_points(c);
        for (x, _, w) in rule.mapped(&pts, mesh.volume(c)) {
            let g = grad(&x);
            let mut s = 0.0;
            for a in 0..n {
                for k in 0..n {
                    s += (g[a][k] - gh[a][k]).powi(2);
                }
            }
            total += w * s;
        }
    }
    total
}

/// Σ_{e interior} h_e^{-1}‖⟦u_h⟧‖²_{L²(e)}
pub fn jump_seminorm_squared(uh: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> f64 {
    facets
        .interior_facets()
        .map(|f| uh.facet_jump_squared(mesh, facets, f) / facets.facet(f).diameter)
        .sum()
}

/// ‖ũ − u_h‖_{L²(Ω_h)}
pub fn error_l2(u: &dyn Fn(&Point) -> Point, uh: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> f64 {
    l2_squared(u, uh, mesh, facets, ERROR_DEGREE).sqrt()
}

/// (Σ_T ‖∇(ũ − u_h)‖²_{L²(T)})^{1/2}
pub fn error_broken_h1(
    grad: &dyn Fn(&Point) -> [[f64; 3]; 3],
    uh: &CrFunction,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
) -> f64 {
    grad_squared(grad, uh, mesh, facets, ERROR_DEGREE).sqrt()
}

/// ⫴ũ − u_h⫴_{V_h}; the exact field has no jumps.
pub fn error_triple_norm(sol: &AnalyticSolution, uh: &CrFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> f64 {
    (l2_squared(&*sol.u, uh, mesh, facets, ERROR_DEGREE)
        + grad_squared(&*sol.grad_u, uh, mesh, facets, ERROR_DEGREE)
        + jump_seminorm_squared(uh, mesh, facets))
    .sqrt()
}

/// ‖p̃ − p_h‖_{L²(Ω_h)} for a piecewise-constant p_h.
pub fn error_pressure(p: &dyn Fn(&Point) -> f64, ph: &P0Function, mesh: &SimplexMesh) -> f64 {
    let rule = QuadratureRule::for_degree(mesh.dim(), ERROR_DEGREE);
    (0..mesh.n_cells())
        .map(|c| rule.integrate(&mesh.cell_points(c), mesh.volume(c), |x| (p(x) - ph.values[c]).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// Facet means of ũ·n_h − g̃ on every boundary facet.
pub fn flux_defect_means(
    u: &dyn Fn(&Point) -> Point,
    g: &dyn Fn(&Point) -> f64,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
) -> FacetFunction {
    let rule = QuadratureRule::for_degree(mesh.dim() - 1, ERROR_DEGREE);
    FacetFunction::scalar(
        facets
            .boundary_facets()
            .iter()
            .map(|&f| {
                let nh = facets.facet(f).normal;
                rule.integrate(&facets.facet_points(mesh, f), 1.0, |x| dot(&u(x), &nh) - g(x))
            })
            .collect(),
    )
}

/// ‖Π_h^∂(ũ·n_h − g̃)‖_{L²(Γ_h)} and (Σ_e h_e^{-1}‖Π_h^∂(ũ·n_h − g̃)‖²_{L²(e)})^{1/2}.
pub fn flux_defect(
    u: &dyn Fn(&Point) -> Point,
    g: &dyn Fn(&Point) -> f64,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
) -> (f64, f64) {
    let m = flux_defect_means(u, g, mesh, facets);
    let (mut global, mut weighted) = (0.0, 0.0);
    for (b, &f) in facets.boundary_facets().iter().enumerate() {
        let e = facets.facet(f);
        let s = e.measure * m.values[b].powi(2);
        global += s;
        weighted += s / e.diameter;
    }
    (global.sqrt(), weighted.sqrt())
}

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub h: f64,
    pub l2_u: f64,
    /// ⫴ũ − u_h⫴_{V_h}
    pub h1_u: f64,
    /// broken H¹ seminorm of ũ − u_h
    pub h1_semi_u: f64,
    /// ‖p̃ − p̊_h‖
    pub l2_p: f64,
    /// ‖p̃ − p_h‖
    pub l2_p_raw: f64,
    pub flux: f64,
    pub flux_weighted: f64,
}

pub fn error_record(
    sol: &AnalyticSolution,
    g: &dyn Fn(&Point) -> f64,
    solution: &Solution,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
) -> ErrorRecord {
    let (flux, flux_weighted) = flux_defect(&*sol.u, g, mesh, facets);
    ErrorRecord {
        h: mesh.mesh_size(),
        l2_u: error_l2(&*sol.u, &solution.u, mesh, facets),
        h1_u: error_triple_norm(sol, &solution.u, mesh, facets),
        h1_semi_u: error_broken_h1(&*sol.grad_u, &solution.u, mesh, facets),
        l2_p: error_pressure(&*sol.p, &solution.p_mean_free, mesh),
        l2_p_raw: error_pressure(&*sol.p, &solution.p, mesh),
        flux,
        flux_weighted,
    }
}

/// log(e_i/e_{i+1}) / log(h_i/h_{i+1}) for consecutive levels.
pub fn eoc(h: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(h.len(), e.len());
    if let Some(level) = e.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroError { column: String::new(), level });
    }
    Ok(h.windows(2).zip(e.windows(2)).map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect())
}

/// Per-level error records with estimated orders.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub records: Vec<ErrorRecord>,
}

impl ConvergenceReport {
    pub fn h(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.h).collect()
    }

    pub fn column(&self, f: impl Fn(&ErrorRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Orders of one column; entry i compares levels i and i+1.
    pub fn orders(&self, name: &str, f: impl Fn(&ErrorRecord) -> f64) -> Result<Vec<f64>> {
        eoc(&self.h(), &self.column(f)).map_err(|e| match e {
            Error::ZeroError { level, .. } => Error::ZeroError { column: name.to_string(), level },
            other => other,
        })
    }
}

/// Physical points and barycentric coordinates (w.r.t. the parent facet)
/// of a sub-simplex of a boundary facet.
#[derive(Clone)]
struct Piece {
    bary: Vec<[f64; 4]>,
    pts: Vec<Point>,
}

impl Piece {
    fn whole(pts: Vec<Point>) -> Self {
        let bary = (0..pts.len())
            .map(|i| {
                let mut b = [0.0; 4];
                b[i] = 1.0;
                b
            })
            .collect();
        Self { bary, pts }
    }

    fn children(&self) -> Vec<Piece> {
        let mid = |i: usize, j: usize| -> ([f64; 4], Point) {
            (
                std::array::from_fn(|k| 0.5 * (self.bary[i][k] + self.bary[j][k])),
                std::array::from_fn(|k| 0.5 * (self.pts[i][k] + self.pts[j][k])),
            )
        };
        let v = |i: usize| (self.bary[i], self.pts[i]);
        let groups: Vec<Vec<([f64; 4], Point)>> = if self.pts.len() == 2 {
            vec![vec![v(0), mid(0, 1)], vec![mid(0, 1), v(1)]]
        } else {
            vec![
                vec![v(0), mid(0, 1), mid(0, 2)],
                vec![mid(0, 1), v(1), mid(1, 2)],
                vec![mid(0, 2), mid(1, 2), v(2)],
                vec![mid(1, 2), mid(0, 2), mid(0, 1)],
            ]
        };
        groups
            .into_iter()
            .map(|g| Piece { bary: g.iter().map(|p| p.0).collect(), pts: g.iter().map(|p| p.1).collect() })
            .collect()
    }

    fn touches(&self, other: &Piece, tol: f64) -> bool {
        self.pts.iter().any(|p| other.pts.iter().any(|q| dist(p, q) <= tol))
    }

    fn measure(&self) -> f64 {
        crate::mesh::simplex_measure(&self.pts)
    }

    /// Quadrature points as (physical point, parent barycentric, weight).
    fn points(&self, rule: &QuadratureRule) -> Vec<(Point, [f64; 4], f64)> {
        rule.mapped(&self.pts, self.measure())
            .map(|(x, b, w)| {
                let mut pb = [0.0; 4];
                for (l, vb) in b.iter().zip(&self.bary) {
                    for k in 0..4 {
                        pb[k] += l * vb[k];
                    }
                }
                (x, pb, w)
            })
            .collect()
    }
}

/// Calls `f(x, bx, y, by, w)` for a quadrature of ∫_{e1}∫_{e2} over a pair
/// of boundary facets. Touching pairs are subdivided `depth` times towards
/// their common points; coincident quadrature points are skipped.
fn pair_quadrature(
    e1: &Piece,
    e2: &Piece,
    depth: usize,
    rule: &QuadratureRule,
    tol: f64,
    f: &mut dyn FnMut(&Point, &[f64; 4], &Point, &[f64; 4], f64),
) {
    if depth > 0 && e1.touches(e2, tol) {
        let (c1, c2) = (e1.children(), e2.children());
        for a in &c1 {
            for b in &c2 {
                pair_quadrature(a, b, depth - 1, rule, tol, f);
            }
        }
        return;
    }
    let p1 = e1.points(rule);
    let p2 = e2.points(rule);
    for (x, bx, wx) in &p1 {
        for (y, by, wy) in &p2 {
            if dist(x, y) > tol {
                f(x, bx, y, by, wx * wy);
            }
        }
    }
}

/// Subdivision depth for touching facet pairs.
fn singular_depth(dim: usize) -> usize {
    if dim == 2 {
        4
    } else {
        2
    }
}

/// Visits every ordered pair of boundary facets once, passing `2` as the
/// multiplicity of off-diagonal pairs.
fn for_each_facet_pair(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    f: &mut dyn FnMut(usize, usize, &Point, &[f64; 4], &Point, &[f64; 4], f64),
) {
    let n = mesh.dim();
    let rule = QuadratureRule::for_degree(n - 1, 4);
    let depth = singular_depth(n);
    let pieces: Vec<Piece> = facets.boundary_facets().iter().map(|&e| Piece::whole(facets.facet_points(mesh, e))).collect();
    let tol = 1e-12 * mesh.mesh_size();
    for i in 0..pieces.len() {
        for j in i..pieces.len() {
            let mult = if i == j { 1.0 } else { 2.0 };
            pair_quadrature(&pieces[i], &pieces[j], depth, &rule, tol, &mut |x, bx, y, by, w| {
                f(i, j, x, bx, y, by, mult * w)
            });
        }
    }
}

/// ‖v‖_{H^{1/2}(Γ_h)} = (‖v‖²_{L²(Γ_h)} + |v|²_{H^{1/2}(Γ_h)})^{1/2} of a
/// scalar field evaluable on Γ_h.
pub fn h_half_norm(mesh: &SimplexMesh, facets: &FacetComplex, v: &dyn Fn(&Point) -> f64) -> f64 {
    let n = mesh.dim() as i32;
    let mut semi = 0.0;
    for_each_facet_pair(mesh, facets, &mut |_, _, x, _, y, _, w| {
        semi += w * (v(x) - v(y)).powi(2) / dist(x, y).powi(n);
    });
    let rule = QuadratureRule::for_degree(mesh.dim() - 1, ERROR_DEGREE);
    let l2: f64 = facets
        .boundary_facets()
        .iter()
        .map(|&f| rule.integrate(&facets.facet_points(mesh, f), facets.facet(f).measure, |x| v(x).powi(2)))
        .sum();
    (l2 + semi).sqrt()
}

/// Dense symmetric matrix in row-major order.
#[derive(Debug, Clone)]
pub struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * (0..self.n).map(|j| self.get(i, j) * x[j]).sum::<f64>()).sum()
    }

    fn to_csr(&self) -> CsrMatrix {
        let mut t = TripletBuilder::with_capacity(self.n, self.n, self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.build()
    }
}

/// Gram matrix of the discrete H^{1/2} norm on Λ_h, split into its parts.
pub struct HalfNormGram {
    /// Eᵀ(S + M)E: the H^{1/2}(Γ_h) norm of E_h^∂μ
    pub enriched: DenseSym,
    /// neighbour differences weighted by h_e^{N−2}
    pub neighbours: DenseSym,
    /// h |e| on the diagonal
    pub l2: Vec<f64>,
    pub total: DenseSym,
    measures: Vec<f64>,
    factor: Option<DirectSolver>,
}

impl HalfNormGram {
    pub fn build(mesh: &SimplexMesh, facets: &FacetComplex) -> Result<Self> {
        let n = mesh.dim();
        let nb = facets.n_boundary();
        let nbv = facets.boundary_vertices().len();
        let bverts: Vec<Vec<usize>> = facets
            .boundary_facets()
            .iter()
            .map(|&f| facets.facet(f).vertices[..n].iter().map(|&v| facets.boundary_vertex_index(v).unwrap()).collect())
            .collect();

        // Slobodeckij + L² Gram of boundary P1 hat functions
        let mut s = DenseSym::zeros(nbv);
        let kernel_exp = n as i32;
        for_each_facet_pair(mesh, facets, &mut |i, j, x, bx, y, by, w| {
            let k = w / dist(x, y).powi(kernel_exp);
            let mut idx = [0usize; 6];
            let mut val = [0.0; 6];
            let mut len = 0;
            for (a, &v) in bverts[i].iter().enumerate() {
                idx[len] = v;
                val[len] = bx[a];
                len += 1;
            }
            for (a, &v) in bverts[j].iter().enumerate() {
                if let Some(p) = idx[..len].iter().position(|&u| u == v) {
                    val[p] -= by[a];
                } else {
                    idx[len] = v;
                    val[len] = -by[a];
                    len += 1;
                }
            }
            for p in 0..len {
                for q in 0..len {
                    s.add(idx[p], idx[q], k * val[p] * val[q]);
                }
            }
        });
        let denom = (n * (n + 1)) as f64;
        for (b, &f) in facets.boundary_facets().iter().enumerate() {
            let m = facets.facet(f).measure;
            for (p, &vp) in bverts[b].iter().enumerate() {
                for (q, &vq) in bverts[b].iter().enumerate() {
                    s.add(vp, vq, m * if p == q { 2.0 } else { 1.0 } / denom);
                }
            }
        }

        // E: boundary vertex value = mean of adjacent facet values
        let mut e_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nbv);
        for bv in 0..nbv {
            let adj = facets.facets_at_boundary_vertex(bv);
            e_rows.push(adj.iter().map(|&b| (b, 1.0 / adj.len() as f64)).collect());
        }
        let mut enriched = DenseSym::zeros(nb);
        for p in 0..nbv {
            for q in 0..nbv {
                let spq = s.get(p, q);
                if spq == 0.0 {
                    continue;
                }
                for &(a, wa) in &e_rows[p] {
                    for &(b, wb) in &e_rows[q] {
                        enriched.add(a, b, spq * wa * wb);
                    }
                }
            }
        }

        let mut neighbours = DenseSym::zeros(nb);
        for b in 0..nb {
            let he = facets.facet(facets.boundary_facets()[b]).diameter;
            let w = he.powi(n as i32 - 2);
            for c in facets.boundary_neighbours(b) {
                if c == b {
                    continue;
                }
                neighbours.add(b, b, w);
                neighbours.add(c, c, w);
                neighbours.add(b, c, -w);
                neighbours.add(c, b, -w);
            }
        }

        let h = mesh.mesh_size();
        let measures: Vec<f64> = facets.boundary_facets().iter().map(|&f| facets.facet(f).measure).collect();
        let l2: Vec<f64> = measures.iter().map(|m| h * m).collect();
        let mut total = DenseSym::zeros(nb);
        for i in 0..nb {
            for j in 0..nb {
                total.data[i * nb + j] = enriched.get(i, j) + neighbours.get(i, j);
            }
            total.add(i, i, l2[i]);
        }
        // symmetrize against summation-order round-off
        for i in 0..nb {
            for j in 0..i {
                let m = 0.5 * (total.get(i, j) + total.get(j, i));
                total.data[i * nb + j] = m;
                total.data[j * nb + i] = m;
            }
        }
        Ok(Self { enriched, neighbours, l2, total, measures, factor: None })
    }

    fn factor(&mut self) -> Result<&DirectSolver> {
        if self.factor.is_none() {
            self.factor = Some(DirectSolver::spd(&self.total.to_csr()).map_err(|_| Error::SingularGram)?);
        }
        Ok(self.factor.as_ref().unwrap())
    }

    /// ‖μ‖_{1/2,Λ_h}
    pub fn norm(&self, mu: &FacetFunction) -> f64 {
        self.total.quad_form(&mu.values).max(0.0).sqrt()
    }

    /// The maximizer λ* of c_h(μ, λ)/‖λ‖_{1/2,Λ_h} (up to scaling).
    pub fn dual_maximizer(&mut self, mu: &FacetFunction) -> Result<FacetFunction> {
        let rhs: Vec<f64> = mu.values.iter().zip(&self.measures).map(|(m, e)| m * e).collect();
        let (x, _) = self.factor()?.solve(&rhs);
        Ok(FacetFunction::scalar(x))
    }

    /// ‖μ‖_{−1/2,Λ_h} = sup_λ c_h(μ, λ)/‖λ‖_{1/2,Λ_h}
    pub fn dual_norm(&mut self, mu: &FacetFunction) -> Result<f64> {
        if mu.values.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let lam = self.dual_maximizer(mu)?;
        let c: f64 = mu.values.iter().zip(&lam.values).zip(&self.measures).map(|((m, l), e)| m * l * e).sum();
        Ok(c.max(0.0).sqrt())
    }
}

pub fn discrete_h_half_norm(mu: &FacetFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> Result<f64> {
    Ok(HalfNormGram::build(mesh, facets)?.norm(mu))
}

pub fn dual_half_norm(mu: &FacetFunction, mesh: &SimplexMesh, facets: &FacetComplex) -> Result<f64> {
    HalfNormGram::build(mesh, facets)?.dual_norm(mu)
}

/// ‖v‖_{V_h}² from the Gram matrix of the norm.
pub fn vh_norm(gram: &CsrMatrix, v: &CrFunction) -> f64 {
    gram.quad_form(v.values()).max(0.0).sqrt()
}

/// ‖v‖_{L²(Ω_h∖Ω)} for a field given per cell as `v(cell, bary, x)`.
/// Cells touching Γ_h are integrated with a composite rule masked by the
/// sign of the distance function.
pub fn skin_l2(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    domain: &dyn Domain,
    v: &dyn Fn(usize, &[f64; 4], &Point) -> Point,
) -> f64 {
    let rule = QuadratureRule::collapsed_composite(mesh.dim(), 4, 4);
    let mut on_boundary = vec![false; mesh.n_vertices()];
    for &bv in facets.boundary_vertices() {
        on_boundary[bv] = true;
    }
    let mut outside = 0.0;
    for c in 0..mesh.n_cells() {
        if !mesh.cell(c).iter().any(|&p| on_boundary[p]) {
            continue;
        }
        let pts = mesh.cell_points(c);
        for (x, b, w) in rule.mapped(&pts, mesh.volume(c)) {
            if domain.signed_distance(&x) > 0.0 {
                let val = v(c, b, &x);
                outside += w * dot(&val, &val);
            }
        }
    }
    outside.sqrt()
}

/// ‖v‖_{L²(Ω_h∖Ω)} / (h ⫴v⫴_{V_h}).
pub fn boundary_skin_ratio(
    v: &CrFunction,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    domain: &dyn Domain,
    triple_norm: f64,
) -> f64 {
    if triple_norm == 0.0 {
        return 0.0;
    }
    skin_l2(mesh, facets, domain, &|c, b, _| v.eval_barycentric(facets, c, b)) / (mesh.mesh_size() * triple_norm)
}

/// CR function with i.i.d. uniform DOFs in [−1, 1].
pub fn random_cr(facets: &FacetComplex, rng: &mut ChaCha8Rng) -> CrFunction {
    let mut u = CrFunction::zeros(facets);
    u.values_mut().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    u
}

/// Discrete Korn ratio min (a_h + j_h)(v, v)/‖v‖²_{V_h} over random fields,
/// a rigid rotation and a few smooth fields.
pub fn korn_ratio(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    a_plus_j: &CsrMatrix,
    vh_gram: &CsrMatrix,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields: Vec<CrFunction> = (0..samples).map(|_| random_cr(facets, &mut rng)).collect();
    fields.push(crate::spaces::cr_interpolate(mesh, facets, |x| [-x[1], x[0], 0.0]));
    if mesh.dim() == 3 {
        fields.push(crate::spaces::cr_interpolate(mesh, facets, |x| [0.0, -x[2], x[1]]));
    }
    fields.push(crate::spaces::cr_interpolate(mesh, facets, |x| [(3.0 * x[1]).sin(), (2.0 * x[0]).cos(), x[0] * x[1]]));
    fields
        .iter()
        .map(|v| a_plus_j.quad_form(v.values()) / vh_gram.quad_form(v.values()))
        .fold(f64::INFINITY, f64::min)
}

/// Largest Σ_e h_e^{-1}‖⟦v⟧‖² / Σ_T‖∇v‖² over random fields.
pub fn jump_equivalence_ratio(
    facets: &FacetComplex,
    jump_gram: &CsrMatrix,
    stiffness: &CsrMatrix,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = random_cr(facets, &mut rng);
            jump_gram.quad_form(v.values()) / stiffness.quad_form(v.values())
        })
        .fold(0.0, f64::max)
}

/// Measured inf-sup constant of b_h on V̊_h × Q̊_h: min over random
/// mean-zero q of sup_v b_h(q, v)/(‖v‖_{V_h}‖q‖).
pub fn inf_sup_constant(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    b: &CsrMatrix,
    vh_gram: &CsrMatrix,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = mesh.dim();
    let interior: Vec<usize> = facets.interior_facets().flat_map(|f| (0..n).map(move |a| f * n + a)).collect();
    let k = vh_gram.submatrix(&interior, &interior);
    let solver = DirectSolver::spd(&k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol = mesh.total_volume();
    let mut beta = f64::INFINITY;
    for _ in 0..samples {
        let mut q = P0Function { values: (0..mesh.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect() };
        q = q.shifted(-q.integral(mesh) / vol);
        let r_full = b.mul_vec_transposed(&q.values);
        let r: Vec<f64> = interior.iter().map(|&i| r_full[i]).collect();
        let (x, _) = solver.solve(&r);
        let sup = r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
        let qn = q.values.iter().enumerate().map(|(c, v)| v * v * mesh.volume(c)).sum::<f64>().sqrt();
        beta = beta.min(sup / qn);
    }
    Ok(beta)
}

/// ‖v − E_h v‖_{V_h} / (Σ_e h_e^{-1}‖⟦v⟧‖²)^{1/2} over random fields (max).
pub fn enrich_volume_ratio(
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    vh_gram: &CsrMatrix,
    jump_gram: &CsrMatrix,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = random_cr(facets, &mut rng);
            let mut d = v.clone();
            d.add_scaled(&enrich_volume(&v, mesh, facets).to_cr(facets), -1.0);
            vh_norm(vh_gram, &d) / jump_gram.quad_form(v.values()).sqrt()
        })
        .fold(0.0, f64::max)
}

/// E_h^∂ applied to μ and evaluated at a boundary point of facet `b` with
/// facet barycentric coordinates `bary`.
pub fn enriched_value(mu: &FacetFunction, facets: &FacetComplex, b: usize, bary: &[f64; 4]) -> f64 {
    let e = enrich_boundary(mu, facets);
    let f = facets.facet(facets.boundary_facets()[b]);
    f.vertices[..facets.dim()]
        .iter()
        .enumerate()
        .map(|(k, &v)| bary[k] * e.get(facets.boundary_vertex_index(v).unwrap())[0])
        .sum()
}

/// Interpolation benchmark: (‖ũ − Π_hũ‖_{L²}, ⫴ũ − Π_hũ⫴).
pub fn interpolation_errors(sol: &AnalyticSolution, mesh: &SimplexMesh, facets: &FacetComplex) -> (f64, f64) {
    let pi = crate::spaces::cr_interpolate_with(mesh, facets, ERROR_DEGREE, &*sol.u);
    (error_l2(&*sol.u, &pi, mesh, facets), error_triple_norm(sol, &pi, mesh, facets))
}

/// Physical point of a barycentric coordinate on a boundary facet.
pub fn facet_point(mesh: &SimplexMesh, facets: &FacetComplex, b: usize, bary: &[f64; 4]) -> Point {
    map_barycentric(bary, &facets.facet_points(mesh, facets.boundary_facets()[b]))
}
