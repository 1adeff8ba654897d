//! Direct solution of the saddle-point system and pressure/multiplier
//! postprocessing.

use crate::error::{Error, Result};
use crate::forms::SaddleSystem;
use crate::linalg::solve_saddle;
use crate::mesh::{FacetComplex, SimplexMesh};
use crate::spaces::{cr_normal_trace, CrFunction, FacetFunction, P0Function};

/// Residual contract: ‖Mx − b‖∞ ≤ RESIDUAL_TOL · (1 + ‖b‖∞).
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Backward error accepted from the factorization before falling back.
const BACKWARD_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: CrFunction,
    pub p: P0Function,
    /// (p_h, 1)_{Ω_h} / |Ω_h|
    pub k: f64,
    /// p_h − k_h
    pub p_mean_free: P0Function,
    pub multiplier: FacetFunction,
    /// ‖Mx − b‖∞
    pub residual: f64,
    pub backward_error: f64,
}

/// λ_h = (u_h(m_e)·n_h − ḡ_e) / ε on every boundary facet.
pub fn multiplier(u: &CrFunction, g_mean: &FacetFunction, facets: &FacetComplex, eps: f64) -> FacetFunction {
    let tr = cr_normal_trace(u, facets);
    FacetFunction::scalar(tr.values.iter().zip(&g_mean.values).map(|(t, g)| (t - g) / eps).collect())
}

pub fn solve(system: &SaddleSystem, mesh: &SimplexMesh, facets: &FacetComplex) -> Result<Solution> {
    let nv = system.n_velocity();
    let (x, backward_error) = solve_saddle(&system.matrix, nv, &system.rhs, BACKWARD_TOL)?;
    let mx = system.matrix.mul_vec(&x);
    let residual = mx.iter().zip(&system.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rhs_norm = system.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(residual <= RESIDUAL_TOL * (1.0 + rhs_norm)) {
        return Err(Error::SingularSystem(format!("residual {residual:e} for rhs norm {rhs_norm:e}")));
    }
    let u = CrFunction::from_values(mesh.dim(), x[..nv].to_vec());
    let p = P0Function { values: x[nv..].to_vec() };
    let k = p.mean(mesh);
    let p_mean_free = p.shifted(-k);
    let multiplier = multiplier(&u, &system.g_mean, facets, system.params.eps);
    log::debug!("solved {} unknowns, residual {residual:.2e}, backward error {backward_error:.2e}", x.len());
    Ok(Solution { u, p, k, p_mean_free, multiplier, residual, backward_error })
}
