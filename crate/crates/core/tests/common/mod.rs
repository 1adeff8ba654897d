#![allow(dead_code)]

use std::sync::Arc;

use cr_stokes::cases::AnalyticSolution;
use cr_stokes::{FacetComplex, SimplexMesh, SmoothDomain};

/// Meshes after `base`, `base + 1`, ... refinements of the coarse mesh.
pub fn hierarchy(domain: SmoothDomain, base: usize, levels: usize) -> Vec<(SimplexMesh, FacetComplex)> {
    let mut mesh = SimplexMesh::coarse(domain);
    for _ in 0..base {
        mesh = mesh.refine(domain).unwrap();
    }
    let mut out = Vec::new();
    for l in 0..levels {
        if l > 0 {
            mesh = mesh.refine(domain).unwrap();
        }
        let fc = FacetComplex::build(&mesh).unwrap();
        out.push((mesh.clone(), fc));
    }
    out
}

pub fn level(domain: SmoothDomain, refinements: usize) -> (SimplexMesh, FacetComplex) {
    hierarchy(domain, refinements, 1).pop().unwrap()
}

/// Exact solution u = 0, p = 0, so error norms become norms of u_h.
pub fn zero_solution(dim: usize) -> AnalyticSolution {
    AnalyticSolution {
        dim,
        nu: 1.0,
        u: Arc::new(|_| [0.0; 3]),
        p: Arc::new(|_| 0.0),
        grad_u: Arc::new(|_| [[0.0; 3]; 3]),
    }
}

pub fn max_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}
