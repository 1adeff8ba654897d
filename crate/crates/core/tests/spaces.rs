mod common;

use std::sync::OnceLock;

use common::level;
use cr_stokes::mesh::SimplexMesh;
use cr_stokes::quadrature::QuadratureRule;
use cr_stokes::spaces::*;
use cr_stokes::{FacetComplex, SmoothDomain};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk() -> &'static (SimplexMesh, FacetComplex) {
    static M: OnceLock<(SimplexMesh, FacetComplex)> = OnceLock::new();
    M.get_or_init(|| level(SmoothDomain::Disk2d, 2))
}

fn ball() -> &'static (SimplexMesh, FacetComplex) {
    static M: OnceLock<(SimplexMesh, FacetComplex)> = OnceLock::new();
    M.get_or_init(|| level(SmoothDomain::Ball3d, 1))
}

fn meshes() -> [&'static (SimplexMesh, FacetComplex); 2] {
    [disk(), ball()]
}

fn random_cr(fc: &FacetComplex, seed: u64) -> CrFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = CrFunction::zeros(fc);
    u.values_mut().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    u
}

fn barycentric(raw: [f64; 4], dim: usize) -> [f64; 4] {
    let s: f64 = raw[..=dim].iter().sum();
    std::array::from_fn(|i| if i <= dim { raw[i] / s } else { 0.0 })
}

fn cr_basis(dim: usize, b: &[f64; 4], i: usize) -> f64 {
    1.0 - dim as f64 * b[i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_a_partition_of_unity(raw in prop::array::uniform4(0.01f64..1.0), dim in 2usize..=3) {
        let b = barycentric(raw, dim);
        let s: f64 = (0..=dim).map(|i| cr_basis(dim, &b, i)).sum();
        prop_assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn evaluation_reproduces_affine_fields(seed in any::<u64>(), c in 0usize..20, raw in prop::array::uniform4(0.01f64..1.0)) {
        for (mesh, fc) in meshes() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m: [[f64; 4]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)));
            let affine = |x: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|a| m[a][3] + (0..3).map(|k| m[a][k] * x[k]).sum::<f64>()) };
            let u = cr_interpolate(mesh, fc, affine);
            let b = barycentric(raw, mesh.dim());
            let pts = mesh.cell_points(c);
            let x: [f64; 3] = std::array::from_fn(|k| (0..=mesh.dim()).map(|i| b[i] * pts[i][k]).sum());
            let got = cr_eval(&u, mesh, fc, c, &x).unwrap();
            let want = affine(&x);
            for a in 0..mesh.dim() {
                prop_assert!((got[a] - want[a]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interpolation_is_a_projection(seed in any::<u64>()) {
        // Π_h of the piecewise field, taken facet by facet from each adjacent cell
        let rule = QuadratureRule::for_degree(1, 8);
        let (mesh, fc) = disk();
        let u = random_cr(fc, seed);
        for f in 0..fc.len() {
            let e = fc.facet(f);
            let pts = fc.facet_points(mesh, f);
            for c in [Some(e.cells.0), e.cells.1].into_iter().flatten() {
                let mut mean = [0.0; 3];
                for (x, _, w) in rule.mapped(&pts, 1.0) {
                    let v = u.eval_barycentric(fc, c, &mesh.barycentric(c, &x));
                    for a in 0..2 {
                        mean[a] += w * v[a];
                    }
                }
                let dof = u.facet_value(f);
                for a in 0..2 {
                    prop_assert!((mean[a] - dof[a]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn r_h_is_orthogonal_to_piecewise_constants(coef in prop::array::uniform8(-3.0f64..3.0)) {
        let p = |x: &[f64; 3]| {
            let (a, b, c) = (x[0], x[1], x[2]);
            coef[0] + coef[1] * a + coef[2] * b * c + coef[3] * a * a * b + coef[4] * a.powi(4)
                + coef[5] * b.powi(3) * c + coef[6] * a * b * c * c + coef[7] * c.powi(4)
        };
        for (mesh, _) in meshes() {
            let rp = p0_project(mesh, p);
            let oracle = QuadratureRule::collapsed(mesh.dim(), 8);
            for c in 0..mesh.n_cells() {
                let pts = mesh.cell_points(c);
                let vol = mesh.volume(c);
                let exact = oracle.integrate(&pts, vol, p);
                prop_assert!((rp.values[c] * vol - exact).abs() < 1e-12 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn enriching_preserves_constants(c in -5.0f64..5.0) {
        for (mesh, fc) in meshes() {
            let mu = FacetFunction::scalar(vec![c; fc.n_boundary()]);
            prop_assert!(enrich_boundary(&mu, fc).values.iter().all(|v| (v - c).abs() < 1e-14));
            let mut u = CrFunction::zeros(fc);
            u.values_mut().iter_mut().for_each(|v| *v = c);
            let e = enrich_volume(&u, mesh, fc);
            prop_assert!(e.values.iter().all(|v| (v - c).abs() < 1e-13));
        }
    }

    #[test]
    fn enriching_preserves_conforming_fields(seed in any::<u64>()) {
        for (mesh, fc) in meshes() {
            let n = mesh.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..n * mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p1 = P1Function { ncomp: n, values };
            let back = enrich_volume(&p1.to_cr(fc), mesh, fc);
            for (a, b) in back.values.iter().zip(&p1.values) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn lift_matches_the_normal_trace(seed in any::<u64>()) {
        for (mesh, fc) in meshes() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = FacetFunction::scalar((0..fc.n_boundary()).map(|_| rng.random_range(-1.0..1.0)).collect());
            let v = discrete_lift(&mu, mesh, fc).unwrap();
            let tr = cr_normal_trace(&v, fc);
            for (a, b) in tr.values.iter().zip(&mu.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn nodal_property_at_facet_midpoints() {
    for dim in [2, 3] {
        for e in 0..=dim {
            // midpoint of the facet opposite vertex e
            let b: [f64; 4] = std::array::from_fn(|i| if i <= dim && i != e { 1.0 / dim as f64 } else { 0.0 });
            for i in 0..=dim {
                let expected = if i == e { 1.0 } else { 0.0 };
                assert!((cr_basis(dim, &b, i) - expected).abs() < 1e-15);
            }
        }
    }
    let (mesh, fc) = disk();
    let mut u = CrFunction::zeros(fc);
    let f = fc.cell_facets(0)[1];
    u.set_facet_value(f, &[1.0, -2.0, 0.0]);
    let v = cr_eval(&u, mesh, fc, 0, &fc.facet(f).midpoint).unwrap();
    assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] + 2.0).abs() < 1e-14);
}

#[test]
fn evaluation_outside_the_cell_is_rejected() {
    let (mesh, fc) = disk();
    let u = CrFunction::zeros(fc);
    assert!(cr_eval(&u, mesh, fc, 0, &[5.0, 5.0, 0.0]).is_err());
}

#[test]
fn enrich_boundary_on_the_hexagon() {
    let (_, fc) = level(SmoothDomain::Disk2d, 0);
    let alternating = FacetFunction::scalar((0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
    let e = enrich_boundary(&alternating, &fc);
    for bv in 0..6 {
        assert_eq!(fc.facets_at_boundary_vertex(bv).len(), 2);
    }
    assert!(e.values.iter().all(|&v| v == 0.0), "{:?}", e.values);
    let mut indicator = FacetFunction::scalar(vec![0.0; 6]);
    indicator.values[2] = 1.0;
    let e = enrich_boundary(&indicator, &fc);
    let mut halves = 0;
    for (bv, &v) in e.values.iter().enumerate() {
        if fc.facets_at_boundary_vertex(bv).contains(&2) {
            assert_eq!(v, 0.5);
            halves += 1;
        } else {
            assert_eq!(v, 0.0);
        }
    }
    assert_eq!(halves, 2);
}

#[test]
fn zero_data_lifts_to_zero() {
    for (mesh, fc) in meshes() {
        let v = discrete_lift(&FacetFunction::zeros(fc), mesh, fc).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));
    }
}

#[test]
fn r_h_of_the_disk_pressure_has_vanishing_mean() {
    let mut means = Vec::new();
    for r in 1..4 {
        let (mesh, _) = level(SmoothDomain::Disk2d, r);
        means.push(p0_project(&mesh, |x| 8.0 * x[0] * x[1]).integral(&mesh).abs());
    }
    assert!(means.iter().all(|&m| m < 1e-12), "{means:?}");
}
