mod common;

use common::{hierarchy, level, max_ratio};
use cr_stokes::geometry::Domain;
use cr_stokes::mesh::{export_mesh, import_mesh, mesh_quality, MIN_REGULARITY};
use cr_stokes::{Error, SmoothDomain};
use proptest::prelude::*;

fn norm(x: &[f64; 3]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn annulus_point(dim: usize) -> impl Strategy<Value = [f64; 3]> {
    (0.5f64..1.5, prop::array::uniform3(-1.0f64..1.0))
        .prop_filter("direction", move |(_, d)| d[..dim].iter().map(|v| v * v).sum::<f64>() > 1e-2)
        .prop_map(move |(r, d)| {
            let mut x = [0.0; 3];
            x[..dim].copy_from_slice(&d[..dim]);
            let n = norm(&x);
            x.map(|v| r * v / n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn disk_projection_in_the_annulus(x in annulus_point(2)) {
        let d = SmoothDomain::Disk2d;
        let p = d.project_to_boundary(&x).unwrap();
        prop_assert!((norm(&p) - 1.0).abs() < 1e-12);
        prop_assert!((d.signed_distance(&x) - (norm(&x) - 1.0)).abs() < 1e-12);
        let n = d.outward_normal(&p).unwrap();
        let proj: f64 = (0..3).map(|k| n[k] * (x[k] - p[k])).sum();
        prop_assert!((proj - d.signed_distance(&x)).abs() < 1e-12);
    }

    #[test]
    fn ball_projection_in_the_annulus(x in annulus_point(3)) {
        let d = SmoothDomain::Ball3d;
        let p = d.project_to_boundary(&x).unwrap();
        prop_assert!((norm(&p) - 1.0).abs() < 1e-12);
        let n = d.outward_normal(&p).unwrap();
        prop_assert!((norm(&n) - 1.0).abs() < 1e-14);
        let proj: f64 = (0..3).map(|k| n[k] * (x[k] - p[k])).sum();
        prop_assert!((proj - d.signed_distance(&x)).abs() < 1e-12);
    }
}

#[test]
fn projection_rejects_the_center_and_normals_off_the_boundary() {
    for d in [SmoothDomain::Disk2d, SmoothDomain::Ball3d] {
        assert!(matches!(d.project_to_boundary(&[0.0; 3]), Err(Error::DegeneratePoint(_))));
        assert!(matches!(d.outward_normal(&[0.5, 0.0, 0.0]), Err(Error::NotOnBoundary { .. })));
    }
}

#[test]
fn facet_complex_invariants_hold_on_every_level() {
    for (domain, levels) in [(SmoothDomain::Disk2d, 4), (SmoothDomain::Ball3d, 3)] {
        for (mesh, fc) in hierarchy(domain, 0, levels) {
            for c in 0..mesh.n_cells() {
                assert!(mesh.signed_volume(c) > 0.0);
            }
            for f in 0..fc.len() {
                let e = fc.facet(f);
                match e.cells.1 {
                    Some(plus) => {
                        assert!(e.cells.0 < plus);
                        let (a, b) = (mesh.centroid(e.cells.0), mesh.centroid(plus));
                        let along: f64 = (0..3).map(|k| e.normal[k] * (b[k] - a[k])).sum();
                        assert!(along > 0.0);
                    }
                    None => {
                        let a = mesh.centroid(e.cells.0);
                        let out: f64 = (0..3).map(|k| e.normal[k] * (e.midpoint[k] - a[k])).sum();
                        assert!(out > 0.0);
                        for &v in &e.vertices[..mesh.dim()] {
                            assert!(domain.signed_distance(&mesh.vertices()[v]).abs() <= 1e-12);
                        }
                    }
                }
            }
            if mesh.dim() == 2 {
                let edges = fc.len() as i64;
                assert_eq!(mesh.n_vertices() as i64 - edges + mesh.n_cells() as i64, 1);
            }
        }
    }
}

#[test]
fn refinement_multiplies_cells_and_halves_h() {
    for (domain, levels) in [(SmoothDomain::Disk2d, 5), (SmoothDomain::Ball3d, 3)] {
        let meshes = hierarchy(domain, 0, levels);
        let factor = if domain == SmoothDomain::Disk2d { 4 } else { 8 };
        // the hexagon's first split pushes its chord midpoints outwards, so the
        // disk reference is the first refined level
        let reference = if domain == SmoothDomain::Disk2d { 1 } else { 0 };
        let coarse_reg = meshes[reference].0.min_regularity();
        for (i, w) in meshes.windows(2).enumerate() {
            assert_eq!(w[1].0.n_cells(), factor * w[0].0.n_cells());
            let ratio = w[1].0.mesh_size() / w[0].0.mesh_size();
            if domain == SmoothDomain::Disk2d && i > 0 {
                assert!((0.45..=0.60).contains(&ratio), "{ratio}");
            }
            assert!(ratio < 0.8, "{domain:?} {ratio}");
        }
        for (m, _) in &meshes[reference..] {
            assert!(m.min_regularity() >= MIN_REGULARITY);
            if domain == SmoothDomain::Disk2d {
                assert!(m.min_regularity() >= 0.8 * coarse_reg);
            }
        }
    }
}

#[test]
fn disk_area_and_skin_converge() {
    let mut areas = Vec::new();
    let mut skin = Vec::new();
    let mut h = Vec::new();
    for (mesh, fc) in hierarchy(SmoothDomain::Disk2d, 0, 7) {
        let q = mesh_quality(&mesh, &fc, &SmoothDomain::Disk2d);
        areas.push(q.volume);
        skin.push(q.skin_constant);
        h.push(q.h);
    }
    assert!((areas[0] - 1.5 * 3f64.sqrt()).abs() < 1e-12);
    for w in areas.windows(2) {
        assert!(w[0] < w[1] && w[1] < std::f64::consts::PI);
    }
    let err: Vec<f64> = areas.iter().map(|a| std::f64::consts::PI - a).collect();
    for i in 4..err.len() {
        let eoc = (err[i - 1] / err[i]).ln() / (h[i - 1] / h[i]).ln();
        assert!((eoc - 2.0).abs() < 0.1, "{eoc}");
    }
    assert!(max_ratio(&skin) < 2.0, "{skin:?}");
}

#[test]
fn ball_volume_matches_facet_flux() {
    // |Ω_h| = (1/N) ∫_{Γ_h} x·n_h, exact for the polytope
    for (domain, r) in [(SmoothDomain::Disk2d, 3), (SmoothDomain::Ball3d, 2)] {
        let (mesh, fc) = level(domain, r);
        let n = mesh.dim() as f64;
        let flux: f64 = fc
            .boundary_facets()
            .iter()
            .map(|&f| {
                let e = fc.facet(f);
                e.measure * (0..3).map(|k| e.midpoint[k] * e.normal[k]).sum::<f64>()
            })
            .sum();
        assert!((flux / n - mesh.total_volume()).abs() < 1e-12 * mesh.total_volume());
    }
}

#[test]
fn export_import_round_trips_refined_meshes() {
    for domain in [SmoothDomain::Disk2d, SmoothDomain::Ball3d] {
        let (mesh, _) = level(domain, 2);
        let text = export_mesh(&mesh);
        let back = import_mesh(&text).unwrap();
        assert!(!back.orientation_repaired());
        assert_eq!(back.mesh, mesh);
        assert_eq!(export_mesh(&back.mesh), text);
    }
}

#[test]
fn malformed_mesh_text_reports_the_line() {
    let text = "DIM 2\nVERTICES 3\n0 0\n1 0\n0 x\nCELLS 1\n0 1 2\n";
    match import_mesh(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
        other => panic!("{other:?}"),
    }
}
