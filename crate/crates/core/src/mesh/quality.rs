use super::{FacetComplex, SimplexMesh};
use crate::geometry::{Domain, Point};

/// Regularity and boundary-skin metrics of one mesh level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// max_T h_T
    pub h: f64,
    /// min_T ρ_T / h_T
    pub min_regularity: f64,
    /// max over boundary facets of max_{x ∈ e} |d(x)|
    pub max_skin: f64,
    /// max over boundary facets of (max_{x ∈ e} |d(x)|) / h_e²
    pub skin_constant: f64,
    /// |Ω_h|
    pub volume: f64,
    /// |Γ_h|
    pub boundary_measure: f64,
}

/// Order of the barycentric sampling lattice used for max |d| on a facet.
const SAMPLE_ORDER: usize = 8;

fn facet_samples(pts: &[Point]) -> Vec<Point> {
    let k = SAMPLE_ORDER;
    let mut out = Vec::new();
    match pts.len() {
        2 => {
            for i in 0..=k {
                let t = i as f64 / k as f64;
                out.push(std::array::from_fn(|c| (1.0 - t) * pts[0][c] + t * pts[1][c]));
            }
        }
        3 => {
            for i in 0..=k {
                for j in 0..=k - i {
                    let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
                    let l = 1.0 - a - b;
                    out.push(std::array::from_fn(|c| l * pts[0][c] + a * pts[1][c] + b * pts[2][c]));
                }
            }
            let m: Point = std::array::from_fn(|c| (pts[0][c] + pts[1][c] + pts[2][c]) / 3.0);
            out.push(m);
        }
        _ => out.extend_from_slice(pts),
    }
    out
}

/// Maximum of |d| over sample points of facet `f`.
pub(crate) fn facet_skin(mesh: &SimplexMesh, facets: &FacetComplex, domain: &dyn Domain, f: usize) -> f64 {
    facet_samples(&facets.facet_points(mesh, f))
        .iter()
        .map(|x| domain.signed_distance(x).abs())
        .fold(0.0, f64::max)
}

pub fn mesh_quality(mesh: &SimplexMesh, facets: &FacetComplex, domain: &dyn Domain) -> QualityReport {
    let mut max_skin: f64 = 0.0;
    let mut skin_constant: f64 = 0.0;
    for &f in facets.boundary_facets() {
        let d = facet_skin(mesh, facets, domain, f);
        let he = facets.facet(f).diameter;
        max_skin = max_skin.max(d);
        skin_constant = skin_constant.max(d / (he * he));
    }
    QualityReport {
        h: mesh.mesh_size(),
        min_regularity: mesh.min_regularity(),
        max_skin,
        skin_constant,
        volume: mesh.total_volume(),
        boundary_measure: facets.boundary_measure(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dot, SmoothDomain};

    fn levels(domain: SmoothDomain, n: usize) -> Vec<(SimplexMesh, FacetComplex)> {
        let mut mesh = SimplexMesh::coarse(domain);
        let mut out = Vec::new();
        for l in 0..n {
            if l > 0 {
                mesh = mesh.refine(domain).unwrap();
            }
            let fc = FacetComplex::build(&mesh).unwrap();
            out.push((mesh.clone(), fc));
        }
        out
    }

    #[test]
    fn hexagon_sag() {
        let domain = SmoothDomain::Disk2d;
        let mesh = SimplexMesh::coarse(domain);
        let fc = FacetComplex::build(&mesh).unwrap();
        let q = mesh_quality(&mesh, &fc, &domain);
        assert!((q.max_skin - (1.0 - 0.75f64.sqrt())).abs() < 1e-14);
        assert!((q.min_regularity - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((q.h - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_area_increases_towards_pi() {
        let mut prev = 0.0;
        for (mesh, _) in levels(SmoothDomain::Disk2d, 6) {
            let a = mesh.total_volume();
            assert!(a > prev && a < std::f64::consts::PI);
            prev = a;
        }
    }

    #[test]
    fn skin_constant_is_bounded_and_regularity_preserved() {
        let domain = SmoothDomain::Disk2d;
        let all = levels(domain, 7);
        // reference is the first refined level: the hexagon itself loses 15%
        // in its first split when the chord midpoints are pushed outwards
        let q1 = mesh_quality(&all[1].0, &all[1].1, &domain);
        let mut consts = Vec::new();
        for (mesh, fc) in &all[1..] {
            let q = mesh_quality(mesh, fc, &domain);
            assert!(q.min_regularity >= 0.8 * q1.min_regularity, "{q:?}");
            consts.push(q.skin_constant);
        }
        let (lo, hi) = consts.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        // chord sag is h_e²/8 for a unit circle
        assert!(hi < 0.2 && lo > 0.1, "{consts:?}");
    }

    #[test]
    fn volume_matches_divergence_theorem() {
        for domain in [SmoothDomain::Disk2d, SmoothDomain::Ball3d] {
            for (mesh, fc) in levels(domain, 4) {
                let n = mesh.dim() as f64;
                let flux: f64 = fc
                    .boundary_facets()
                    .iter()
                    .map(|&f| {
                        let e = fc.facet(f);
                        e.measure * dot(&e.midpoint, &e.normal)
                    })
                    .sum::<f64>()
                    / n;
                let vol = mesh.total_volume();
                assert!((flux - vol).abs() <= 1e-12 * vol);
            }
        }
    }

    #[test]
    fn ball_levels_stay_regular() {
        let domain = SmoothDomain::Ball3d;
        for (mesh, fc) in levels(domain, 3) {
            let q = mesh_quality(&mesh, &fc, &domain);
            assert!(q.min_regularity >= crate::mesh::MIN_REGULARITY);
            assert!(q.volume < 4.0 * std::f64::consts::PI / 3.0);
        }
    }
}
