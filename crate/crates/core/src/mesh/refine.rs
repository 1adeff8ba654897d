use std::collections::{HashMap, HashSet};

use super::{SimplexMesh, MIN_REGULARITY};
use crate::error::{Error, Result};
use crate::geometry::{dist, Domain, SmoothDomain};

type Edge = (usize, usize);

fn edge(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Edges lying on boundary facets (facets owned by exactly one cell).
fn boundary_edges(mesh: &SimplexMesh) -> HashSet<Edge> {
    let n = mesh.dim();
    let mut count: HashMap<[usize; 3], usize> = HashMap::new();
    for cell in mesh.cells() {
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
            *count.entry(key).or_default() += 1;
        }
    }
    let mut edges = HashSet::new();
    for (key, c) in count {
        if c == 1 {
            for i in 0..n {
                for j in i + 1..n {
                    edges.insert(edge(key[i], key[j]));
                }
            }
        }
    }
    edges
}

pub(super) fn refine(mesh: &SimplexMesh, domain: SmoothDomain) -> Result<SimplexMesh> {
    let n = mesh.dim();
    let on_boundary = boundary_edges(mesh);
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<Edge, usize> = HashMap::new();

    // Midpoint vertices are created in cell/edge order so numbering is deterministic.
    let mut cell_mids = Vec::with_capacity(mesh.n_cells());
    for cell in mesh.cells() {
        let mut mids = [[usize::MAX; 4]; 4];
        for i in 0..=n {
            for j in i + 1..=n {
                let e = edge(cell[i], cell[j]);
                let idx = match midpoints.get(&e) {
                    Some(&m) => m,
                    None => {
                        let (a, b) = (vertices[e.0], vertices[e.1]);
                        let mut x = [0.0; 3];
                        for k in 0..3 {
                            x[k] = 0.5 * (a[k] + b[k]);
                        }
                        if on_boundary.contains(&e) {
                            x = domain.project_to_boundary(&x)?;
                        }
                        vertices.push(x);
                        midpoints.insert(e, vertices.len() - 1);
                        vertices.len() - 1
                    }
                };
                mids[i][j] = idx;
                mids[j][i] = idx;
            }
        }
        cell_mids.push(mids);
    }

    let mut out = SimplexMesh::new_unchecked(n, vertices, Vec::with_capacity(mesh.n_cells() << n));
    for (cell, m) in mesh.cells().zip(&cell_mids) {
        let children: Vec<[usize; 4]> = if n == 2 {
            let (a, b, c) = (cell[0], cell[1], cell[2]);
            vec![
                [a, m[0][1], m[0][2], usize::MAX],
                [m[0][1], b, m[1][2], usize::MAX],
                [m[0][2], m[1][2], c, usize::MAX],
                [m[0][1], m[1][2], m[0][2], usize::MAX],
            ]
        } else {
            red_tetrahedron(&out, cell, m)
        };
        for mut child in children {
            out.orient(&mut child);
            out.cells.push(child);
        }
    }

    for c in 0..out.n_cells() {
        let v = out.signed_volume(c);
        if !(v > 0.0) {
            return Err(Error::InvertedCell { cell: c, volume: v });
        }
    }
    let ratio = out.min_regularity();
    if ratio < MIN_REGULARITY {
        return Err(Error::RegularityViolation { ratio, threshold: MIN_REGULARITY });
    }
    Ok(out)
}

/// Eight-child split: four corner tetrahedra plus the inner octahedron cut
/// along its shortest diagonal.
fn red_tetrahedron(mesh: &SimplexMesh, cell: &[usize], m: &[[usize; 4]; 4]) -> Vec<[usize; 4]> {
    let mut children = Vec::with_capacity(8);
    for i in 0..4 {
        let mut child = [cell[i]; 4];
        let mut k = 1;
        for j in 0..4 {
            if j != i {
                child[k] = m[i][j];
                k += 1;
            }
        }
        children.push(child);
    }
    // Opposite midpoint pairs of the inner octahedron.
    let pairs = [(m[0][1], m[2][3]), (m[0][2], m[1][3]), (m[0][3], m[1][2])];
    let x = &mesh.vertices;
    let (best, _) = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (i, dist(&x[a], &x[b])))
        .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
    let (a, b) = pairs[best];
    let (p, q) = (pairs[(best + 1) % 3], pairs[(best + 2) % 3]);
    // ring around the diagonal: consecutive entries are octahedron neighbours
    let ring = [p.0, q.0, p.1, q.1];
    for k in 0..4 {
        children.push([a, b, ring[k], ring[(k + 1) % 4]]);
    }
    children
}
