//! Plain-text mesh format:
//!
//! ```text
//! DIM 2
//! VERTICES 3
//! 0 0
//! 1 0
//! 0 1
//! CELLS 1
//! 0 1 2
//! ```
//!
//! Indices are zero based; `#` starts a comment.

use std::fmt::Write as _;

use super::SimplexMesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone)]
pub struct ImportedMesh {
    pub mesh: SimplexMesh,
    /// Cells whose vertex order was swapped to make their volume positive.
    pub repaired_cells: Vec<usize>,
}

impl ImportedMesh {
    pub fn orientation_repaired(&self) -> bool {
        !self.repaired_cells.is_empty()
    }
}

pub fn export_mesh(mesh: &SimplexMesh) -> String {
    let n = mesh.dim();
    let mut s = String::new();
    writeln!(s, "DIM {n}").unwrap();
    writeln!(s, "VERTICES {}", mesh.n_vertices()).unwrap();
    for v in mesh.vertices() {
        let coords: Vec<String> = v[..n].iter().map(|x| format!("{x:?}")).collect();
        writeln!(s, "{}", coords.join(" ")).unwrap();
    }
    writeln!(s, "CELLS {}", mesh.n_cells()).unwrap();
    for cell in mesh.cells() {
        let idx: Vec<String> = cell.iter().map(|i| i.to_string()).collect();
        writeln!(s, "{}", idx.join(" ")).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            self.last = i + 1;
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_content().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn header(lines: &mut Lines<'_>, keyword: &str) -> Result<usize> {
    let (line, text) = lines.expect(keyword)?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(Error::Parse { line, message: format!("expected `{keyword} <count>`") });
    }
    let value = parts
        .next()
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse { line, message: format!("`{keyword}` needs a non-negative integer") })?;
    if parts.next().is_some() {
        return Err(Error::Parse { line, message: "trailing tokens".into() });
    }
    Ok(value)
}

pub fn import_mesh(text: &str) -> Result<ImportedMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let dim = header(&mut lines, "DIM")?;
    if dim != 2 && dim != 3 {
        return Err(Error::Parse { line: lines.last, message: format!("unsupported dimension {dim}") });
    }
    let nv = header(&mut lines, "VERTICES")?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = lines.expect("vertex coordinates")?;
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line, message: format!("bad coordinate: {e}") })?;
        if vals.len() != dim || vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse { line, message: format!("expected {dim} finite coordinates") });
        }
        let mut x = [0.0; 3];
        x[..dim].copy_from_slice(&vals);
        vertices.push(x);
    }
    let nc = header(&mut lines, "CELLS")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, text) = lines.expect("cell indices")?;
        let idx: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line, message: format!("bad vertex index: {e}") })?;
        if idx.len() != dim + 1 {
            return Err(Error::Parse { line, message: format!("expected {} vertex indices", dim + 1) });
        }
        if let Some(bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(Error::Parse { line, message: format!("vertex index {bad} out of range") });
        }
        let mut cell = [usize::MAX; 4];
        cell[..=dim].copy_from_slice(&idx);
        cells.push((line, cell));
    }
    if let Some((line, _)) = lines.next_content() {
        return Err(Error::Parse { line, message: "unexpected content after cells".into() });
    }

    let mut mesh = SimplexMesh::new_unchecked(dim, vertices, Vec::with_capacity(nc));
    let mut repaired_cells = Vec::new();
    for (c, (line, mut cell)) in cells.into_iter().enumerate() {
        let pts: Vec<Point> = cell[..=dim].iter().map(|&v| mesh.vertices[v]).collect();
        let vol = super::signed_volume(dim, &pts);
        if vol == 0.0 {
            return Err(Error::Parse { line, message: "degenerate cell".into() });
        }
        if vol < 0.0 {
            cell.swap(0, 1);
            repaired_cells.push(c);
        }
        mesh.cells.push(cell);
    }
    Ok(ImportedMesh { mesh, repaired_cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SmoothDomain;

    #[test]
    fn hexagon_export_counts() {
        let s = export_mesh(&SimplexMesh::coarse(SmoothDomain::Disk2d));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "DIM 2");
        assert_eq!(lines[1], "VERTICES 7");
        assert_eq!(lines[9], "CELLS 6");
        assert_eq!(lines.len(), 2 + 7 + 1 + 6);
    }

    #[test]
    fn round_trip_is_lossless() {
        for domain in [SmoothDomain::Disk2d, SmoothDomain::Ball3d] {
            let mesh = SimplexMesh::coarse(domain).refine(domain).unwrap();
            let s = export_mesh(&mesh);
            let back = import_mesh(&s).unwrap();
            assert!(!back.orientation_repaired());
            assert_eq!(back.mesh, mesh);
            assert_eq!(export_mesh(&back.mesh), s);
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a triangle\nDIM 2\n\nVERTICES 3 # three\n0 0\n1 0\n0 1\nCELLS 1\n0 1 2\n";
        let m = import_mesh(text).unwrap();
        assert_eq!(m.mesh.n_cells(), 1);
    }

    #[test]
    fn inverted_cell_is_repaired() {
        let text = "DIM 2\nVERTICES 3\n0 0\n1 0\n0 1\nCELLS 1\n0 2 1\n";
        let m = import_mesh(text).unwrap();
        assert!(m.orientation_repaired());
        assert!(m.mesh.signed_volume(0) > 0.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "DIM 2\nVERTICES 2\n0 0\n1 x\nCELLS 0\n";
        match import_mesh(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "DIM 2\nVERTICES 1\n0 0\nCELLS 1\n0 1 2\n";
        match import_mesh(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(import_mesh("DIM 4\n"), Err(Error::Parse { line: 1, .. })));
    }
}
