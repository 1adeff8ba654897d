//! Quadrature on reference simplices.
//!
//! Points are stored in barycentric coordinates `(λ0, ..., λd)`; the weights
//! sum to the measure of the reference simplex (1, 1/2, 1/6 for d = 1, 2, 3).

use crate::geometry::Point;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    degree: usize,
    points: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        // map [-1, 1] -> [0, 1]
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Measure of the reference simplex of dimension `dim`.
    pub fn reference_measure(dim: usize) -> f64 {
        match dim {
            0 | 1 => 1.0,
            2 => 0.5,
            3 => 1.0 / 6.0,
            _ => panic!("unsupported simplex dimension {dim}"),
        }
    }

    /// Single point, for zero-dimensional facets.
    pub fn point() -> Self {
        Self {
            dim: 0,
            degree: usize::MAX,
            points: vec![[1.0, 0.0, 0.0, 0.0]],
            weights: vec![1.0],
        }
    }

    pub fn gauss_line(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            dim: 1,
            degree: 2 * n - 1,
            points: x.iter().map(|&t| [1.0 - t, t, 0.0, 0.0]).collect(),
            weights: w,
        }
    }

    /// Symmetric six-point triangle rule, exact to degree 4.
    pub fn triangle_six_point() -> Self {
        let groups = [
            (0.223_381_589_678_011, 0.108_103_018_168_070, 0.445_948_490_915_965),
            (0.109_951_743_655_322, 0.816_847_572_980_459, 0.091_576_213_509_771),
        ];
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (w, a, b) in groups {
            for p in [[a, b, b, 0.0], [b, a, b, 0.0], [b, b, a, 0.0]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        Self { dim: 2, degree: 4, points, weights }
    }

    /// Conical-product (collapsed Gauss-Legendre) rule of arbitrary degree.
    pub fn collapsed(dim: usize, degree: usize) -> Self {
        Self::collapsed_composite(dim, degree, 1)
    }

    /// Collapsed rule whose underlying Gauss rules are split into `panels`
    /// equal pieces per direction; still exact to `degree`, but resolves
    /// non-smooth integrands better.
    pub fn collapsed_composite(dim: usize, degree: usize, panels: usize) -> Self {
        let n_for = |deg: usize| deg / 2 + 1;
        let gl = |n: usize| composite_gauss(n, panels);
        match dim {
            0 => Self::point(),
            1 => {
                let (x, w) = gl(n_for(degree));
                Self { dim, degree, points: x.iter().map(|&t| [1.0 - t, t, 0.0, 0.0]).collect(), weights: w }
            }
            2 => {
                let (xu, wu) = gl(n_for(degree + 1));
                let (xv, wv) = gl(n_for(degree));
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (u, a) in xu.iter().zip(&wu) {
                    for (v, b) in xv.iter().zip(&wv) {
                        let x = *u;
                        let y = v * (1.0 - u);
                        points.push([1.0 - x - y, x, y, 0.0]);
                        weights.push(a * b * (1.0 - u));
                    }
                }
                Self { dim, degree, points, weights }
            }
            3 => {
                let (xu, wu) = gl(n_for(degree + 2));
                let (xv, wv) = gl(n_for(degree + 1));
                let (xw, ww) = gl(n_for(degree));
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (u, a) in xu.iter().zip(&wu) {
                    for (v, b) in xv.iter().zip(&wv) {
                        for (w, c) in xw.iter().zip(&ww) {
                            let x = *u;
                            let y = v * (1.0 - u);
                            let z = w * (1.0 - u) * (1.0 - v);
                            points.push([1.0 - x - y - z, x, y, z]);
                            weights.push(a * b * c * (1.0 - u) * (1.0 - u) * (1.0 - v));
                        }
                    }
                }
                Self { dim, degree, points, weights }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
    }

    /// Default rule exact to `degree` on a `dim`-simplex: Gauss on edges,
    /// the six-point rule on triangles up to degree 4, collapsed otherwise.
    pub fn for_degree(dim: usize, degree: usize) -> Self {
        match dim {
            0 => Self::point(),
            1 => Self::gauss_line(degree / 2 + 1),
            2 if degree <= 4 => Self::triangle_six_point(),
            _ => Self::collapsed(dim, degree),
        }
    }

    /// Integrates `f` over the simplex spanned by `vertices` (dim + 1 points)
    /// whose measure is `measure`.
    pub fn integrate<F: FnMut(&Point) -> f64>(&self, vertices: &[Point], measure: f64, mut f: F) -> f64 {
        let scale = measure / Self::reference_measure(self.dim);
        let mut sum = 0.0;
        for (b, w) in self.points.iter().zip(&self.weights) {
            let x = map_barycentric(b, vertices);
            sum += w * f(&x);
        }
        sum * scale
    }

    /// Iterator over `(physical point, barycentric point, physical weight)`.
    pub fn mapped<'a>(
        &'a self,
        vertices: &'a [Point],
        measure: f64,
    ) -> impl Iterator<Item = (Point, &'a [f64; 4], f64)> + 'a {
        let scale = measure / Self::reference_measure(self.dim);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(b, w)| (map_barycentric(b, vertices), b, w * scale))
    }
}

/// Gauss-Legendre with `n` nodes on each of `panels` equal subintervals of [0, 1].
pub fn composite_gauss(n: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(n * panels);
    let mut weights = Vec::with_capacity(n * panels);
    for p in 0..panels {
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(h * (p as f64 + xi));
            weights.push(h * wi);
        }
    }
    (nodes, weights)
}

pub fn map_barycentric(b: &[f64; 4], vertices: &[Point]) -> Point {
    let mut x = [0.0; 3];
    for (l, v) in b.iter().zip(vertices) {
        for k in 0..3 {
            x[k] += l * v[k];
        }
    }
    x
}
