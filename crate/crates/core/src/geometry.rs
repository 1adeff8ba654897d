//! Smooth reference domains described by a signed distance function.
//!
//! Points are stored as `[f64; 3]` in every dimension; two-dimensional
//! points keep a zero third coordinate.

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Below this radius the radial projection of the disk/ball is undefined.
const CENTER_TOL: f64 = 1e-12;
/// Points farther than this from the boundary are rejected by `outward_normal`.
const ON_BOUNDARY_TOL: f64 = 1e-10;

/// Interface for a smooth domain: signed distance `d`, closest-point
/// projection onto the boundary and the outward unit normal.
///
/// `d` is negative inside, zero on the boundary and positive outside.
pub trait Domain: Send + Sync {
    fn dim(&self) -> usize;
    fn signed_distance(&self, x: &Point) -> f64;
    fn project_to_boundary(&self, x: &Point) -> Result<Point>;
    fn outward_normal(&self, x: &Point) -> Result<Point>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmoothDomain {
    /// Unit disk in the plane.
    Disk2d,
    /// Unit ball in space.
    Ball3d,
}

impl SmoothDomain {
    pub fn name(self) -> &'static str {
        match self {
            SmoothDomain::Disk2d => "disk2d",
            SmoothDomain::Ball3d => "ball3d",
        }
    }

    fn radius(self, x: &Point) -> f64 {
        norm(x, self.dim())
    }
}

impl std::str::FromStr for SmoothDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk2d" => Ok(Self::Disk2d),
            "ball3d" => Ok(Self::Ball3d),
            other => Err(Error::Config(format!("unknown case `{other}` (disk2d|ball3d)"))),
        }
    }
}

impl Domain for SmoothDomain {
    fn dim(&self) -> usize {
        match self {
            SmoothDomain::Disk2d => 2,
            SmoothDomain::Ball3d => 3,
        }
    }

    fn signed_distance(&self, x: &Point) -> f64 {
        self.radius(x) - 1.0
    }

    fn project_to_boundary(&self, x: &Point) -> Result<Point> {
        let r = self.radius(x);
        if r < CENTER_TOL {
            return Err(Error::DegeneratePoint(*x));
        }
        let mut y = [0.0; 3];
        for k in 0..self.dim() {
            y[k] = x[k] / r;
        }
        Ok(y)
    }

    fn outward_normal(&self, x: &Point) -> Result<Point> {
        let d = self.signed_distance(x);
        if d.abs() > ON_BOUNDARY_TOL {
            return Err(Error::NotOnBoundary { point: *x, distance: d });
        }
        self.project_to_boundary(x)
    }
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(x: &Point, dim: usize) -> f64 {
    x[..dim].iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    dot(&d, &d).sqrt()
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
