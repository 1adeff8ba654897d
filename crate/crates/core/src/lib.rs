//! Penalized Crouzeix–Raviart P1/P0 finite elements for the Stokes equations
//! with non-homogeneous slip boundary conditions on curved domains.

pub mod analysis;
pub mod cases;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod ordering;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod study;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{Domain, Point, SmoothDomain};
pub use mesh::{FacetComplex, SimplexMesh};
