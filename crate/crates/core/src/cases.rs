//! Manufactured Stokes problems on the unit disk and ball, and a
//! finite-difference oracle that re-derives their data.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{dot, Point, SmoothDomain};

pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Point) -> [[f64; 3]; 3] + Send + Sync>;

/// Exact velocity and pressure, defined on all of ℝ^N.
#[derive(Clone)]
pub struct AnalyticSolution {
    pub dim: usize,
    pub nu: f64,
    pub u: VectorFn,
    pub p: ScalarFn,
    /// `grad_u(x)[a][k] = ∂u_a/∂x_k`
    pub grad_u: MatrixFn,
}

impl AnalyticSolution {
    /// σ(u, p) = −pI + ν(∇u + ∇uᵀ)
    pub fn stress(&self, x: &Point) -> [[f64; 3]; 3] {
        let g = (self.grad_u)(x);
        let p = (self.p)(x);
        let mut s = [[0.0; 3]; 3];
        for a in 0..self.dim {
            for b in 0..self.dim {
                s[a][b] = self.nu * (g[a][b] + g[b][a]);
            }
            s[a][a] -= p;
        }
        s
    }

    pub fn divergence(&self, x: &Point) -> f64 {
        let g = (self.grad_u)(x);
        (0..self.dim).map(|a| g[a][a]).sum()
    }
}

/// Right-hand side data: body force, normal flux and tangential traction.
#[derive(Clone)]
pub struct ProblemData {
    pub domain: SmoothDomain,
    pub nu: f64,
    pub f: VectorFn,
    pub g: ScalarFn,
    pub tau: VectorFn,
}

impl ProblemData {
    pub fn zero(domain: SmoothDomain, nu: f64) -> Self {
        Self {
            domain,
            nu,
            f: Arc::new(|_| [0.0; 3]),
            g: Arc::new(|_| 0.0),
            tau: Arc::new(|_| [0.0; 3]),
        }
    }
}

/// Which reading of the 3D pressure formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureVariant {
    /// p = 10xyz(z + y + z)
    #[default]
    Printed,
    /// p = 10xyz(x + y + z)
    Symmetric,
}

impl PressureVariant {
    pub fn name(self) -> &'static str {
        match self {
            PressureVariant::Printed => "printed",
            PressureVariant::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for PressureVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Self::Printed),
            "symmetric" => Ok(Self::Symmetric),
            other => Err(Error::Config(format!("unknown pressure variant `{other}` (printed|symmetric)"))),
        }
    }
}

/// Radial unit vector, used as the extension of n off Γ.
fn radial(x: &Point) -> Point {
    let r = dot(x, x).sqrt();
    x.map(|v| v / r)
}

/// (I − n⊗n) σ n
fn tangential_traction(sigma: &[[f64; 3]; 3], n: &Point, dim: usize) -> Point {
    let mut sn = [0.0; 3];
    for a in 0..dim {
        sn[a] = (0..dim).map(|b| sigma[a][b] * n[b]).sum();
    }
    let s = dot(&sn, n);
    std::array::from_fn(|a| if a < dim { sn[a] - s * n[a] } else { 0.0 })
}

fn traction_from(sol: &AnalyticSolution) -> VectorFn {
    let sol = sol.clone();
    Arc::new(move |x| tangential_traction(&sol.stress(x), &radial(x), sol.dim))
}

/// u = (−y r², x r²), p = 8xy on the unit disk.
pub fn case_disk2d(nu: f64) -> (AnalyticSolution, ProblemData) {
    let sol = AnalyticSolution {
        dim: 2,
        nu,
        u: Arc::new(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            [-x[1] * r2, x[0] * r2, 0.0]
        }),
        p: Arc::new(|x| 8.0 * x[0] * x[1]),
        grad_u: Arc::new(|x| {
            let (a, b) = (x[0], x[1]);
            [[-2.0 * a * b, -(a * a + 3.0 * b * b), 0.0], [3.0 * a * a + b * b, 2.0 * a * b, 0.0], [0.0; 3]]
        }),
    };
    let data = ProblemData {
        domain: SmoothDomain::Disk2d,
        nu,
        f: Arc::new(move |x| {
            let (a, b) = (x[0], x[1]);
            let r2 = a * a + b * b;
            // Δu = (−8y, 8x), ∇p = (8y, 8x)
            [-b * r2 + 8.0 * nu * b + 8.0 * b, a * r2 - 8.0 * nu * a + 8.0 * a, 0.0]
        }),
        g: Arc::new(|_| 0.0),
        tau: traction_from(&sol),
    };
    (sol, data)
}

/// F(x, y, z) = 10x²yz(y − z); the velocity components are its cyclic shifts.
fn f_cyc(x: f64, y: f64, z: f64) -> f64 {
    10.0 * x * x * y * z * (y - z)
}

fn grad_f_cyc(x: f64, y: f64, z: f64) -> [f64; 3] {
    [20.0 * x * y * z * (y - z), 10.0 * x * x * z * (2.0 * y - z), 10.0 * x * x * y * (y - 2.0 * z)]
}

fn lap_f_cyc(x: f64, y: f64, z: f64) -> f64 {
    20.0 * (y * y * z - y * z * z + x * x * z - x * x * y)
}

fn cyclic(x: &Point, k: usize) -> (f64, f64, f64) {
    (x[k % 3], x[(k + 1) % 3], x[(k + 2) % 3])
}

/// u = (10x²yz(y−z), 10xy²z(z−x), 10xyz²(x−y)) on the unit ball.
pub fn case_ball3d(nu: f64, variant: PressureVariant) -> (AnalyticSolution, ProblemData) {
    let u: VectorFn = Arc::new(|x| {
        std::array::from_fn(|k| {
            let (a, b, c) = cyclic(x, k);
            f_cyc(a, b, c)
        })
    });
    let grad_u: MatrixFn = Arc::new(|x| {
        let mut g = [[0.0; 3]; 3];
        for (k, row) in g.iter_mut().enumerate() {
            let (a, b, c) = cyclic(x, k);
            let d = grad_f_cyc(a, b, c);
            for m in 0..3 {
                row[(k + m) % 3] = d[m];
            }
        }
        g
    });
    let (p, grad_p): (ScalarFn, VectorFn) = match variant {
        PressureVariant::Printed => (
            Arc::new(|x| 10.0 * x[0] * x[1] * x[2] * (x[1] + 2.0 * x[2])),
            Arc::new(|x| {
                let (a, b, c) = (x[0], x[1], x[2]);
                [
                    10.0 * (b * b * c + 2.0 * b * c * c),
                    10.0 * (2.0 * a * b * c + 2.0 * a * c * c),
                    10.0 * (a * b * b + 4.0 * a * b * c),
                ]
            }),
        ),
        PressureVariant::Symmetric => (
            Arc::new(|x| 10.0 * x[0] * x[1] * x[2] * (x[0] + x[1] + x[2])),
            Arc::new(|x| {
                let (a, b, c) = (x[0], x[1], x[2]);
                [
                    10.0 * (2.0 * a * b * c + b * b * c + b * c * c),
                    10.0 * (a * a * c + 2.0 * a * b * c + a * c * c),
                    10.0 * (a * a * b + a * b * b + 2.0 * a * b * c),
                ]
            }),
        ),
    };
    let sol = AnalyticSolution { dim: 3, nu, u: u.clone(), p, grad_u };
    let data = ProblemData {
        domain: SmoothDomain::Ball3d,
        nu,
        f: Arc::new(move |x| {
            let uv = u(x);
            let gp = grad_p(x);
            std::array::from_fn(|k| {
                let (a, b, c) = cyclic(x, k);
                uv[k] - nu * lap_f_cyc(a, b, c) + gp[k]
            })
        }),
        // u·x, which equals u·n on the sphere
        g: Arc::new(|x| {
            let (a, b, c) = (x[0], x[1], x[2]);
            -10.0 * a * b * c * (a - b) * (b - c) * (c - a)
        }),
        tau: traction_from(&sol),
    };
    (sol, data)
}

/// Maximum deviations found by `oracle_check`.
#[derive(Debug, Clone, Default)]
pub struct OracleReport {
    pub points: usize,
    pub max_divergence: f64,
    pub max_gradient_error: f64,
    pub max_force_error: f64,
    pub max_flux_error: f64,
    pub max_traction_error: f64,
    pub max_traction_normal: f64,
    pub boundary_flux_integral: f64,
}

/// Step of the central differences used by the oracle.
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;
pub const DIV_TOL: f64 = 1e-12;
pub const BOUNDARY_TOL: f64 = 1e-10;

fn central_diff<const M: usize>(f: impl Fn(&Point) -> [f64; M], x: &Point, k: usize) -> [f64; M] {
    let mut xp = *x;
    let mut xm = *x;
    xp[k] += FD_STEP;
    xm[k] -= FD_STEP;
    let (a, b) = (f(&xp), f(&xm));
    std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * FD_STEP))
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point {
    loop {
        let mut x = [0.0; 3];
        for v in x[..dim].iter_mut() {
            *v = rng.random_range(-radius..radius);
        }
        if dot(&x, &x) <= radius * radius {
            return x;
        }
    }
}

fn random_on_sphere(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let x = random_in_ball(rng, dim, 1.0);
        let r = dot(&x, &x).sqrt();
        if r > 1e-3 {
            return x.map(|v| v / r);
        }
    }
}

fn mismatch(field: &str, point: Point, expected: f64, actual: f64) -> Error {
    Error::OracleMismatch { field: field.to_string(), point, expected, actual }
}

/// ∫_Γ g, by the trapezoidal rule on the circle or Gauss × trapezoid on the sphere.
pub fn boundary_integral(dim: usize, g: &dyn Fn(&Point) -> f64) -> f64 {
    use std::f64::consts::TAU;
    if dim == 2 {
        let n = 4096;
        (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                g(&[t.cos(), t.sin(), 0.0])
            })
            .sum::<f64>()
            * TAU
            / n as f64
    } else {
        let (nodes, weights) = crate::quadrature::gauss_legendre(40);
        let nphi = 96;
        let mut sum = 0.0;
        for (s, w) in nodes.iter().zip(&weights) {
            let ct = 2.0 * s - 1.0;
            let st = (1.0 - ct * ct).sqrt();
            for j in 0..nphi {
                let phi = TAU * j as f64 / nphi as f64;
                sum += 2.0 * w * g(&[st * phi.cos(), st * phi.sin(), ct]) * TAU / nphi as f64;
            }
        }
        sum
    }
}

/// Re-derives f, g and τ from u and p with central differences and
/// compares against the closed forms at `n_points` random locations.
pub fn oracle_check(sol: &AnalyticSolution, data: &ProblemData, n_points: usize, seed: u64) -> Result<OracleReport> {
    let dim = sol.dim;
    let nu = sol.nu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = OracleReport { points: n_points, ..Default::default() };
    let u = |x: &Point| (sol.u)(x);
    let p = |x: &Point| [(sol.p)(x)];
    let grad_rows = |x: &Point| {
        let g = (sol.grad_u)(x);
        [g[0][0], g[0][1], g[0][2], g[1][0], g[1][1], g[1][2], g[2][0], g[2][1], g[2][2]]
    };

    for _ in 0..n_points {
        let x = random_in_ball(&mut rng, dim, 1.0);

        let div = sol.divergence(&x);
        rep.max_divergence = rep.max_divergence.max(div.abs());
        if div.abs() > DIV_TOL {
            return Err(mismatch("div u", x, 0.0, div));
        }

        let g = (sol.grad_u)(&x);
        let mut lap = [0.0; 3];
        let mut grad_p = [0.0; 3];
        for k in 0..dim {
            let du = central_diff(u, &x, k);
            for a in 0..dim {
                let err = (du[a] - g[a][k]).abs();
                rep.max_gradient_error = rep.max_gradient_error.max(err);
                if err > FD_TOL {
                    return Err(mismatch("grad u", x, du[a], g[a][k]));
                }
            }
            // second derivatives from differences of the exact gradient
            let dg = central_diff(grad_rows, &x, k);
            for a in 0..dim {
                lap[a] += dg[3 * a + k];
            }
            grad_p[k] = central_diff(p, &x, k)[0];
        }
        let uv = u(&x);
        let f = (data.f)(&x);
        for a in 0..dim {
            let expected = uv[a] - nu * lap[a] + grad_p[a];
            let err = (expected - f[a]).abs();
            rep.max_force_error = rep.max_force_error.max(err);
            if err > FD_TOL {
                return Err(mismatch(&format!("f[{a}]"), x, expected, f[a]));
            }
        }

        let y = random_on_sphere(&mut rng, dim);
        let n = y;
        let flux = dot(&u(&y), &n);
        let gy = (data.g)(&y);
        rep.max_flux_error = rep.max_flux_error.max((flux - gy).abs());
        if (flux - gy).abs() > BOUNDARY_TOL {
            return Err(mismatch("g", y, flux, gy));
        }
        // traction rebuilt from the finite-difference gradient
        let mut sigma = [[0.0; 3]; 3];
        let pv = (sol.p)(&y);
        for k in 0..dim {
            let du = central_diff(u, &y, k);
            for a in 0..dim {
                sigma[a][k] += nu * du[a];
                sigma[k][a] += nu * du[a];
            }
            sigma[k][k] -= pv;
        }
        let expected = tangential_traction(&sigma, &n, dim);
        let tau = (data.tau)(&y);
        for a in 0..dim {
            let err = (expected[a] - tau[a]).abs();
            rep.max_traction_error = rep.max_traction_error.max(err);
            if err > FD_TOL {
                return Err(mismatch(&format!("tau[{a}]"), y, expected[a], tau[a]));
            }
        }
        let tn = dot(&tau, &n);
        rep.max_traction_normal = rep.max_traction_normal.max(tn.abs());
        if tn.abs() > BOUNDARY_TOL {
            return Err(mismatch("tau.n", y, 0.0, tn));
        }
    }

    let total = boundary_integral(dim, &*data.g);
    rep.boundary_flux_integral = total;
    if total.abs() > BOUNDARY_TOL {
        return Err(mismatch("integral of g", [0.0; 3], 0.0, total));
    }
    Ok(rep)
}
