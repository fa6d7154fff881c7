//! The two switching manifolds.
//!
//! `Σ₁` is the unit sphere `σ₁ = |x|² − 1` and `Σ₂` the torus
//! `σ₂ = (|x|² + 3)² − 16(x₁² + x₂²)`, i.e. major radius 2 and minor
//! radius 1 around the `x₃` axis. Each is a [`Surface`] implementation,
//! looked up by name through [`registry`] / [`lookup`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::error::{Error, Result};
use crate::poly::Poly3;

/// Major radius of the torus.
pub const TORUS_MAJOR_RADIUS: f64 = 2.0;
/// Minor radius of the torus.
pub const TORUS_MINOR_RADIUS: f64 = 1.0;

/// Behaviour shared by every switching manifold.
pub trait Surface: Send + Sync + fmt::Debug {
    fn kind(&self) -> SwitchingManifold;

    /// Registry key.
    fn name(&self) -> &'static str;

    /// Defining function; the manifold is its zero set.
    fn sigma(&self, x: Vec3) -> f64;

    fn grad(&self, x: Vec3) -> Vec3;

    /// `σ` as an explicit polynomial, for symbolic Lie derivatives.
    fn polynomial(&self) -> Poly3;

    /// Draws a point exactly on the manifold (up to rounding).
    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec3;

    /// Typical magnitude of `σ` near the manifold, used to scale tolerances.
    fn sigma_scale(&self) -> f64;
}

#[derive(Debug)]
pub struct Sphere;

#[derive(Debug)]
pub struct Torus;

impl Surface for Sphere {
    fn kind(&self) -> SwitchingManifold {
        SwitchingManifold::Sphere
    }

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn sigma(&self, x: Vec3) -> f64 {
        x.norm_sq() - 1.0
    }

    fn grad(&self, x: Vec3) -> Vec3 {
        x.scale(2.0)
    }

    fn polynomial(&self) -> Poly3 {
        norm_sq_poly().add(&Poly3::constant(-1.0))
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec3 {
        loop {
            let g = Vec3([
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ]);
            if let Some(u) = g.normalized() {
                if g.norm() > 1e-6 {
                    return u;
                }
            }
        }
    }

    fn sigma_scale(&self) -> f64 {
        1.0
    }
}

impl Surface for Torus {
    fn kind(&self) -> SwitchingManifold {
        SwitchingManifold::Torus
    }

    fn name(&self) -> &'static str {
        "torus"
    }

    fn sigma(&self, x: Vec3) -> f64 {
        let rho = x.norm_sq();
        let planar = x[0] * x[0] + x[1] * x[1];
        (rho + 3.0) * (rho + 3.0) - 16.0 * planar
    }

    fn grad(&self, x: Vec3) -> Vec3 {
        let k = 4.0 * (x.norm_sq() + 3.0);
        Vec3([k * x[0] - 32.0 * x[0], k * x[1] - 32.0 * x[1], k * x[2]])
    }

    fn polynomial(&self) -> Poly3 {
        let shifted = norm_sq_poly().add(&Poly3::constant(3.0));
        let planar = Poly3::monomial(1.0, [2, 0, 0]).add(&Poly3::monomial(1.0, [0, 2, 0]));
        shifted.mul(&shifted).add(&planar.scale(-16.0))
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec3 {
        let u = rng.random::<f64>() * 2.0 * PI;
        let v = rng.random::<f64>() * 2.0 * PI;
        torus_point(u, v)
    }

    fn sigma_scale(&self) -> f64 {
        144.0
    }
}

fn norm_sq_poly() -> Poly3 {
    (0..3)
        .map(|i| Poly3::coordinate(i).mul(&Poly3::coordinate(i)))
        .fold(Poly3::zero(), |acc, p| acc.add(&p))
}

/// Torus point at tube angle `u` and azimuth `v`.
pub fn torus_point(u: f64, v: f64) -> Vec3 {
    let r = TORUS_MAJOR_RADIUS + TORUS_MINOR_RADIUS * u.cos();
    Vec3([r * v.cos(), r * v.sin(), TORUS_MINOR_RADIUS * u.sin()])
}

static SPHERE: Sphere = Sphere;
static TORUS: Torus = Torus;
static REGISTRY: [&dyn Surface; 2] = [&SPHERE, &TORUS];

/// All registered manifolds.
pub fn registry() -> &'static [&'static dyn Surface] {
    &REGISTRY
}

/// Looks a manifold up by its registry name (case-insensitive).
pub fn lookup(name: &str) -> Result<&'static dyn Surface> {
    registry()
        .iter()
        .copied()
        .find(|s| s.name().eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| Error::UnknownManifold(name.to_string()))
}

/// Tag for one of the registered manifolds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchingManifold {
    Sphere,
    Torus,
}

impl SwitchingManifold {
    pub fn surface(self) -> &'static dyn Surface {
        match self {
            SwitchingManifold::Sphere => &SPHERE,
            SwitchingManifold::Torus => &TORUS,
        }
    }

    pub fn name(self) -> &'static str {
        self.surface().name()
    }
}

impl fmt::Display for SwitchingManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SwitchingManifold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        lookup(s).map(|s| s.kind())
    }
}

pub fn sigma(m: SwitchingManifold, x: Vec3) -> f64 {
    m.surface().sigma(x)
}

pub fn grad_sigma(m: SwitchingManifold, x: Vec3) -> Vec3 {
    m.surface().grad(x)
}

/// `n` points on the manifold, reproducible for a fixed seed.
pub fn sample_manifold(m: SwitchingManifold, n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| m.surface().sample_point(&mut rng)).collect()
}

/// Newton projection along `∇σ` onto the manifold.
pub fn project_to_manifold(m: SwitchingManifold, x: Vec3) -> Result<Vec3> {
    const MAX_STEPS: usize = 50;
    let surface = m.surface();
    let mut y = x;
    for _ in 0..MAX_STEPS {
        let s = surface.sigma(y);
        if s.abs() <= 1e-12 {
            return Ok(y);
        }
        let g = surface.grad(y);
        let gg = g.norm_sq();
        if gg == 0.0 || !gg.is_finite() {
            break;
        }
        y = y - g.scale(s / gg);
    }
    if surface.sigma(y).abs() <= 1e-12 {
        Ok(y)
    } else {
        Err(Error::NoConvergence {
            manifold: m,
            iterations: MAX_STEPS,
        })
    }
}

/// A round circle in space, stored geometrically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleCurve {
    pub label: String,
    pub center: Vec3,
    /// Unit normal of the containing plane.
    pub normal: Vec3,
    pub radius: f64,
}

impl CircleCurve {
    pub fn new(label: impl Into<String>, center: Vec3, normal: Vec3, radius: f64) -> Self {
        let normal = normal.normalized().expect("circle normal must be nonzero");
        CircleCurve {
            label: label.into(),
            center,
            normal,
            radius,
        }
    }

    /// Orthonormal in-plane basis `(u, v)` with `u × v = normal`.
    pub fn basis(&self) -> (Vec3, Vec3) {
        let u = self.normal.any_orthogonal();
        (u, self.normal.cross(u))
    }

    pub fn point_at(&self, theta: f64) -> Vec3 {
        let (u, v) = self.basis();
        self.center + (u.scale(theta.cos()) + v.scale(theta.sin())).scale(self.radius)
    }

    pub fn sample(&self, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|k| self.point_at(2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    /// Largest `|σ|` over `n` sampled points of the circle.
    pub fn manifold_residual(&self, m: SwitchingManifold, n: usize) -> f64 {
        self.sample(n)
            .into_iter()
            .map(|p| sigma(m, p).abs())
            .fold(0.0, f64::max)
    }

    /// Distance from `x` to the circle.
    pub fn distance_to(&self, x: Vec3) -> f64 {
        let d = x - self.center;
        let h = d.dot(self.normal);
        let in_plane = (d - self.normal.scale(h)).norm();
        (in_plane - self.radius).hypot(h)
    }
}
