//! Inelastic companion fields.
//!
//! Two linear fields `X = A x`, `Y = B x` are inelastic over `Σ` when
//! `Xσ = −Yσ` on `Σ`. For both manifolds this fixes `B` from `A` up to a few
//! free entries, which are kept explicit so callers can sweep them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::manifolds::SwitchingManifold;

/// Entries of `B` left free by the inelastic condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "manifold", rename_all = "lowercase")]
pub enum FreeParams {
    Sphere { b21: f64, b31: f64, b32: f64 },
    Torus { b21: f64 },
}

impl FreeParams {
    pub fn manifold(&self) -> SwitchingManifold {
        match self {
            FreeParams::Sphere { .. } => SwitchingManifold::Sphere,
            FreeParams::Torus { .. } => SwitchingManifold::Torus,
        }
    }

    /// Reads the free entries back out of a companion matrix.
    pub fn from_companion(m: SwitchingManifold, b: &Mat3) -> Self {
        match m {
            SwitchingManifold::Sphere => FreeParams::Sphere {
                b21: b[(1, 0)],
                b31: b[(2, 0)],
                b32: b[(2, 1)],
            },
            SwitchingManifold::Torus => FreeParams::Torus { b21: b[(1, 0)] },
        }
    }
}

/// Sphere companion: `A + B` is skew, with `b21, b31, b32` free.
pub fn companion_sphere(a: &Mat3, b21: f64, b31: f64, b32: f64) -> Mat3 {
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];
    Mat3::from_rows([
        [-e(1, 1), -e(2, 1) - b21 - e(1, 2), -e(1, 3) - e(3, 1) - b31],
        [b21, -e(2, 2), -e(3, 2) - b32 - e(2, 3)],
        [b31, b32, -e(3, 3)],
    ])
}

/// Torus companion: `A + B` is a rotation generator about `x₃`, `b21` free.
pub fn companion_torus(a: &Mat3, b21: f64) -> Mat3 {
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];
    Mat3::from_rows([
        [-e(1, 1), -e(1, 2) - e(2, 1) - b21, -e(1, 3)],
        [b21, -e(2, 2), -e(2, 3)],
        [-e(3, 1), -e(3, 2), -e(3, 3)],
    ])
}

pub fn companion(a: &Mat3, free: &FreeParams) -> Mat3 {
    match *free {
        FreeParams::Sphere { b21, b31, b32 } => companion_sphere(a, b21, b31, b32),
        FreeParams::Torus { b21 } => companion_torus(a, b21),
    }
}

/// An inelastic pair `Z = (X, Y)` with `X = A x` outside and `Y = B x`
/// inside the manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InelasticPair {
    pub a: Mat3,
    pub b: Mat3,
    pub manifold: SwitchingManifold,
    pub free: FreeParams,
}

impl InelasticPair {
    pub fn new(a: Mat3, free: FreeParams) -> Self {
        InelasticPair {
            a,
            b: companion(&a, &free),
            manifold: free.manifold(),
            free,
        }
    }

    pub fn sphere(a: Mat3, b21: f64, b31: f64, b32: f64) -> Self {
        Self::new(a, FreeParams::Sphere { b21, b31, b32 })
    }

    pub fn torus(a: Mat3, b21: f64) -> Self {
        Self::new(a, FreeParams::Torus { b21 })
    }

    /// Accepts an explicit `B` if it matches the companion pattern within
    /// `tol`; otherwise lists the offending entries `(row, col, B_ij, expected)`
    /// with 1-based indices.
    pub fn from_explicit(
        a: Mat3,
        b: Mat3,
        manifold: SwitchingManifold,
        tol: f64,
    ) -> std::result::Result<Self, Vec<(usize, usize, f64, f64)>> {
        let free = FreeParams::from_companion(manifold, &b);
        let expected = companion(&a, &free);
        let bad: Vec<_> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| (b[(i, j)] - expected[(i, j)]).abs() > tol)
            .map(|(i, j)| (i + 1, j + 1, b[(i, j)], expected[(i, j)]))
            .collect();
        if bad.is_empty() {
            Ok(InelasticPair {
                a,
                b: expected,
                manifold,
                free,
            })
        } else {
            Err(bad)
        }
    }

    pub fn require(&self, m: SwitchingManifold) -> Result<()> {
        if self.manifold == m {
            Ok(())
        } else {
            Err(Error::WrongManifold {
                expected: m,
                got: self.manifold,
            })
        }
    }

    /// Scale used for relative zero tests: `max(1, ‖A‖, ‖B‖)`.
    pub fn scale(&self) -> f64 {
        self.a
            .frobenius_norm()
            .max(self.b.frobenius_norm())
            .max(1.0)
    }

    /// `Xσ(x)` and `Yσ(x)`.
    pub fn normal_components(&self, x: Vec3) -> (f64, f64) {
        let g = self.manifold.surface().grad(x);
        (self.a.mul_vec(x).dot(g), self.b.mul_vec(x).dot(g))
    }
}

/// Largest `|Xσ + Yσ|` over `n` sampled manifold points.
pub fn verify_inelastic(a: &Mat3, b: &Mat3, m: SwitchingManifold, n: usize, seed: u64) -> f64 {
    let surface = m.surface();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = surface.sample_point(&mut rng);
            let g = surface.grad(x);
            (a.mul_vec(x).dot(g) + b.mul_vec(x).dot(g)).abs()
        })
        .fold(0.0, f64::max)
}
