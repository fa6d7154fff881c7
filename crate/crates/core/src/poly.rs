//! Dense polynomials in three variables of total degree at most four.
//!
//! Both defining functions are polynomials of degree ≤ 4 and a linear field
//! preserves the degree of anything it differentiates, so the Lie
//! derivatives `Xσ`, `X²σ`, `X³σ` all fit in this representation with
//! exactly computed coefficients.

use crate::algebra::{Mat3, Vec3};

pub const MAX_DEGREE: usize = 4;
const N: usize = MAX_DEGREE + 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly3 {
    /// `coeffs[i][j][k]` multiplies `x1^i x2^j x3^k`; entries with
    /// `i + j + k > MAX_DEGREE` stay zero.
    coeffs: [[[f64; N]; N]; N],
}

impl Default for Poly3 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3 {
            coeffs: [[[0.0; N]; N]; N],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: f64, exps: [usize; 3]) -> Self {
        assert!(exps.iter().sum::<usize>() <= MAX_DEGREE, "degree overflow");
        let mut p = Self::zero();
        p.coeffs[exps[0]][exps[1]][exps[2]] = c;
        p
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn coordinate(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(1.0, e)
    }

    pub fn coefficient(&self, exps: [usize; 3]) -> f64 {
        self.coeffs[exps[0]][exps[1]][exps[2]]
    }

    fn terms(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        (0..N).flat_map(move |i| {
            (0..N - i).flat_map(move |j| {
                (0..N - i - j).filter_map(move |k| {
                    let c = self.coeffs[i][j][k];
                    (c != 0.0).then_some(([i, j, k], c))
                })
            })
        })
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.coeffs[e[0]][e[1]][e[2]] += c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in self.terms() {
            out.coeffs[e[0]][e[1]][e[2]] = c * s;
        }
        out
    }

    /// Product; panics if the result would exceed `MAX_DEGREE`.
    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in self.terms() {
            for (f, d) in other.terms() {
                let g = [e[0] + f[0], e[1] + f[1], e[2] + f[2]];
                assert!(g.iter().sum::<usize>() <= MAX_DEGREE, "degree overflow");
                out.coeffs[g[0]][g[1]][g[2]] += c * d;
            }
        }
        out
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let mut pw = [[1.0; N]; 3];
        for (axis, row) in pw.iter_mut().enumerate() {
            for d in 1..N {
                row[d] = row[d - 1] * x[axis];
            }
        }
        self.terms()
            .map(|(e, c)| c * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]])
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (mut e, c) in self.terms() {
            if e[axis] == 0 {
                continue;
            }
            let n = e[axis] as f64;
            e[axis] -= 1;
            out.coeffs[e[0]][e[1]][e[2]] += n * c;
        }
        out
    }

    pub fn gradient(&self, x: Vec3) -> Vec3 {
        Vec3([
            self.partial(0).eval(x),
            self.partial(1).eval(x),
            self.partial(2).eval(x),
        ])
    }

    /// Lie derivative along the linear field `x ↦ A x`:
    /// `Σ_i (Ax)_i ∂p/∂x_i` with `(Ax)_i = Σ_j a_ij x_j`.
    pub fn lie(&self, a: &Mat3) -> Poly3 {
        let mut out = Poly3::zero();
        for axis in 0..3 {
            let d = self.partial(axis);
            for (e, c) in d.terms() {
                for j in 0..3 {
                    let coef = a[(axis, j)];
                    if coef == 0.0 {
                        continue;
                    }
                    let mut g = e;
                    g[j] += 1;
                    out.coeffs[g[0]][g[1]][g[2]] += c * coef;
                }
            }
        }
        out
    }

    /// The part of total degree exactly `degree`.
    pub fn homogeneous_part(&self, degree: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in self.terms() {
            if e.iter().sum::<usize>() == degree {
                out.coeffs[e[0]][e[1]][e[2]] = c;
            }
        }
        out
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }
}
