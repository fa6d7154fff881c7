//! Small dense linear algebra over ℝ³.
//!
//! Everything here is fixed-size: 3-vectors, 3×3 matrices, symmetric forms
//! with a cached Jacobi eigendecomposition, a Padé matrix exponential and
//! real root finding for the low-degree polynomials that show up when
//! intersecting orbits with tangency sets.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or direction in ℝ³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const E1: Vec3 = Vec3([1.0, 0.0, 0.0]);
    pub const E2: Vec3 = Vec3([0.0, 1.0, 0.0]);
    pub const E3: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3([x1, x2, x3])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.0[0].hypot(self.0[1]).hypot(self.0[2])
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let [a, b, c] = self.0.map(f64::abs);
        let helper = if a <= b && a <= c {
            Vec3::E1
        } else if b <= c {
            Vec3::E2
        } else {
            Vec3::E3
        };
        self.cross(helper)
            .normalized()
            .expect("cross product with the least-aligned axis is nonzero")
    }

    /// Rotation of `self` by `angle` about the unit vector `axis` (Rodrigues).
    pub fn rotated(self, axis: Vec3, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        self.scale(c) + axis.cross(self).scale(s) + axis.scale(axis.dot(self) * (1.0 - c))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A real 3×3 matrix, row-major: `m[(i, j)]` is row `i`, column `j` (0-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Mat3::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// The matrix of `x ↦ w × x`.
    pub fn cross_matrix(w: Vec3) -> Self {
        let [w1, w2, w3] = w.0;
        Mat3([[0.0, -w3, w2], [w3, 0.0, -w1], [-w2, w1, 0.0]])
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[j][i])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn mul_vec(&self, x: Vec3) -> Vec3 {
        Vec3([self.row(0).dot(x), self.row(1).dot(x), self.row(2).dot(x)])
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum())
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..3)
            .map(|j| (0..3).map(|i| self.0[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// `A + Aᵗ`; zero exactly when `A` is skew.
    pub fn symmetric_part_doubled(&self) -> Mat3 {
        *self + self.transpose()
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` for a (numerically) singular matrix.
    pub fn solve_mat(&self, rhs: &Mat3) -> Option<Mat3> {
        let mut a = self.0;
        let mut b = rhs.0;
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap_or(col);
            if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
                return None;
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                for k in 0..3 {
                    b[row][k] -= f * b[col][k];
                }
            }
        }
        let mut x = [[0.0; 3]; 3];
        for k in 0..3 {
            for row in (0..3).rev() {
                let tail: f64 = (row + 1..3).map(|c| a[row][c] * x[c][k]).sum();
                x[row][k] = (b[row][k] - tail) / a[row][row];
            }
        }
        Some(Mat3(x))
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Signature of a symmetric form: counts of positive, negative and zero
/// eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub const fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Inertia {
            positive,
            negative,
            zero,
        }
    }

    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }

    /// The same form up to an overall sign.
    pub fn flipped(&self) -> Inertia {
        Inertia::new(self.negative, self.positive, self.zero)
    }
}

/// A symmetric 3×3 form stored as its six independent entries
/// `[q11, q22, q33, q12, q13, q23]`, with a cached eigendecomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymForm3 {
    entries: [f64; 6],
    eigen: SymEigen,
}

impl SymForm3 {
    pub fn new(entries: [f64; 6]) -> Self {
        let eigen = jacobi_eigen(entries);
        SymForm3 { entries, eigen }
    }

    /// Symmetric part of `m`, i.e. `(m + mᵗ)/2`.
    pub fn symmetric_part(m: &Mat3) -> Self {
        SymForm3::new([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        ])
    }

    pub fn entries(&self) -> [f64; 6] {
        self.entries
    }

    pub fn to_mat(&self) -> Mat3 {
        let [a, b, c, d, e, f] = self.entries;
        Mat3([[a, d, e], [d, b, f], [e, f, c]])
    }

    /// `xᵗ Q x`.
    pub fn eval(&self, x: Vec3) -> f64 {
        let [a, b, c, d, e, f] = self.entries;
        let [x1, x2, x3] = x.0;
        a * x1 * x1 + b * x2 * x2 + c * x3 * x3 + 2.0 * (d * x1 * x2 + e * x1 * x3 + f * x2 * x3)
    }

    pub fn apply(&self, x: Vec3) -> Vec3 {
        self.to_mat().mul_vec(x)
    }

    pub fn eigen(&self) -> &SymEigen {
        &self.eigen
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigen.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_mat().frobenius_norm()
    }

    pub fn inertia(&self, tol: f64) -> Inertia {
        inertia(self, tol)
    }
}

/// Eigen-decomposition of a symmetric form (cached at construction).
pub fn sym_eigen(q: &SymForm3) -> SymEigen {
    q.eigen
}

/// Counts eigenvalues above `tol·s`, below `-tol·s` and in between, with
/// `s = max(1, spectral radius)`.
pub fn inertia(q: &SymForm3, tol: f64) -> Inertia {
    let cut = tol * q.spectral_radius().max(1.0);
    let mut out = Inertia::new(0, 0, 0);
    for &l in &q.eigen.values {
        if l > cut {
            out.positive += 1;
        } else if l < -cut {
            out.negative += 1;
        } else {
            out.zero += 1;
        }
    }
    out
}

fn jacobi_eigen(entries: [f64; 6]) -> SymEigen {
    let [a, b, c, d, e, f] = entries;
    let mut m = [[a, d, e], [d, b, f], [e, f, c]];
    let mut v = Mat3::IDENTITY.0;
    for _sweep in 0..64 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        let diag = m[0][0].abs() + m[1][1].abs() + m[2][2].abs();
        if off == 0.0 || off <= f64::EPSILON * f64::EPSILON * diag {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let cs = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * cs;
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = cs * mkp - sn * mkq;
                m[k][q] = sn * mkp + cs * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = cs * mpk - sn * mqk;
                m[q][k] = sn * mpk + cs * mqk;
            }
            m[p][q] = 0.0;
            m[q][p] = 0.0;
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = cs * vp - sn * vq;
                row[q] = sn * vp + cs * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let vm = Mat3(v);
    SymEigen {
        values: order.map(|i| m[i][i]),
        vectors: order.map(|i| vm.col(i)),
    }
}

/// Padé(6,6) coefficients `c_k = (12-k)! 6! / (12! k! (6-k)!)`.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// `exp(m)` by scaling and squaring with a Padé(6,6) approximant.
pub fn expm(m: &Mat3) -> Result<Mat3> {
    if !m.is_finite() {
        return Err(Error::Overflow);
    }
    let norm = m.norm_1();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = m.scale(0.5_f64.powi(squarings));
    let mut power = Mat3::IDENTITY;
    let mut num = Mat3::ZERO;
    let mut den = Mat3::ZERO;
    for (k, c) in PADE6.iter().enumerate() {
        if k > 0 {
            power = power.mul_mat(&x);
        }
        let term = power.scale(*c);
        num = num + term;
        den = if k % 2 == 0 { den + term } else { den - term };
    }
    let mut r = den.solve_mat(&num).ok_or(Error::Overflow)?;
    for _ in 0..squarings {
        r = r.mul_mat(&r);
    }
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Overflow)
    }
}

/// `exp(A t) x0`. Exact for `t = 0`.
pub fn expm_apply(a: &Mat3, t: f64, x0: Vec3) -> Result<Vec3> {
    if t == 0.0 {
        return Ok(x0);
    }
    let y = expm(&a.scale(t))?.mul_vec(x0);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Overflow)
    }
}

/// Real roots of `c2 s² + c1 s + c0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadraticRoots {
    None,
    /// A simple root of a linear equation or a double root.
    One(f64),
    /// Two distinct roots, ascending.
    Two(f64, f64),
    /// All coefficients vanish: every `s` is a root.
    IdenticallyZero,
}

impl QuadraticRoots {
    pub fn to_vec(self) -> Vec<f64> {
        match self {
            QuadraticRoots::None | QuadraticRoots::IdenticallyZero => Vec::new(),
            QuadraticRoots::One(r) => vec![r],
            QuadraticRoots::Two(a, b) => vec![a, b],
        }
    }
}

pub fn solve_quadratic(c2: f64, c1: f64, c0: f64) -> QuadraticRoots {
    if c2 == 0.0 {
        return match (c1 == 0.0, c0 == 0.0) {
            (true, true) => QuadraticRoots::IdenticallyZero,
            (true, false) => QuadraticRoots::None,
            (false, _) => QuadraticRoots::One(-c0 / c1),
        };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let scale = (c1 * c1).max((4.0 * c2 * c0).abs());
    if disc.abs() <= 1e-12 * scale {
        return QuadraticRoots::One(-c1 / (2.0 * c2));
    }
    if disc < 0.0 {
        return QuadraticRoots::None;
    }
    // Stable form: avoid cancellation between -c1 and the square root.
    let q = -0.5 * (c1 + c1.signum_or_one() * disc.sqrt());
    let (r1, r2) = (q / c2, c0 / q);
    if r1 <= r2 {
        QuadraticRoots::Two(r1, r2)
    } else {
        QuadraticRoots::Two(r2, r1)
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// Real roots of the polynomial `Σ coeffs[k] tᵏ`, ascending.
///
/// Roots are isolated between consecutive critical points (the roots of the
/// derivative, found recursively) and refined by bisection. Critical points
/// where the polynomial is numerically zero are reported as multiple roots.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while coeffs[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    let p = &coeffs[..=deg];
    match deg {
        0 => return Vec::new(),
        1 => return vec![-p[0] / p[1]],
        _ => {}
    }
    let bound = 1.0 + p[..deg].iter().map(|c| (c / p[deg]).abs()).fold(0.0, f64::max);
    let deriv: Vec<f64> = (1..=deg).map(|k| k as f64 * p[k]).collect();
    let mut knots = vec![-bound];
    knots.extend(
        real_roots(&deriv)
            .into_iter()
            .filter(|c| c.abs() < bound),
    );
    knots.push(bound);

    let zero_tol = 1e-12 * scale;
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut flo, fhi) = (horner(p, lo), horner(p, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = horner(p, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    // Multiple roots: critical points touching zero without a sign change.
    for &c in &knots[1..knots.len() - 1] {
        if horner(p, c).abs() <= zero_tol {
            roots.push(c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    roots
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}
