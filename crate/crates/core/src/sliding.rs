//! Sliding dynamics of inelastic pairs.
//!
//! For an inelastic pair the Filippov sliding field collapses to the mean
//! field `½(A + B) x`, and on both manifolds `A + B` is skew: sliding motion
//! is a rigid rotation `x ↦ w × x`. [`SlidingRotation`] carries that
//! rotation in closed form.
//!
//! Where sliding orbits meet the sphere's tangency set is computed twice, by
//! the line family `γ(s)` through the roots of `Ξ(s)` and by a direct
//! angular parametrization of the orbit; the two are kept as mutual checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{real_roots, solve_quadratic, Mat3, QuadraticRoots, Vec3};
use crate::error::{Error, Result};
use crate::inelastic::InelasticPair;
use crate::manifolds::SwitchingManifold;
use crate::tangency::quadratic_form_q;

/// Tolerance on `|Xσ₁|` for accepting an orbit/tangency intersection.
pub const INTERSECTION_TOL: f64 = 1e-9;

/// Filippov sliding vector `(Yσ X − Xσ Y)/(Yσ − Xσ)` at `x`.
pub fn filippov_field(pair: &InelasticPair, x: Vec3) -> Result<Vec3> {
    let (xs, ys) = pair.normal_components(x);
    let denom = ys - xs;
    let g = pair.manifold.surface().grad(x);
    let cut = 1e-12 * pair.scale() * g.norm().max(1.0) * x.norm().max(1.0);
    if denom.abs() <= cut {
        return Err(Error::TangencyPoint(x));
    }
    let fx = pair.a.mul_vec(x);
    let fy = pair.b.mul_vec(x);
    Ok((fx.scale(ys) - fy.scale(xs)).scale(1.0 / denom))
}

/// `(A + B) / 2`.
pub fn mean_field(a: &Mat3, b: &Mat3) -> Mat3 {
    (*a + *b).scale(0.5)
}

/// Closed form of the sliding flow `x ↦ w × x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingRotation {
    pub manifold: SwitchingManifold,
    /// `½(A + B)`.
    pub generator: Mat3,
    /// Rotation vector `w`.
    pub axis: Vec3,
    /// Angular rate `‖w‖` in radians per unit time.
    pub rate: f64,
    /// `w / ‖w‖`, normal to every invariant plane; `None` when trivial.
    pub normal: Option<Vec3>,
    /// Sliding equilibria on the manifold (`±ŵ` on the sphere, none on the
    /// torus since the axis misses it).
    pub equilibria: Vec<Vec3>,
    pub trivial: bool,
    /// `(a₂₁+b₂₁)² + (a₃₁+b₃₁)² + (a₃₂+b₃₂)²` (sphere only).
    pub rho: Option<f64>,
}

impl SlidingRotation {
    fn from_axis(manifold: SwitchingManifold, generator: Mat3, axis: Vec3, rho: Option<f64>) -> Self {
        let rate = axis.norm();
        let trivial = rate == 0.0;
        let normal = axis.normalized();
        let equilibria = match (manifold, normal) {
            (SwitchingManifold::Sphere, Some(n)) => vec![n, -n],
            _ => Vec::new(),
        };
        SlidingRotation {
            manifold,
            generator,
            axis,
            rate,
            normal,
            equilibria,
            trivial,
            rho,
        }
    }

    pub fn velocity(&self, x: Vec3) -> Vec3 {
        self.axis.cross(x)
    }

    /// Position after flowing `x` for time `t`.
    pub fn flow(&self, x: Vec3, t: f64) -> Vec3 {
        match self.normal {
            Some(n) => x.rotated(n, self.rate * t),
            None => x,
        }
    }

    /// `2π / ‖w‖`, or `None` for the trivial field.
    pub fn period(&self) -> Option<f64> {
        (!self.trivial).then(|| 2.0 * PI / self.rate)
    }

    /// `p₊` and `p₋` (sphere, nontrivial only).
    pub fn poles(&self) -> Option<(Vec3, Vec3)> {
        match self.equilibria.as_slice() {
            [p, q] => Some((*p, *q)),
            _ => None,
        }
    }
}

fn rotation_sums(pair: &InelasticPair) -> (f64, f64, f64) {
    let (a, b) = (&pair.a, &pair.b);
    (
        a[(1, 0)] + b[(1, 0)],
        a[(2, 0)] + b[(2, 0)],
        a[(2, 1)] + b[(2, 1)],
    )
}

pub fn sphere_sliding_data(pair: &InelasticPair) -> Result<SlidingRotation> {
    pair.require(SwitchingManifold::Sphere)?;
    let (c21, c31, c32) = rotation_sums(pair);
    let axis = Vec3::new(0.5 * c32, -0.5 * c31, 0.5 * c21);
    let rho = c21 * c21 + c31 * c31 + c32 * c32;
    Ok(SlidingRotation::from_axis(
        SwitchingManifold::Sphere,
        mean_field(&pair.a, &pair.b),
        axis,
        Some(rho),
    ))
}

pub fn torus_sliding_data(pair: &InelasticPair) -> Result<SlidingRotation> {
    pair.require(SwitchingManifold::Torus)?;
    let (c21, _, _) = rotation_sums(pair);
    Ok(SlidingRotation::from_axis(
        SwitchingManifold::Torus,
        mean_field(&pair.a, &pair.b),
        Vec3::new(0.0, 0.0, 0.5 * c21),
        None,
    ))
}

pub fn sliding_rotation(pair: &InelasticPair) -> Result<SlidingRotation> {
    match pair.manifold {
        SwitchingManifold::Sphere => sphere_sliding_data(pair),
        SwitchingManifold::Torus => torus_sliding_data(pair),
    }
}

/// `Ξ(s) = Ξ₂ s² + Ξ₁ s + Ξ₀` and the orbit/tangency intersections it yields
/// on the great circle orthogonal to the rotation axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiPolynomial {
    /// `[Ξ₂, Ξ₁, Ξ₀]`.
    pub coefficients: [f64; 3],
    pub roots: Vec<f64>,
    /// Direction of `γ(s)` for each root.
    pub directions: Vec<Vec3>,
    /// At most four points on the sphere.
    pub intersections: Vec<Vec3>,
    /// `Ξ ≡ 0`: the whole great circle is tangent.
    pub circle_is_tangent: bool,
}

/// The three coefficients of `Ξ(s)`, expanded term by term.
pub fn xi_coefficients(a: &Mat3, b21: f64, b31: f64, b32: f64) -> [f64; 3] {
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];
    let (a11, a12, a13) = (e(1, 1), e(1, 2), e(1, 3));
    let (a21, a22, a23) = (e(2, 1), e(2, 2), e(2, 3));
    let (a31, a32, a33) = (e(3, 1), e(3, 2), e(3, 3));

    let xi2 = 2.0 * a22 * b32 * a32 + 2.0 * a11 * b31 * a31 + a21 * b32 * b31 + a21 * b32 * a31
        + a21 * a32 * b31
        + a21 * a32 * a31
        + a12 * b32 * b31
        + a12 * b32 * a31
        + a12 * a32 * b31
        + a12 * a32 * a31
        + a11 * b31 * b31
        + a11 * a31 * a31
        + a22 * b32 * b32
        + a22 * a32 * a32;

    let xi1 = a32 * a32 * a32 - 2.0 * b21 * b31 * a11 - 2.0 * b21 * a31 * a11 - b21 * b32 * a21
        - b21 * a32 * a21
        - b21 * b32 * a12
        - b21 * a32 * a12
        + b31 * b32 * a13
        + a31 * b32 * a13
        + b31 * a32 * a13
        + a31 * a32 * a13
        - 2.0 * a11 * b31 * a21
        - 2.0 * a11 * a31 * a21
        - a12 * b32 * a21
        - a12 * a32 * a21
        + a31 * b32 * b31
        + a31 * a32 * b31
        + 2.0 * a32 * b32 * a23
        - a21 * a21 * b32
        - a21 * a21 * a32
        + a31 * a31 * b32
        + a31 * a31 * a32
        + b32 * b32 * a32
        + 2.0 * b32 * a32 * a32
        + b32 * b32 * a23
        + a32 * a32 * a23;

    let xi0 = -a13 * a32 * a21 + 2.0 * a33 * b32 * a32 + 2.0 * a11 * a21 * b21 - a21 * b32 * a31
        - a31 * b32 * b21
        - a21 * a32 * a31
        - a31 * a32 * b21
        - a13 * b32 * a21
        - a13 * b32 * b21
        + a11 * a21 * a21
        + a11 * b21 * b21
        + a33 * b32 * b32
        + a33 * a32 * a32
        - a13 * a32 * b21;

    [xi2, xi1, xi0]
}

pub fn xi_polynomial(pair: &InelasticPair) -> Result<XiPolynomial> {
    pair.require(SwitchingManifold::Sphere)?;
    let (b21, b31, b32) = (pair.b[(1, 0)], pair.b[(2, 0)], pair.b[(2, 1)]);
    let (c21, c31, c32) = rotation_sums(pair);
    if c32.abs() <= 1e-12 * pair.scale() {
        return Err(Error::ParametrizationDegenerate);
    }
    let coefficients = xi_coefficients(&pair.a, b21, b31, b32);
    let [xi2, xi1, xi0] = coefficients;
    let q = quadratic_form_q(&pair.a);

    let found = solve_quadratic(xi2, xi1, xi0);
    let circle_is_tangent = found == QuadraticRoots::IdenticallyZero;
    let roots = found.to_vec();
    let mut directions: Vec<Vec3> = roots
        .iter()
        .map(|&s| Vec3::new((s * c31 - c21) / c32, s, 1.0))
        .collect();
    if xi2 == 0.0 && !circle_is_tangent {
        // Root at infinity: the line of the plane with x₃ = 0.
        directions.push(Vec3::new(c31, c32, 0.0));
    }
    let mut intersections = Vec::new();
    for d in &directions {
        if let Some(u) = d.normalized() {
            if q.eval(u).abs() <= INTERSECTION_TOL {
                intersections.push(u);
                intersections.push(-u);
            }
        }
    }
    Ok(XiPolynomial {
        coefficients,
        roots,
        directions,
        intersections,
        circle_is_tangent,
    })
}

/// Points where the sliding orbit through `x0` meets `{Xσ₁ = 0}`.
///
/// The orbit is the circle `{|x| = 1, ⟨x, ν̂⟩ = ⟨x0, ν̂⟩}`; on it `xᵗQx` is
/// a trigonometric polynomial of degree two in the angle, solved through
/// the half-angle substitution.
pub fn trajectory_tangency_points(pair: &InelasticPair, x0: Vec3) -> Result<Vec<Vec3>> {
    let rot = sphere_sliding_data(pair)?;
    let n = rot.normal.ok_or(Error::TrivialSliding)?;
    let q = quadratic_form_q(&pair.a);
    let h = x0.dot(n).clamp(-1.0, 1.0);
    let center = n.scale(h);
    let r = (1.0 - h * h).max(0.0).sqrt();
    if r == 0.0 {
        return Ok(if q.eval(center).abs() <= INTERSECTION_TOL {
            vec![center]
        } else {
            Vec::new()
        });
    }

    let e1 = n.any_orthogonal();
    let e2 = n.cross(e1);
    // f(θ) = p0 + p1 cos θ + p2 sin θ + p3 cos 2θ + p4 sin 2θ in the basis
    // rotated by `alpha`.
    let trig = |alpha: f64| {
        let (s, c) = alpha.sin_cos();
        let u = e1.scale(c) + e2.scale(s);
        let v = e2.scale(c) - e1.scale(s);
        let (qc, qu, qv) = (q.apply(center), q.apply(u), q.apply(v));
        let (q11, q22, q12) = (u.dot(qu), v.dot(qv), u.dot(qv));
        [
            center.dot(qc) + 0.5 * r * r * (q11 + q22),
            2.0 * r * center.dot(qu),
            2.0 * r * center.dot(qv),
            0.5 * r * r * (q11 - q22),
            r * r * q12,
        ]
    };
    let eval = |p: &[f64; 5], th: f64| {
        p[0] + p[1] * th.cos() + p[2] * th.sin() + p[3] * (2.0 * th).cos() + p[4] * (2.0 * th).sin()
    };
    let p0 = trig(0.0);
    let scale = p0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale <= 1e-14 * q.frobenius_norm().max(1.0) {
        return Err(Error::OrbitInTangencySet);
    }
    // Shift the angle origin so θ = π (t = ∞) sits where |f| is largest.
    let alpha = (0..32)
        .map(|k| 2.0 * PI * k as f64 / 32.0)
        .max_by(|a, b| eval(&p0, a + PI).abs().total_cmp(&eval(&p0, b + PI).abs()))
        .unwrap_or(0.0);
    let p = trig(alpha);
    // (1 + t²)² f(θ) with t = tan(θ/2).
    let poly = [
        p[0] + p[1] + p[3],
        2.0 * p[2] + 4.0 * p[4],
        2.0 * p[0] - 6.0 * p[3],
        2.0 * p[2] - 4.0 * p[4],
        p[0] - p[1] + p[3],
    ];
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let (u, v) = (e1.scale(ca) + e2.scale(sa), e2.scale(ca) - e1.scale(sa));
    let mut points: Vec<Vec3> = Vec::new();
    for t in real_roots(&poly) {
        let th = 2.0 * t.atan();
        let x = center + (u.scale(th.cos()) + v.scale(th.sin())).scale(r);
        if q.eval(x).abs() <= INTERSECTION_TOL && points.iter().all(|p| p.distance(x) > 1e-9) {
            points.push(x);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOWER: Mat3 = Mat3::from_rows([[-1.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
    const XZ_SKEW: Mat3 = Mat3::from_rows([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);

    #[test]
    fn filippov_field_examples() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let s = filippov_field(&pair, Vec3::E1).unwrap();
        assert!((s - Vec3::new(0.0, 0.5, 0.0)).norm() < 1e-15);

        let saddle = Mat3::diag([0.5, -0.5, 0.0]);
        let pair = InelasticPair::sphere(saddle, 1.0, 0.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let err = filippov_field(&pair, Vec3::new(s, s, 0.0)).unwrap_err();
        assert!(matches!(err, Error::TangencyPoint(_)));
    }

    #[test]
    fn mean_field_examples() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let want = Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).scale(0.5);
        assert_eq!(mean_field(&pair.a, &pair.b), want);
        assert_eq!(mean_field(&LOWER, &-LOWER), Mat3::ZERO);
        let torus = InelasticPair::torus(XZ_SKEW, 2.0);
        assert_eq!(
            mean_field(&torus.a, &torus.b),
            Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
    }

    #[test]
    fn sphere_rotation_examples() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let rot = sphere_sliding_data(&pair).unwrap();
        assert_eq!(rot.axis, Vec3::new(0.0, 0.0, 0.5));
        assert_eq!(rot.rate, 0.5);
        assert_eq!(rot.equilibria, vec![Vec3::E3, -Vec3::E3]);
        assert_eq!(rot.rho, Some(1.0));
        assert!((rot.period().unwrap() - 4.0 * PI).abs() < 1e-14);

        let trivial = sphere_sliding_data(&InelasticPair::sphere(-Mat3::IDENTITY, 0.0, 0.0, 0.0)).unwrap();
        assert!(trivial.trivial);
        assert!(trivial.equilibria.is_empty());
        assert_eq!(trivial.period(), None);
    }

    #[test]
    fn torus_rotation_examples() {
        let rot = torus_sliding_data(&InelasticPair::torus(XZ_SKEW, 2.0)).unwrap();
        assert_eq!(rot.rate, 1.0);
        assert_eq!(
            rot.generator,
            Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
        assert!(rot.equilibria.is_empty());
        let trivial = torus_sliding_data(&InelasticPair::torus(XZ_SKEW, 0.0)).unwrap();
        assert!(trivial.trivial);
        assert!(sphere_sliding_data(&InelasticPair::torus(XZ_SKEW, 1.0)).is_err());
    }

    #[test]
    fn xi_expansion_matches_compact_form() {
        // Ξ(s) = (a₃₂+b₃₂)² · γ(s)ᵗ A γ(s) with γ(s) = ((s c₃₁ − c₂₁)/c₃₂, s, 1).
        let a = Mat3::from_rows([[0.3, -1.1, 0.8], [1.7, -0.6, 0.25], [-0.9, 1.4, 0.55]]);
        let (b21, b31, b32) = (0.4, -0.35, 0.9);
        let (c21, c31, c32) = (a[(1, 0)] + b21, a[(2, 0)] + b31, a[(2, 1)] + b32);
        let xi = xi_coefficients(&a, b21, b31, b32);
        for s in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let g = Vec3::new((s * c31 - c21) / c32, s, 1.0);
            let compact = c32 * c32 * a.mul_vec(g).dot(g);
            let expanded = xi[0] * s * s + xi[1] * s + xi[2];
            assert!((compact - expanded).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn xi_degenerate_parametrization() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        assert_eq!(xi_polynomial(&pair), Err(Error::ParametrizationDegenerate));
    }

    #[test]
    fn direct_intersections_on_equator() {
        let pair = InelasticPair::sphere(Mat3::diag([0.5, -0.5, 0.0]), 1.0, 0.0, 0.0);
        let pts = trajectory_tangency_points(&pair, Vec3::E1).unwrap();
        assert_eq!(pts.len(), 4, "{pts:?}");
        for p in pts {
            assert!(p[2].abs() < 1e-15);
            assert!((p[0].abs() - p[1].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn no_intersections_for_definite_forms() {
        let pair = InelasticPair::sphere(LOWER, 0.3, 0.2, -0.4);
        let x0 = Vec3::new(0.6, 0.0, 0.8);
        assert!(trajectory_tangency_points(&pair, x0).unwrap().is_empty());
    }

    #[test]
    fn orbit_inside_tangency_set_is_reported() {
        // Q = diag(0,0,2) vanishes on the equator, which is also the orbit.
        let a = Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let pair = InelasticPair::sphere(a, 0.0, 0.0, 0.0);
        assert_eq!(
            trajectory_tangency_points(&pair, Vec3::E1),
            Err(Error::OrbitInTangencySet)
        );
    }
}
