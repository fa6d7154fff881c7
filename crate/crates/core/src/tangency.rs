//! Lie derivatives, region labels and tangency sets.
//!
//! On the sphere the tangency set of a linear field is `{xᵗ Q x = 0} ∩ Σ₁`
//! with `Q = A + Aᵗ`; its shape is read off the inertia of `Q`:
//!
//! | inertia            | configuration        |
//! |--------------------|----------------------|
//! | (3,0,0), (0,3,0)   | empty                |
//! | (2,0,1), (0,2,1)   | two antipodal points |
//! | (1,0,2), (0,1,2)   | one great circle     |
//! | (1,1,1)            | two crossing great circles |
//! | (2,1,0), (1,2,0)   | two disjoint loops (elliptic cone ∩ sphere) |
//!
//! On the torus `Xσ₂ = q₂ + q₄` splits into a quadratic and a quartic part;
//! when `q₄ ≡ 0` (equivalently `A` skew) the tangency set is four circles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{Inertia, Mat3, SymForm3, Vec3};
use crate::error::{Error, Result};
use crate::inelastic::InelasticPair;
use crate::manifolds::{CircleCurve, SwitchingManifold, TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS};
use crate::poly::Poly3;

/// Default relative tolerance for tangency tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Points sampled per cone ∩ sphere loop.
pub const LOOP_SAMPLES: usize = 512;

/// `σ, Xσ, X²σ, X³σ` as polynomials for one linear field.
#[derive(Clone, Debug)]
pub struct LieTower {
    levels: [Poly3; 4],
}

impl LieTower {
    pub fn new(a: &Mat3, m: SwitchingManifold) -> Self {
        let p0 = m.surface().polynomial();
        let p1 = p0.lie(a);
        let p2 = p1.lie(a);
        let p3 = p2.lie(a);
        LieTower {
            levels: [p0, p1, p2, p3],
        }
    }

    /// `Xᵏσ` as a polynomial, `order ∈ 0..=3`.
    pub fn level(&self, order: usize) -> &Poly3 {
        &self.levels[order]
    }

    pub fn eval(&self, order: usize, x: Vec3) -> f64 {
        self.levels[order].eval(x)
    }
}

/// `Xᵏσ(x)` for `order ∈ {1, 2, 3}`, computed symbolically.
pub fn lie_derivative(a: &Mat3, m: SwitchingManifold, x: Vec3, order: usize) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "Lie derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    Ok(LieTower::new(a, m).eval(order, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangencyOrder {
    Quadratic,
    Cubic,
    Higher,
}

/// Filippov region of a manifold point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Sewing,
    Escape,
    Sliding,
    Tangency(TangencyOrder),
}

impl RegionLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegionLabel::Sewing => "Sewing",
            RegionLabel::Escape => "Escape",
            RegionLabel::Sliding => "Sliding",
            RegionLabel::Tangency(TangencyOrder::Quadratic) => "TangencyQuadratic",
            RegionLabel::Tangency(TangencyOrder::Cubic) => "TangencyCubic",
            RegionLabel::Tangency(TangencyOrder::Higher) => "TangencyHigher",
        }
    }
}

/// Zero threshold for a Lie derivative of order `order`:
/// `tol · scaleᵒʳᵈᵉʳ · max(1, |x|⁴)`.
pub fn tangency_threshold(scale: f64, x: Vec3, tol: f64, order: i32) -> f64 {
    tol * scale.max(1.0).powi(order) * x.norm_sq().powi(2).max(1.0)
}

pub fn tangency_order(a: &Mat3, m: SwitchingManifold, x: Vec3, scale: f64, tol: f64) -> TangencyOrder {
    let tower = LieTower::new(a, m);
    if tower.eval(2, x).abs() > tangency_threshold(scale, x, tol, 2) {
        TangencyOrder::Quadratic
    } else if tower.eval(3, x).abs() > tangency_threshold(scale, x, tol, 3) {
        TangencyOrder::Cubic
    } else {
        TangencyOrder::Higher
    }
}

/// Region label of a manifold point from the signs of `Xσ` and `Yσ`.
pub fn classify_point(pair: &InelasticPair, x: Vec3, tol: f64) -> RegionLabel {
    let (xs, ys) = pair.normal_components(x);
    let scale = pair.scale();
    let tau = tangency_threshold(scale, x, tol, 1);
    if xs.abs() <= tau || ys.abs() <= tau {
        let field = if xs.abs() <= tau { &pair.a } else { &pair.b };
        return RegionLabel::Tangency(tangency_order(field, pair.manifold, x, scale, tol));
    }
    match (xs > 0.0, ys > 0.0) {
        (true, true) | (false, false) => RegionLabel::Sewing,
        (true, false) => RegionLabel::Escape,
        (false, true) => RegionLabel::Sliding,
    }
}

/// Tangent direction of the tangency curve of `x ↦ A x` through `x`,
/// `∇σ × ∇(Xσ)` (unnormalized; zero where the curve is singular).
pub fn tangency_curve_tangent(a: &Mat3, m: SwitchingManifold, x: Vec3) -> Vec3 {
    let tower = LieTower::new(a, m);
    m.surface().grad(x).cross(tower.level(1).gradient(x))
}

/// `Q = A + Aᵗ`, so that `Xσ₁(x) = xᵗ Q x`.
pub fn quadratic_form_q(a: &Mat3) -> SymForm3 {
    SymForm3::new([
        2.0 * a[(0, 0)],
        2.0 * a[(1, 1)],
        2.0 * a[(2, 2)],
        a[(0, 1)] + a[(1, 0)],
        a[(0, 2)] + a[(2, 0)],
        a[(1, 2)] + a[(2, 1)],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangencyConfiguration {
    Empty,
    TwoPoints,
    OneGreatCircle,
    TwoCrossingCircles,
    TwoDisjointLoops,
}

impl TangencyConfiguration {
    pub fn from_inertia(i: Inertia) -> Option<Self> {
        let (p, n) = (i.positive.max(i.negative), i.positive.min(i.negative));
        Some(match (p, n, i.zero) {
            (3, 0, 0) => TangencyConfiguration::Empty,
            (2, 0, 1) => TangencyConfiguration::TwoPoints,
            (1, 0, 2) => TangencyConfiguration::OneGreatCircle,
            (1, 1, 1) => TangencyConfiguration::TwoCrossingCircles,
            (2, 1, 0) => TangencyConfiguration::TwoDisjointLoops,
            _ => return None,
        })
    }
}

/// A closed curve given by dense samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledLoop {
    pub label: String,
    pub points: Vec<Vec3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyClassification {
    pub inertia: Inertia,
    pub configuration: TangencyConfiguration,
    /// Great circles (exact).
    pub circles: Vec<CircleCurve>,
    /// Cone ∩ sphere loops (sampled).
    pub loops: Vec<SampledLoop>,
    /// Isolated tangency points (semidefinite rank-two forms).
    pub points: Vec<Vec3>,
}

impl TangencyClassification {
    /// Every point that represents the tangency set.
    pub fn all_points(&self, per_circle: usize) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = self.points.clone();
        for c in &self.circles {
            out.extend(c.sample(per_circle));
        }
        for l in &self.loops {
            out.extend(l.points.iter().copied());
        }
        out
    }

    /// Largest `max(|σ₁|, |xᵗQx|)` over the represented tangency set.
    pub fn max_residual(&self, q: &SymForm3) -> f64 {
        self.all_points(256)
            .into_iter()
            .map(|p| (p.norm_sq() - 1.0).abs().max(q.eval(p).abs()))
            .fold(0.0, f64::max)
    }
}

/// Tangency set of `xᵗ Q x = 0` on the unit sphere.
pub fn classify_sphere_tangency(q: &SymForm3, tol: f64) -> Result<TangencyClassification> {
    let inertia = q.inertia(tol);
    let configuration = TangencyConfiguration::from_inertia(inertia).ok_or(Error::ZeroForm)?;
    let eig = q.eigen();
    let cut = tol * q.spectral_radius().max(1.0);
    let is_zero = |l: f64| l.abs() <= cut;

    let mut out = TangencyClassification {
        inertia,
        configuration,
        circles: Vec::new(),
        loops: Vec::new(),
        points: Vec::new(),
    };
    match configuration {
        TangencyConfiguration::Empty => {}
        TangencyConfiguration::TwoPoints => {
            let k = (0..3).find(|&k| is_zero(eig.values[k])).expect("one zero eigenvalue");
            let v = eig.vectors[k];
            out.points = vec![v, -v];
        }
        TangencyConfiguration::OneGreatCircle => {
            let k = (0..3).find(|&k| !is_zero(eig.values[k])).expect("one nonzero eigenvalue");
            out.circles.push(CircleCurve::new("G1", Vec3::ZERO, eig.vectors[k], 1.0));
        }
        TangencyConfiguration::TwoCrossingCircles => {
            // λ₊u² + λ₋v² = 0 factors into √λ₊ u = ±√|λ₋| v.
            let (lp, up) = (eig.values[0], eig.vectors[0]);
            let (ln, un) = (eig.values[2], eig.vectors[2]);
            let (sp, sn) = (lp.sqrt(), (-ln).sqrt());
            out.circles.push(CircleCurve::new("G1", Vec3::ZERO, up.scale(sp) - un.scale(sn), 1.0));
            out.circles.push(CircleCurve::new("G2", Vec3::ZERO, up.scale(sp) + un.scale(sn), 1.0));
        }
        TangencyConfiguration::TwoDisjointLoops => {
            // The odd-signed eigenvector is the cone axis.
            let odd = if inertia.positive == 1 { 0 } else { 2 };
            let (l_axis, axis) = (eig.values[odd].abs(), eig.vectors[odd]);
            let others: Vec<usize> = (0..3).filter(|&k| k != odd).collect();
            let (lu, u) = (eig.values[others[0]].abs(), eig.vectors[others[0]]);
            let (lv, v) = (eig.values[others[1]].abs(), eig.vectors[others[1]]);
            for (label, sign) in [("L1", 1.0), ("L2", -1.0)] {
                let points = (0..LOOP_SAMPLES)
                    .map(|k| {
                        let phi = 2.0 * PI * k as f64 / LOOP_SAMPLES as f64;
                        let (s, c) = phi.sin_cos();
                        let ratio = (lu * c * c + lv * s * s) / l_axis;
                        let t = 1.0 / (1.0 + ratio).sqrt();
                        (u.scale(c) + v.scale(s)).scale(t) + axis.scale(sign * ratio.sqrt() * t)
                    })
                    .collect();
                out.loops.push(SampledLoop {
                    label: label.to_string(),
                    points,
                });
            }
        }
    }
    Ok(out)
}

/// Monomials of `q₂`, in display order.
pub const Q2_MONOMIALS: [[usize; 3]; 6] = [[2, 0, 0], [1, 1, 0], [0, 2, 0], [1, 0, 1], [0, 1, 1], [0, 0, 2]];

/// Monomials of `q₄`, in display order.
pub const Q4_MONOMIALS: [[usize; 3]; 15] = [
    [4, 0, 0],
    [3, 1, 0],
    [2, 2, 0],
    [1, 3, 0],
    [0, 4, 0],
    [3, 0, 1],
    [2, 1, 1],
    [1, 2, 1],
    [0, 3, 1],
    [2, 0, 2],
    [1, 1, 2],
    [0, 2, 2],
    [1, 0, 3],
    [0, 1, 3],
    [0, 0, 4],
];

pub fn monomial_name(e: [usize; 3]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, p) })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// `Xσ₂ = q₂ + q₄`, coefficients in the order of [`Q2_MONOMIALS`] and
/// [`Q4_MONOMIALS`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusQuartic {
    pub q2: [f64; 6],
    pub q4: [f64; 15],
}

impl TorusQuartic {
    pub fn to_poly(&self) -> Poly3 {
        let mut p = Poly3::zero();
        for (e, c) in Q2_MONOMIALS.iter().zip(self.q2) {
            p = p.add(&Poly3::monomial(c, *e));
        }
        for (e, c) in Q4_MONOMIALS.iter().zip(self.q4) {
            p = p.add(&Poly3::monomial(c, *e));
        }
        p
    }

    pub fn eval_q2(&self, x: Vec3) -> f64 {
        Q2_MONOMIALS
            .iter()
            .zip(self.q2)
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.to_poly().eval(x)
    }
}

pub fn torus_q2_q4(a: &Mat3) -> TorusQuartic {
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];
    let q2 = [
        -20.0 * e(1, 1),
        -20.0 * e(2, 1) - 20.0 * e(1, 2),
        -20.0 * e(2, 2),
        -20.0 * e(1, 3) + 12.0 * e(3, 1),
        12.0 * e(3, 2) - 20.0 * e(2, 3),
        12.0 * e(3, 3),
    ];
    let s12 = 4.0 * e(2, 1) + 4.0 * e(1, 2);
    let s13 = 4.0 * e(1, 3) + 4.0 * e(3, 1);
    let s23 = 4.0 * e(2, 3) + 4.0 * e(3, 2);
    let q4 = [
        4.0 * e(1, 1),
        s12,
        4.0 * e(1, 1) + 4.0 * e(2, 2),
        s12,
        4.0 * e(2, 2),
        s13,
        s23,
        s13,
        s23,
        4.0 * e(1, 1) + 4.0 * e(3, 3),
        s12,
        4.0 * e(2, 2) + 4.0 * e(3, 3),
        s13,
        s23,
        4.0 * e(3, 3),
    ];
    TorusQuartic { q2, q4 }
}

/// Quartic coefficients of `Xσ₂` exceeding `tol · max(1, ‖A‖)`, by monomial.
pub fn quartic_violations(a: &Mat3, tol: f64) -> Vec<(String, f64)> {
    let cut = tol * a.frobenius_norm().max(1.0);
    let tq = torus_q2_q4(a);
    Q4_MONOMIALS
        .iter()
        .zip(tq.q4)
        .filter(|(_, c)| c.abs() > cut)
        .map(|(e, c)| (monomial_name(*e), c))
        .collect()
}

/// `Xσ₂` is quadratic (all quartic coefficients vanish within tolerance).
pub fn quadratic_hypothesis(a: &Mat3, tol: f64) -> bool {
    quartic_violations(a, tol).is_empty()
}

/// One of the four pieces the tangency circles cut the torus into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorusRegion {
    R1,
    R2,
    R3,
    R4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusTangencySet {
    /// `C1, C2` (plane `x₃ = 0`, radii 1 and 3) then `C3, C4` (minor circles
    /// in the plane `a₃₁x₁ + a₃₂x₂ = 0`).
    pub circles: [CircleCurve; 4],
    /// `C1 ∩ C3, C1 ∩ C4, C2 ∩ C3, C2 ∩ C4`.
    pub crossings: [Vec3; 4],
    /// Unit normal of the plane containing `C3` and `C4`.
    pub plane_normal: Vec3,
}

impl TorusTangencySet {
    pub fn singular_circles(&self) -> &[CircleCurve] {
        &self.circles[..2]
    }

    pub fn on_singular_circle(&self, x: Vec3, tol: f64) -> bool {
        self.singular_circles().iter().any(|c| c.distance_to(x) <= tol)
    }

    /// `R1`/`R2` lie above the equatorial plane, `R3`/`R4` below; the odd
    /// ones are on the positive side of the `C3`/`C4` plane.
    pub fn region_of(&self, x: Vec3) -> Option<TorusRegion> {
        let side = x.dot(self.plane_normal);
        if x[2] == 0.0 || side == 0.0 {
            return None;
        }
        Some(match (x[2] > 0.0, side > 0.0) {
            (true, true) => TorusRegion::R1,
            (true, false) => TorusRegion::R2,
            (false, true) => TorusRegion::R3,
            (false, false) => TorusRegion::R4,
        })
    }
}

/// The four tangency circles of a torus field with quadratic `Xσ₂`.
pub fn torus_tangency_set(a: &Mat3, tol: f64) -> Result<TorusTangencySet> {
    let violations = quartic_violations(a, tol);
    if !violations.is_empty() {
        return Err(Error::HypothesisViolation(violations));
    }
    let (a31, a32) = (a[(2, 0)], a[(2, 1)]);
    if a31.hypot(a32) <= tol * a.frobenius_norm().max(1.0) {
        return Err(Error::DegenerateTorus);
    }
    let n = Vec3::new(a31, a32, 0.0).normalized().expect("nonzero");
    let d = Vec3::E3.cross(n);
    let (big, small) = (TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS);
    let circles = [
        CircleCurve::new("C1", Vec3::ZERO, Vec3::E3, big - small),
        CircleCurve::new("C2", Vec3::ZERO, Vec3::E3, big + small),
        CircleCurve::new("C3", d.scale(big), n, small),
        CircleCurve::new("C4", d.scale(-big), n, small),
    ];
    let crossings = [
        d.scale(big - small),
        d.scale(-(big - small)),
        d.scale(big + small),
        d.scale(-(big + small)),
    ];
    Ok(TorusTangencySet {
        circles,
        crossings,
        plane_normal: n,
    })
}
