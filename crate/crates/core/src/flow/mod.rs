//! Trajectories of the full piecewise-linear system.
//!
//! Off the manifold the motion is the exact linear flow `exp(At) x` (outside)
//! or `exp(Bt) x` (inside). Crossings are found by dense sampling of `σ`
//! followed by bisection. On the manifold the motion follows the closed-form
//! sliding rotation; tangency curves met transversally are passed through,
//! anything else ends the trajectory.

pub mod closure;
pub mod verify;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{expm, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::inelastic::InelasticPair;
use crate::manifolds::{project_to_manifold, SwitchingManifold};
use crate::sliding::{sliding_rotation, SlidingRotation};
use crate::tangency::{
    classify_point, quadratic_hypothesis, tangency_curve_tangent, tangency_threshold, torus_tangency_set,
    RegionLabel, TangencyOrder, DEFAULT_TOL,
};

pub use closure::{closure_report, ClosureReport};
pub use verify::{
    harness, harnesses, verify_theorem_a, verify_theorem_b, CheckResult, HarnessInput, TheoremHarness,
    TheoremReport,
};

/// `|σ|` accepted as "on the manifold" by the bisection.
pub const CROSSING_SIGMA_TOL: f64 = 1e-12;
/// `|σ|` below which a sampled local minimum counts as a possible graze.
pub const GRAZE_SIGMA_TOL: f64 = 1e-6;
/// Minimum angle in radians between the sliding velocity and a tangency
/// curve for the trajectory to be continued across it.
pub const TRANSVERSALITY_ANGLE: f64 = 1e-4;
/// Sliding samples are reprojected only when `|σ|` drifts above this.
pub const SLIDING_DRIFT_TOL: f64 = 1e-10;
/// Distance to `C1`/`C2` treated as lying on them.
pub const SINGULAR_CIRCLE_TOL: f64 = 1e-9;
/// Grid points per revolution used to bracket tangency crossings.
const DETECTION_PER_TURN: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    FreeAbove,
    FreeBelow,
    Sliding,
    CrossingEvent,
    TangencyStop,
    SingularCircleStop,
}

impl SegmentKind {
    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::FreeAbove => "FreeAbove",
            SegmentKind::FreeBelow => "FreeBelow",
            SegmentKind::Sliding => "Sliding",
            SegmentKind::CrossingEvent => "CrossingEvent",
            SegmentKind::TangencyStop => "TangencyStop",
            SegmentKind::SingularCircleStop => "SingularCircleStop",
        }
    }
}

/// Which vector field drives a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoverningField {
    /// `X = A x`, outside.
    Outer,
    /// `Y = B x`, inside.
    Inner,
    /// `½(A + B) x` on the manifold.
    Sliding,
    /// Zero-length event marker.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub kind: SegmentKind,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: Vec<(f64, Vec3)>,
    pub field: GoverningField,
}

impl TrajectorySegment {
    fn marker(kind: SegmentKind, t: f64, x: Vec3) -> Self {
        TrajectorySegment {
            kind,
            t_start: t,
            t_end: t,
            samples: vec![(t, x)],
            field: GoverningField::None,
        }
    }

    pub fn first_point(&self) -> Option<Vec3> {
        self.samples.first().map(|s| s.1)
    }

    pub fn last_point(&self) -> Option<Vec3> {
        self.samples.last().map(|s| s.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrajectoryEvent {
    /// Free flight reached the manifold.
    Hit { t: f64, point: Vec3, label: String },
    /// Sewing point crossed.
    Crossing { t: f64, point: Vec3 },
    /// Sliding passed a tangency curve transversally.
    TangencyCrossing { t: f64, point: Vec3, order: TangencyOrder },
    /// Sliding reached a tangency it cannot continue across.
    TangencyHit { t: f64, point: Vec3, order: TangencyOrder },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    TimeLimit,
    TangencyBoundary,
    SingularCircle,
    Equilibrium,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::TimeLimit => "TimeLimit",
            TerminationReason::TangencyBoundary => "TangencyBoundary",
            TerminationReason::SingularCircle => "SingularCircle",
            TerminationReason::Equilibrium => "Equilibrium",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdvisoryKind {
    /// `σ` dipped close to zero without a sign change.
    PossibleMissedCrossing,
    /// A region label sits close to its tangency threshold.
    AmbiguousRegion,
    /// The segment cap was reached before `t_max`.
    SegmentCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub kind: AdvisoryKind,
    pub t: f64,
    pub point: Vec3,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrajectory {
    pub segments: Vec<TrajectorySegment>,
    pub events: Vec<TrajectoryEvent>,
    pub termination: TerminationReason,
    pub advisories: Vec<Advisory>,
}

/// Outcome of a crossing search.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingScan {
    pub hit: Option<(f64, Vec3)>,
    pub advisories: Vec<Advisory>,
}

/// First time in `(0, t_max]` at which `exp(At) x0` meets the manifold.
pub fn first_crossing(a: &Mat3, m: SwitchingManifold, x0: Vec3, t_max: f64) -> Result<CrossingScan> {
    if m.surface().sigma(x0) == 0.0 {
        return Err(Error::InvalidArgument("first_crossing needs a start off the manifold".into()));
    }
    scan_crossing(a, m, x0, t_max, false)
}

/// With `leaving` set, `x0` may lie on the manifold; the side is taken from
/// the first sample after it.
fn scan_crossing(a: &Mat3, m: SwitchingManifold, x0: Vec3, t_max: f64, leaving: bool) -> Result<CrossingScan> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let surface = m.surface();
    let at = |t: f64| -> Result<Vec3> { Ok(expm(&a.scale(t))?.mul_vec(x0)) };
    let sig = |x: Vec3| surface.sigma(x);

    let h = (t_max / 1000.0).min(0.01);
    let n = (t_max / h).ceil() as usize;
    let time = |k: usize| if k == n { t_max } else { k as f64 * h };

    let mut advisories = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_s = sig(x0);
    let mut before_prev_s = f64::NAN;
    let mut prev_x = x0;
    for k in 1..=n {
        let t = time(k);
        let x = at(t)?;
        let s = sig(x);
        if leaving && k == 1 {
            prev_s = s;
            prev_t = t;
            prev_x = x;
            continue;
        }
        if s == 0.0 {
            return Ok(CrossingScan {
                hit: Some((t, x)),
                advisories,
            });
        }
        if s.signum() != prev_s.signum() {
            let (t_hit, x_hit) = bisect_sigma(&at, &sig, prev_t, prev_s, t)?;
            return Ok(CrossingScan {
                hit: Some((t_hit, x_hit)),
                advisories,
            });
        }
        if prev_s.abs() < GRAZE_SIGMA_TOL && prev_s.abs() < s.abs() && prev_s.abs() < before_prev_s.abs() {
            advisories.push(Advisory {
                kind: AdvisoryKind::PossibleMissedCrossing,
                t: prev_t,
                point: prev_x,
                value: prev_s,
            });
        }
        before_prev_s = prev_s;
        prev_t = t;
        prev_s = s;
        prev_x = x;
    }
    Ok(CrossingScan { hit: None, advisories })
}

fn bisect_sigma(
    at: &impl Fn(f64) -> Result<Vec3>,
    sig: &impl Fn(Vec3) -> f64,
    mut lo: f64,
    mut s_lo: f64,
    mut hi: f64,
) -> Result<(f64, Vec3)> {
    let mut best = (hi, at(hi)?);
    let mut best_s = sig(best.1).abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let x = at(mid)?;
        let s = sig(x);
        if s.abs() < best_s {
            best = (mid, x);
            best_s = s.abs();
        }
        if best_s <= CROSSING_SIGMA_TOL {
            break;
        }
        if s.signum() == s_lo.signum() {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Samples of the exact linear flow on `[0, dt]`, shifted to start at `t0`.
fn free_samples(a: &Mat3, x0: Vec3, t0: f64, dt: f64, n: usize, end: Vec3) -> Result<Vec<(f64, Vec3)>> {
    let n = n.max(2);
    let mut out = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let s = dt * k as f64 / (n - 1) as f64;
        out.push((t0 + s, expm(&a.scale(s))?.mul_vec(x0)));
    }
    out.push((t0 + dt, end));
    Ok(out)
}

/// What happens when sliding reaches a tangency curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangencyPolicy {
    /// Stop at the first tangency.
    Stop,
    /// Continue across transversal crossings, stop otherwise.
    PassTransversal,
    /// Follow the sliding rotation regardless, recording contacts.
    Record,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingOptions {
    pub tol: f64,
    pub policy: TangencyPolicy,
}

impl Default for SlidingOptions {
    fn default() -> Self {
        SlidingOptions {
            tol: DEFAULT_TOL,
            policy: TangencyPolicy::PassTransversal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyContact {
    pub t: f64,
    pub point: Vec3,
    pub transversal: bool,
    /// Angle between the sliding velocity and the tangency curve.
    pub angle: f64,
    pub order: TangencyOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SlidingStop {
    Completed,
    Tangency(TangencyContact),
    SingularCircle,
    Equilibrium,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingRun {
    pub segment: TrajectorySegment,
    pub stop: SlidingStop,
    /// Tangency contacts passed through (or recorded) before the stop.
    pub crossings: Vec<TangencyContact>,
    pub rotation: SlidingRotation,
}

/// Sliding motion from `x0` for time `t_span`, sampled at `n_samples`
/// evenly spaced times.
pub fn integrate_sliding(
    pair: &InelasticPair,
    x0: Vec3,
    t_span: f64,
    n_samples: usize,
    opts: &SlidingOptions,
) -> Result<SlidingRun> {
    slide(pair, x0, 0.0, t_span, n_samples, opts)
}

fn slide(
    pair: &InelasticPair,
    x0: Vec3,
    t0: f64,
    t_span: f64,
    n_samples: usize,
    opts: &SlidingOptions,
) -> Result<SlidingRun> {
    if !(t_span >= 0.0 && t_span.is_finite()) {
        return Err(Error::InvalidArgument(format!("sliding time must be finite and non-negative, got {t_span}")));
    }
    let m = pair.manifold;
    let surface = m.surface();
    let residual = surface.sigma(x0);
    if residual.abs() > 1e-8 * surface.sigma_scale() {
        return Err(Error::NotOnManifold { point: x0, residual });
    }
    let x0 = if residual.abs() > CROSSING_SIGMA_TOL {
        project_to_manifold(m, x0)?
    } else {
        x0
    };
    let rotation = sliding_rotation(pair)?;
    if rotation.trivial {
        return Err(Error::TrivialSliding);
    }
    let stopped = |stop: SlidingStop| SlidingRun {
        segment: TrajectorySegment {
            kind: SegmentKind::Sliding,
            t_start: t0,
            t_end: t0,
            samples: vec![(t0, x0)],
            field: GoverningField::Sliding,
        },
        stop,
        crossings: Vec::new(),
        rotation: rotation.clone(),
    };

    if m == SwitchingManifold::Torus && quadratic_hypothesis(&pair.a, opts.tol) {
        if let Ok(set) = torus_tangency_set(&pair.a, opts.tol) {
            if set.on_singular_circle(x0, SINGULAR_CIRCLE_TOL) {
                return Ok(stopped(SlidingStop::SingularCircle));
            }
        }
    }
    if rotation.velocity(x0).norm() <= 1e-12 * rotation.rate * x0.norm().max(1.0) {
        return Ok(stopped(SlidingStop::Equilibrium));
    }

    let scale = pair.scale();
    let normal = |x: Vec3| pair.normal_components(x).0;
    let threshold = |x: Vec3| tangency_threshold(scale, x, opts.tol, 1);
    let flow = |t: f64| rotation.flow(x0, t);
    let contact = |t: f64, x: Vec3| -> TangencyContact {
        let v = rotation.velocity(x);
        let tau = tangency_curve_tangent(&pair.a, m, x);
        let angle = if v.norm() == 0.0 || tau.norm() <= 1e-12 * scale * x.norm_sq().max(1.0) {
            0.0
        } else {
            v.cross(tau).norm().atan2(v.dot(tau).abs())
        };
        let order = crate::tangency::tangency_order(&pair.a, m, x, scale, opts.tol);
        TangencyContact {
            t: t0 + t,
            point: x,
            transversal: angle > TRANSVERSALITY_ANGLE,
            angle,
            order,
        }
    };

    let mut crossings = Vec::new();
    let mut stop_at: Option<(f64, TangencyContact)> = None;

    // Starting on a tangency curve: rule e decides whether we may leave.
    if normal(x0).abs() <= threshold(x0) {
        let c = contact(0.0, x0);
        let blocked = match opts.policy {
            TangencyPolicy::Stop => true,
            TangencyPolicy::PassTransversal => !c.transversal,
            TangencyPolicy::Record => false,
        };
        if blocked {
            return Ok(stopped(SlidingStop::Tangency(c)));
        }
        crossings.push(c);
    }

    let turns = rotation.rate * t_span / (2.0 * PI);
    let n_grid = ((turns * DETECTION_PER_TURN).ceil() as usize).max(n_samples).max(2);
    let grid_t = |k: usize| t_span * k as f64 / n_grid as f64;
    let mut prev_f = normal(x0);
    if prev_f.abs() <= threshold(x0) {
        prev_f = normal(flow(grid_t(1)));
    }
    let mut before_prev_f = f64::NAN;
    for k in 1..=n_grid {
        let t = grid_t(k);
        let x = flow(t);
        let f = normal(x);
        let mut found: Vec<TangencyContact> = Vec::new();
        if f.signum() != prev_f.signum() && f != 0.0 {
            let ts = bisect_scalar(|s| normal(flow(s)), grid_t(k - 1), prev_f, t);
            found.push(contact(ts, flow(ts)));
        } else if k >= 2
            && prev_f.signum() == before_prev_f.signum()
            && prev_f.abs() < before_prev_f.abs()
            && prev_f.abs() <= f.abs()
        {
            let (ts, v) = minimize_abs(|s| normal(flow(s)), grid_t(k - 2), t);
            let x = flow(ts);
            if v <= threshold(x) {
                let mut c = contact(ts, x);
                c.transversal = false;
                found.push(c);
            }
        }
        for c in found {
            let blocked = match opts.policy {
                TangencyPolicy::Stop => true,
                TangencyPolicy::PassTransversal => !c.transversal,
                TangencyPolicy::Record => false,
            };
            if blocked {
                stop_at = Some((c.t - t0, c));
                break;
            }
            crossings.push(c);
        }
        if stop_at.is_some() {
            break;
        }
        if f != 0.0 {
            before_prev_f = prev_f;
            prev_f = f;
        }
    }

    let t_end = stop_at.as_ref().map_or(t_span, |(t, _)| *t);
    let n = n_samples.max(2);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..n {
        let t = t_span * k as f64 / (n - 1) as f64;
        if t >= t_end && k > 0 {
            break;
        }
        samples.push((t0 + t, keep_on_manifold(m, flow(t))?));
    }
    if samples.last().is_none_or(|s| s.0 < t0 + t_end) {
        samples.push((t0 + t_end, keep_on_manifold(m, flow(t_end))?));
    }
    let segment = TrajectorySegment {
        kind: SegmentKind::Sliding,
        t_start: t0,
        t_end: t0 + t_end,
        samples,
        field: GoverningField::Sliding,
    };
    let stop = match stop_at {
        Some((_, c)) => SlidingStop::Tangency(c),
        None => SlidingStop::Completed,
    };
    Ok(SlidingRun {
        segment,
        stop,
        crossings,
        rotation,
    })
}

fn keep_on_manifold(m: SwitchingManifold, x: Vec3) -> Result<Vec3> {
    if m.surface().sigma(x).abs() > SLIDING_DRIFT_TOL {
        project_to_manifold(m, x)
    } else {
        Ok(x)
    }
}

fn bisect_scalar(f: impl Fn(f64) -> f64, mut lo: f64, mut f_lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == f_lo.signum() {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimum of `|f|` on `[lo, hi]`.
fn minimize_abs(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c).abs(), f(d).abs());
    for _ in 0..100 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c).abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d).abs();
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub tol: f64,
    pub policy: TangencyPolicy,
    /// Spacing of emitted samples.
    pub sample_dt: f64,
    pub max_samples_per_segment: usize,
    pub max_segments: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            tol: DEFAULT_TOL,
            policy: TangencyPolicy::PassTransversal,
            sample_dt: 0.02,
            max_samples_per_segment: 100_000,
            max_segments: 64,
        }
    }
}

impl SimulateOptions {
    fn sample_count(&self, dt: f64) -> usize {
        ((dt / self.sample_dt).ceil() as usize + 1).clamp(2, self.max_samples_per_segment)
    }
}

/// Filippov trajectory from `x0` over `[0, t_max]`.
pub fn simulate(pair: &InelasticPair, x0: Vec3, t_max: f64, opts: &SimulateOptions) -> Result<PiecewiseTrajectory> {
    if !x0.is_finite() || !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::InvalidArgument("simulate needs a finite start and a non-negative time".into()));
    }
    let m = pair.manifold;
    let surface = m.surface();
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut advisories = Vec::new();
    let mut t = 0.0;
    let mut x = x0;
    let mut leaving: Option<(Mat3, SegmentKind, GoverningField)> = None;

    for _ in 0..opts.max_segments {
        if t >= t_max {
            return Ok(finish(segments, events, advisories, TerminationReason::TimeLimit, t, x));
        }
        let s = surface.sigma(x);
        let off = s.abs() > CROSSING_SIGMA_TOL.max(1e-14 * surface.sigma_scale());
        if off || leaving.is_some() {
            let (a, kind, field) = leaving.take().unwrap_or(if s > 0.0 {
                (pair.a, SegmentKind::FreeAbove, GoverningField::Outer)
            } else {
                (pair.b, SegmentKind::FreeBelow, GoverningField::Inner)
            });
            let remaining = t_max - t;
            let scan = scan_crossing(&a, m, x, remaining, !off)?;
            advisories.extend(scan.advisories.into_iter().map(|mut adv| {
                adv.t += t;
                adv
            }));
            let (dt, end) = match scan.hit {
                Some(hit) => hit,
                None => (remaining, expm(&a.scale(remaining))?.mul_vec(x)),
            };
            let samples = free_samples(&a, x, t, dt, opts.sample_count(dt), end)?;
            segments.push(TrajectorySegment {
                kind,
                t_start: t,
                t_end: t + dt,
                samples,
                field,
            });
            t += dt;
            x = end;
            if scan.hit.is_none() {
                return Ok(finish(segments, events, advisories, TerminationReason::TimeLimit, t, x));
            }
            let label = classify_point(pair, x, opts.tol);
            events.push(TrajectoryEvent::Hit {
                t,
                point: x,
                label: label.name().to_string(),
            });
            continue;
        }

        let label = classify_point(pair, x, opts.tol);
        let (xs, ys) = pair.normal_components(x);
        let tau = tangency_threshold(pair.scale(), x, opts.tol, 1);
        if !matches!(label, RegionLabel::Tangency(_)) && xs.abs().min(ys.abs()) <= 100.0 * tau {
            advisories.push(Advisory {
                kind: AdvisoryKind::AmbiguousRegion,
                t,
                point: x,
                value: xs,
            });
        }
        match label {
            RegionLabel::Sewing => {
                events.push(TrajectoryEvent::Crossing { t, point: x });
                segments.push(TrajectorySegment::marker(SegmentKind::CrossingEvent, t, x));
                leaving = Some(if xs > 0.0 {
                    (pair.a, SegmentKind::FreeAbove, GoverningField::Outer)
                } else {
                    (pair.b, SegmentKind::FreeBelow, GoverningField::Inner)
                });
            }
            RegionLabel::Sliding | RegionLabel::Escape | RegionLabel::Tangency(_) => {
                let remaining = t_max - t;
                let sopts = SlidingOptions {
                    tol: opts.tol,
                    policy: opts.policy,
                };
                let run = match slide(pair, x, t, remaining, opts.sample_count(remaining), &sopts) {
                    Err(Error::TrivialSliding) => {
                        segments.push(TrajectorySegment {
                            kind: SegmentKind::Sliding,
                            t_start: t,
                            t_end: t,
                            samples: vec![(t, x)],
                            field: GoverningField::Sliding,
                        });
                        return Ok(finish(segments, events, advisories, TerminationReason::Equilibrium, t, x));
                    }
                    other => other?,
                };
                events.extend(run.crossings.iter().map(|c| TrajectoryEvent::TangencyCrossing {
                    t: c.t,
                    point: c.point,
                    order: c.order,
                }));
                let end = run.segment.last_point().unwrap_or(x);
                let t_end = run.segment.t_end;
                segments.push(run.segment);
                let reason = match run.stop {
                    SlidingStop::Completed => TerminationReason::TimeLimit,
                    SlidingStop::Equilibrium => TerminationReason::Equilibrium,
                    SlidingStop::SingularCircle => {
                        segments.push(TrajectorySegment::marker(SegmentKind::SingularCircleStop, t_end, end));
                        TerminationReason::SingularCircle
                    }
                    SlidingStop::Tangency(c) => {
                        events.push(TrajectoryEvent::TangencyHit {
                            t: c.t,
                            point: c.point,
                            order: c.order,
                        });
                        segments.push(TrajectorySegment::marker(SegmentKind::TangencyStop, t_end, end));
                        TerminationReason::TangencyBoundary
                    }
                };
                return Ok(PiecewiseTrajectory {
                    segments,
                    events,
                    termination: reason,
                    advisories,
                });
            }
        }
    }
    advisories.push(Advisory {
        kind: AdvisoryKind::SegmentCap,
        t,
        point: x,
        value: opts.max_segments as f64,
    });
    Ok(finish(segments, events, advisories, TerminationReason::TimeLimit, t, x))
}

fn finish(
    mut segments: Vec<TrajectorySegment>,
    events: Vec<TrajectoryEvent>,
    advisories: Vec<Advisory>,
    termination: TerminationReason,
    t: f64,
    x: Vec3,
) -> PiecewiseTrajectory {
    if segments.is_empty() {
        segments.push(TrajectorySegment::marker(SegmentKind::Sliding, t, x));
    }
    PiecewiseTrajectory {
        segments,
        events,
        termination,
        advisories,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOWER: Mat3 = Mat3::from_rows([[-1.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
    const XZ_SKEW: Mat3 = Mat3::from_rows([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);

    #[test]
    fn first_crossing_examples() {
        let hit = first_crossing(&Mat3::IDENTITY, SwitchingManifold::Sphere, Vec3::new(0.5, 0.0, 0.0), 2.0)
            .unwrap()
            .hit
            .unwrap();
        assert!((hit.0 - 2f64.ln()).abs() < 1e-11, "{}", hit.0);
        assert!((hit.1 - Vec3::E1).norm() < 1e-11);

        let hit = first_crossing(&-Mat3::IDENTITY, SwitchingManifold::Sphere, Vec3::new(2.0, 0.0, 0.0), 2.0)
            .unwrap()
            .hit
            .unwrap();
        assert!((hit.0 - 2f64.ln()).abs() < 1e-11);

        let rot = Mat3::cross_matrix(Vec3::new(0.3, -1.0, 0.5));
        let scan = first_crossing(&rot, SwitchingManifold::Sphere, Vec3::new(0.0, 0.5, 0.0), 10.0).unwrap();
        assert!(scan.hit.is_none());
    }

    #[test]
    fn first_crossing_rejects_start_on_manifold() {
        assert!(first_crossing(&Mat3::IDENTITY, SwitchingManifold::Sphere, Vec3::E1, 1.0).is_err());
    }

    #[test]
    fn graze_produces_advisory() {
        // Straight-line motion x(t) = x0 + t v passes just outside the sphere.
        let a = Mat3::from_rows([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let x0 = Vec3::new(-1.0, 0.0, 1.0 + 2e-7);
        let scan = first_crossing(&a, SwitchingManifold::Sphere, x0, 2.0 / (1.0 + 2e-7)).unwrap();
        assert!(scan.hit.is_none());
        assert!(scan
            .advisories
            .iter()
            .any(|a| a.kind == AdvisoryKind::PossibleMissedCrossing));
    }

    #[test]
    fn sliding_closed_circle_on_sphere() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let run = integrate_sliding(&pair, Vec3::E1, 4.0 * PI, 400, &SlidingOptions::default()).unwrap();
        assert_eq!(run.stop, SlidingStop::Completed);
        let last = run.segment.last_point().unwrap();
        assert!((last - Vec3::E1).norm() < 1e-9);
        assert!(run.segment.samples.iter().all(|(_, x)| x[2].abs() < 1e-15));
    }

    #[test]
    fn sliding_on_torus_rotates_about_vertical_axis() {
        let pair = InelasticPair::torus(XZ_SKEW, 2.0);
        let x0 = Vec3::new(2.0, 0.0, 1.0);
        let run = integrate_sliding(&pair, x0, 2.0 * PI, 200, &SlidingOptions::default()).unwrap();
        assert_eq!(run.stop, SlidingStop::Completed);
        assert_eq!(run.crossings.len(), 2);
        assert!(run.crossings.iter().all(|c| c.transversal));
        for (_, x) in &run.segment.samples {
            assert!((x[2] - 1.0).abs() < 1e-12);
            assert!((x[0].hypot(x[1]) - 2.0).abs() < 1e-12);
        }
        assert!((run.segment.last_point().unwrap() - x0).norm() < 1e-9);
    }

    #[test]
    fn sliding_from_equilibrium_is_constant() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let run = integrate_sliding(&pair, Vec3::E3, 1.0, 10, &SlidingOptions::default()).unwrap();
        assert_eq!(run.stop, SlidingStop::Equilibrium);
        assert_eq!(run.segment.samples.len(), 1);
    }

    #[test]
    fn trivial_sliding_is_an_error() {
        let pair = InelasticPair::sphere(-Mat3::IDENTITY, 0.0, 0.0, 0.0);
        let err = integrate_sliding(&pair, Vec3::E1, 1.0, 10, &SlidingOptions::default()).unwrap_err();
        assert_eq!(err, Error::TrivialSliding);
    }

    #[test]
    fn stop_policy_halts_at_first_tangency() {
        let pair = InelasticPair::sphere(Mat3::diag([0.5, -0.5, 0.0]), 1.0, 0.0, 0.0);
        let opts = SlidingOptions {
            policy: TangencyPolicy::Stop,
            ..SlidingOptions::default()
        };
        let run = integrate_sliding(&pair, Vec3::E1, 10.0, 100, &opts).unwrap();
        let SlidingStop::Tangency(c) = &run.stop else {
            panic!("{:?}", run.stop)
        };
        // Orbit is the equator at rate ½; first tangency at angle π/4.
        assert!((c.t - PI / 2.0).abs() < 1e-9, "{}", c.t);
        assert!(c.transversal);
        assert!((run.segment.last_point().unwrap() - c.point).norm() < 1e-12);
    }

    #[test]
    fn simulate_free_then_sliding() {
        let pair = InelasticPair::sphere(-Mat3::IDENTITY, 1.0, 0.0, 0.0);
        let traj = simulate(&pair, Vec3::new(2.0, 0.0, 0.0), 5.0, &SimulateOptions::default()).unwrap();
        let kinds: Vec<_> = traj.segments.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![SegmentKind::FreeAbove, SegmentKind::Sliding]);
        assert_eq!(traj.termination, TerminationReason::TimeLimit);
        let (a, b) = (&traj.segments[0], &traj.segments[1]);
        assert!((a.last_point().unwrap() - b.first_point().unwrap()).norm() < 1e-8);
        assert!((a.t_end - 2f64.ln()).abs() < 1e-10);
        assert!((b.t_end - 5.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_on_manifold_gives_single_sliding_segment() {
        let pair = InelasticPair::sphere(LOWER, 0.2, 0.1, -0.3);
        let traj = simulate(&pair, Vec3::E1, 3.0, &SimulateOptions::default()).unwrap();
        assert_eq!(traj.segments.len(), 1);
        assert_eq!(traj.segments[0].kind, SegmentKind::Sliding);
    }

    #[test]
    fn simulate_on_singular_circle_stops() {
        let pair = InelasticPair::torus(XZ_SKEW, 2.0);
        let traj = simulate(&pair, Vec3::new(3.0, 0.0, 0.0), 5.0, &SimulateOptions::default()).unwrap();
        assert_eq!(traj.termination, TerminationReason::SingularCircle);
        assert_eq!(traj.segments.last().unwrap().kind, SegmentKind::SingularCircleStop);
        assert_eq!(traj.segments.last().unwrap().t_end, 0.0);
    }

    #[test]
    fn simulate_from_equilibrium() {
        let pair = InelasticPair::sphere(LOWER, 0.0, 0.0, 0.0);
        let traj = simulate(&pair, Vec3::E3, 5.0, &SimulateOptions::default()).unwrap();
        assert_eq!(traj.termination, TerminationReason::Equilibrium);
        let n: usize = traj.segments.iter().map(|s| s.samples.len()).sum();
        assert_eq!(n, 1);
    }
}
