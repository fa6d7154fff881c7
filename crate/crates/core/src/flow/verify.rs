//! Randomized verification of the two closure theorems.
//!
//! Each harness draws its trial starts sequentially from a seeded
//! generator, evaluates trials in parallel, and reduces results in trial
//! order, so a report depends only on its inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::inelastic::{FreeParams, InelasticPair};
use crate::manifolds::SwitchingManifold;
use crate::sliding::{sliding_rotation, SlidingRotation};
use crate::tangency::{quadratic_form_q, quartic_violations, torus_tangency_set, LieTower, DEFAULT_TOL};

use super::{
    closure_report, integrate_sliding, simulate, SimulateOptions, SlidingOptions, SlidingStop, TangencyPolicy,
    TerminationReason,
};

pub const PLANE_TOL: f64 = 1e-9;
pub const CONSERVATION_TOL: f64 = 1e-9;
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
pub const CIRCLE_RESIDUAL_TOL: f64 = 1e-9;
/// Geodesic radius around equilibria, singular circles and tangency
/// curves from which trial starts are excluded.
pub const EXCLUSION_RADIUS: f64 = 1e-3;
/// Lower bound on the plane-crossing speed relative to the angular rate.
pub const MIN_CROSSING_SPEED: f64 = 0.5;
const SAMPLES_PER_TRIAL: usize = 256;
const CIRCLE_SAMPLES: usize = 256;
const SINGULAR_STARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub worst: f64,
    pub limit: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: &str, worst: f64, limit: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            worst,
            limit,
            comparison: Comparison::AtMost,
            passed: worst <= limit,
        }
    }

    fn at_least(name: &str, worst: f64, limit: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            worst,
            limit,
            comparison: Comparison::AtLeast,
            passed: worst >= limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub manifold: SwitchingManifold,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// The sliding field vanishes; nothing beyond skewness is checked.
    pub trivial: bool,
    pub rotation_axis: Vec3,
    pub period: Option<f64>,
    pub passed_trials: usize,
    pub failed_trials: Vec<usize>,
    pub checks: Vec<CheckResult>,
    /// Tangency contacts met by trial orbits that the trajectory rules would
    /// not continue across.
    pub blocked_contacts: usize,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.failed_trials.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnessInput {
    pub a: Mat3,
    pub free: FreeParams,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

/// A randomized theorem check, selectable by id.
pub trait TheoremHarness: Send + Sync {
    fn id(&self) -> &'static str;
    fn manifold(&self) -> SwitchingManifold;
    fn run(&self, input: &HarnessInput) -> Result<TheoremReport>;
}

struct SphereClosure;
struct TorusClosure;

impl TheoremHarness for SphereClosure {
    fn id(&self) -> &'static str {
        "A"
    }

    fn manifold(&self) -> SwitchingManifold {
        SwitchingManifold::Sphere
    }

    fn run(&self, input: &HarnessInput) -> Result<TheoremReport> {
        match input.free {
            FreeParams::Sphere { b21, b31, b32 } => {
                verify_theorem_a(&input.a, [b21, b31, b32], input.trials, input.seed, input.tol)
            }
            FreeParams::Torus { .. } => Err(Error::WrongManifold {
                expected: SwitchingManifold::Sphere,
                got: SwitchingManifold::Torus,
            }),
        }
    }
}

impl TheoremHarness for TorusClosure {
    fn id(&self) -> &'static str {
        "B"
    }

    fn manifold(&self) -> SwitchingManifold {
        SwitchingManifold::Torus
    }

    fn run(&self, input: &HarnessInput) -> Result<TheoremReport> {
        match input.free {
            FreeParams::Torus { b21 } => verify_theorem_b(&input.a, b21, input.trials, input.seed, input.tol),
            FreeParams::Sphere { .. } => Err(Error::WrongManifold {
                expected: SwitchingManifold::Torus,
                got: SwitchingManifold::Sphere,
            }),
        }
    }
}

static SPHERE_CLOSURE: SphereClosure = SphereClosure;
static TORUS_CLOSURE: TorusClosure = TorusClosure;
static HARNESSES: [&dyn TheoremHarness; 2] = [&SPHERE_CLOSURE, &TORUS_CLOSURE];

pub fn harnesses() -> &'static [&'static dyn TheoremHarness] {
    &HARNESSES
}

pub fn harness(id: &str) -> Result<&'static dyn TheoremHarness> {
    HARNESSES
        .iter()
        .copied()
        .find(|h| h.id().eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem {id:?}")))
}

fn base_report(theorem: &str, rot: &SlidingRotation, trials: usize, seed: u64, tol: f64) -> TheoremReport {
    TheoremReport {
        theorem: theorem.to_string(),
        manifold: rot.manifold,
        trials,
        seed,
        tol,
        trivial: rot.trivial,
        rotation_axis: rot.axis,
        period: rot.period(),
        passed_trials: 0,
        failed_trials: Vec::new(),
        checks: Vec::new(),
        blocked_contacts: 0,
    }
}

fn skew_check(rot: &SlidingRotation, scale: f64) -> CheckResult {
    let g = rot.generator;
    let defect = (g + g.transpose()).max_abs();
    CheckResult::at_most("generator_skew", defect, 1e-12 * scale)
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

struct SphereTrial {
    ok: bool,
    return_distance: f64,
    plane_deviation: f64,
    norm_drift: f64,
    blocked: usize,
}

/// Sliding orbits of a sphere pair are closed planar circles around the
/// axis through the two equilibria.
pub fn verify_theorem_a(a: &Mat3, b_free: [f64; 3], trials: usize, seed: u64, tol: f64) -> Result<TheoremReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let q = quadratic_form_q(a);
    if q.inertia(DEFAULT_TOL).rank() == 0 {
        return Err(Error::ZeroForm);
    }
    let pair = InelasticPair::sphere(*a, b_free[0], b_free[1], b_free[2]);
    let rot = sliding_rotation(&pair)?;
    let mut report = base_report("A", &rot, trials, seed, tol);
    report.checks.push(skew_check(&rot, pair.scale()));
    let Some((p_plus, p_minus)) = rot.poles() else {
        return Ok(report);
    };
    let normal = rot.normal.expect("nontrivial rotation has a normal");
    let s = rot.generator;
    report.checks.push(CheckResult::at_most(
        "pole_norm",
        max_of([p_plus, p_minus].iter().map(|p| (p.norm() - 1.0).abs())),
        EQUILIBRIUM_TOL,
    ));
    report.checks.push(CheckResult::at_most(
        "pole_equilibrium",
        max_of([p_plus, p_minus].iter().map(|p| s.mul_vec(*p).norm())),
        EQUILIBRIUM_TOL,
    ));
    report.checks.push(CheckResult::at_most(
        "normal_along_pole_axis",
        (p_plus - p_minus).scale(0.5).cross(normal).norm(),
        EQUILIBRIUM_TOL,
    ));

    let far_from_tangency = |x: Vec3| {
        let f = q.eval(x);
        let g = q.apply(x).scale(2.0);
        let tangential = g - x.scale(g.dot(x));
        f.abs() > EXCLUSION_RADIUS * tangential.norm()
    };
    let cos_exclusion = EXCLUSION_RADIUS.cos();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = draw_starts(&mut rng, trials, SwitchingManifold::Sphere, |x| {
        x.dot(normal).abs() < cos_exclusion && far_from_tangency(x)
    });

    let period = rot.period().expect("nontrivial");
    let opts = SlidingOptions {
        tol: DEFAULT_TOL,
        policy: TangencyPolicy::Record,
    };
    let outcomes: Vec<Result<SphereTrial>> = starts
        .par_iter()
        .map(|&x0| {
            let run = integrate_sliding(&pair, x0, period, SAMPLES_PER_TRIAL, &opts)?;
            let rep = closure_report(&run.segment, &rot, tol)?;
            let norm_drift = max_of(run.segment.samples.iter().map(|(_, x)| (x.norm() - 1.0).abs()));
            let blocked = run.crossings.iter().filter(|c| !c.transversal).count();
            Ok(SphereTrial {
                ok: rep.closed
                    && run.stop == SlidingStop::Completed
                    && rep.max_plane_deviation <= PLANE_TOL
                    && norm_drift <= CONSERVATION_TOL,
                return_distance: rep.return_distance,
                plane_deviation: rep.max_plane_deviation,
                norm_drift,
                blocked,
            })
        })
        .collect();

    let mut worst = [0.0_f64; 3];
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let t = outcome?;
        worst[0] = worst[0].max(t.return_distance);
        worst[1] = worst[1].max(t.plane_deviation);
        worst[2] = worst[2].max(t.norm_drift);
        report.blocked_contacts += t.blocked;
        if t.ok {
            report.passed_trials += 1;
        } else {
            report.failed_trials.push(i);
        }
    }
    report.checks.push(CheckResult::at_most("return_distance", worst[0], tol));
    report.checks.push(CheckResult::at_most("plane_deviation", worst[1], PLANE_TOL));
    report.checks.push(CheckResult::at_most("norm_drift", worst[2], CONSERVATION_TOL));
    Ok(report)
}

fn draw_starts(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: SwitchingManifold,
    accept: impl Fn(Vec3) -> bool,
) -> Vec<Vec3> {
    let surface = m.surface();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = surface.sample_point(rng);
        if accept(x) {
            out.push(x);
        }
    }
    out
}

struct TorusTrial {
    ok: bool,
    return_distance: f64,
    plane_deviation: f64,
    height_drift: f64,
    radius_drift: f64,
    crossing_count_defect: usize,
    min_crossing_speed: f64,
    crossing_residual: f64,
    blocked: usize,
}

/// Under the quadratic hypothesis, torus sliding orbits are horizontal
/// circles crossing the plane of the minor tangency circles twice, and the
/// two equatorial tangency circles trap trajectories.
pub fn verify_theorem_b(a: &Mat3, b21: f64, trials: usize, seed: u64, tol: f64) -> Result<TheoremReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let violations = quartic_violations(a, DEFAULT_TOL);
    if !violations.is_empty() {
        return Err(Error::HypothesisViolation(violations));
    }
    let set = torus_tangency_set(a, DEFAULT_TOL)?;
    let pair = InelasticPair::torus(*a, b21);
    let rot = sliding_rotation(&pair)?;
    let mut report = base_report("B", &rot, trials, seed, tol);
    report.checks.push(skew_check(&rot, pair.scale()));

    let m = SwitchingManifold::Torus;
    let surface = m.surface();
    let tower = LieTower::new(a, m);
    let circle_points: Vec<Vec3> = set.circles.iter().flat_map(|c| c.sample(CIRCLE_SAMPLES)).collect();
    report.checks.push(CheckResult::at_most(
        "circle_sigma_residual",
        max_of(circle_points.iter().map(|x| surface.sigma(*x).abs())),
        CIRCLE_RESIDUAL_TOL,
    ));
    report.checks.push(CheckResult::at_most(
        "circle_tangency_residual",
        max_of(circle_points.iter().map(|x| tower.eval(1, *x).abs())),
        CIRCLE_RESIDUAL_TOL,
    ));
    if rot.trivial {
        return Ok(report);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let singular = set.singular_circles();
    let starts = draw_starts(&mut rng, trials, m, |x| {
        singular.iter().all(|c| c.distance_to(x) >= EXCLUSION_RADIUS)
    });
    let circle_starts: Vec<Vec3> = singular
        .iter()
        .flat_map(|c| {
            (0..SINGULAR_STARTS)
                .map(|_| c.point_at(rng.random_range(0.0..std::f64::consts::TAU)))
                .collect::<Vec<_>>()
        })
        .collect();

    let period = rot.period().expect("nontrivial");
    let n = set.plane_normal;
    let opts = SlidingOptions::default();
    let outcomes: Vec<Result<TorusTrial>> = starts
        .par_iter()
        .map(|&x0| {
            let run = integrate_sliding(&pair, x0, period, SAMPLES_PER_TRIAL, &opts)?;
            let rep = closure_report(&run.segment, &rot, tol)?;
            let r0 = x0[0] * x0[0] + x0[1] * x0[1];
            let samples = &run.segment.samples;
            let height_drift = max_of(samples.iter().map(|(_, x)| (x[2] - x0[2]).abs()));
            let radius_drift = max_of(samples.iter().map(|(_, x)| (x[0] * x[0] + x[1] * x[1] - r0).abs()));
            let min_crossing_speed = run
                .crossings
                .iter()
                .map(|c| rot.velocity(c.point).dot(n).abs() / rot.rate)
                .fold(f64::INFINITY, f64::min);
            let crossing_residual = max_of(run.crossings.iter().map(|c| c.point.dot(n).abs()));
            let crossing_count_defect = run.crossings.len().abs_diff(2);
            let blocked = run.crossings.iter().filter(|c| !c.transversal).count()
                + usize::from(matches!(run.stop, SlidingStop::Tangency(_)));
            Ok(TorusTrial {
                ok: rep.closed
                    && run.stop == SlidingStop::Completed
                    && rep.max_plane_deviation <= PLANE_TOL
                    && height_drift <= CONSERVATION_TOL
                    && radius_drift <= CONSERVATION_TOL
                    && crossing_count_defect == 0
                    && min_crossing_speed >= MIN_CROSSING_SPEED,
                return_distance: rep.return_distance,
                plane_deviation: rep.max_plane_deviation,
                height_drift,
                radius_drift,
                crossing_count_defect,
                min_crossing_speed,
                crossing_residual,
                blocked,
            })
        })
        .collect();

    let mut worst = [0.0_f64; 6];
    let mut min_speed = f64::INFINITY;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let t = outcome?;
        for (w, v) in worst.iter_mut().zip([
            t.return_distance,
            t.plane_deviation,
            t.height_drift,
            t.radius_drift,
            t.crossing_count_defect as f64,
            t.crossing_residual,
        ]) {
            *w = w.max(v);
        }
        min_speed = min_speed.min(t.min_crossing_speed);
        report.blocked_contacts += t.blocked;
        if t.ok {
            report.passed_trials += 1;
        } else {
            report.failed_trials.push(i);
        }
    }

    let sim_opts = SimulateOptions::default();
    let mut escaped = 0usize;
    for x in circle_starts {
        let traj = simulate(&pair, x, period, &sim_opts)?;
        if traj.termination != TerminationReason::SingularCircle {
            escaped += 1;
        }
    }

    report.checks.push(CheckResult::at_most("return_distance", worst[0], tol));
    report.checks.push(CheckResult::at_most("plane_deviation", worst[1], PLANE_TOL));
    report.checks.push(CheckResult::at_most("height_drift", worst[2], CONSERVATION_TOL));
    report.checks.push(CheckResult::at_most("radius_drift", worst[3], CONSERVATION_TOL));
    report.checks.push(CheckResult::at_most("plane_crossing_count_defect", worst[4], 0.0));
    report.checks.push(CheckResult::at_most("plane_crossing_residual", worst[5], CIRCLE_RESIDUAL_TOL));
    report.checks.push(CheckResult::at_least("plane_crossing_speed", min_speed, MIN_CROSSING_SPEED));
    report.checks.push(CheckResult::at_most("singular_circle_escapes", escaped as f64, 0.0));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOWER: Mat3 = Mat3::from_rows([[-1.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
    const XZ_SKEW: Mat3 = Mat3::from_rows([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);

    #[test]
    fn theorem_a_documented_case() {
        let rep = verify_theorem_a(&LOWER, [0.0; 3], 100, 7, 1e-8).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert_eq!(rep.passed_trials, 100);
        assert!(rep.check("return_distance").unwrap().worst <= 1e-8);
    }

    #[test]
    fn theorem_a_needs_a_sliding_region() {
        let skew = Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(verify_theorem_a(&skew, [0.0; 3], 5, 1, 1e-8).unwrap_err(), Error::ZeroForm);
    }

    #[test]
    fn theorem_a_trivial_case() {
        let rep = verify_theorem_a(&-Mat3::IDENTITY, [0.0; 3], 10, 1, 1e-8).unwrap();
        assert!(rep.trivial);
        assert_eq!(rep.period, None);
        assert_eq!(rep.passed_trials, 0);
    }

    #[test]
    fn theorem_b_documented_case() {
        let rep = verify_theorem_b(&XZ_SKEW, 2.0, 100, 7, 1e-8).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!((rep.period.unwrap() - std::f64::consts::TAU).abs() < 1e-12);
        assert!(rep.check("height_drift").unwrap().worst <= 1e-9);
    }

    #[test]
    fn theorem_b_trivial_and_hypothesis_errors() {
        let rep = verify_theorem_b(&XZ_SKEW, 0.0, 5, 1, 1e-8).unwrap();
        assert!(rep.trivial);
        let err = verify_theorem_b(&Mat3::IDENTITY, 0.0, 5, 1, 1e-8).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolation(_)));
    }

    #[test]
    fn reports_are_reproducible() {
        let a = verify_theorem_a(&LOWER, [0.3, -0.2, 0.5], 20, 11, 1e-8).unwrap();
        let b = verify_theorem_a(&LOWER, [0.3, -0.2, 0.5], 20, 11, 1e-8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn registry_dispatch() {
        assert_eq!(harness("a").unwrap().manifold(), SwitchingManifold::Sphere);
        assert_eq!(harness("B").unwrap().id(), "B");
        assert!(harness("C").is_err());
        let input = HarnessInput {
            a: XZ_SKEW,
            free: FreeParams::Torus { b21: 2.0 },
            trials: 5,
            seed: 3,
            tol: 1e-8,
        };
        assert!(harness("A").unwrap().run(&input).is_err());
        assert!(harness("B").unwrap().run(&input).unwrap().passed());
    }
}
