//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p filippov-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::grid_oracle::{expected_counts, form_with_inertia, grid_counts, INERTIA_CLASSES};
use common::{random_matrix, random_rotation};
use filippov_core::flow::verify::{verify_theorem_a, verify_theorem_b};
use filippov_core::inelastic::verify_inelastic;
use filippov_core::manifolds::{sample_manifold, sigma};
use filippov_core::sliding::{filippov_field, sliding_rotation, trajectory_tangency_points, xi_polynomial};
use filippov_core::tangency::{
    classify_point, classify_sphere_tangency, lie_derivative, quadratic_form_q, torus_tangency_set,
    RegionLabel, TangencyConfiguration, DEFAULT_TOL,
};
use filippov_core::{Error, InelasticPair, Mat3, SwitchingManifold, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng, m: SwitchingManifold) -> InelasticPair {
    let a = random_matrix(rng, 2.0);
    match m {
        SwitchingManifold::Sphere => InelasticPair::sphere(
            a,
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ),
        SwitchingManifold::Torus => InelasticPair::torus(a, rng.random_range(-2.0..2.0)),
    }
}

const MANIFOLDS: [SwitchingManifold; 2] = [SwitchingManifold::Sphere, SwitchingManifold::Torus];

fn inelastic_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for k in 0..1000u64 {
        for m in MANIFOLDS {
            let pair = random_pair(&mut rng, m);
            worst = worst.max(verify_inelastic(&pair.a, &pair.b, m, 1000, k));
        }
    }
    Outcome::new(worst <= 1e-9, format!("2000 pairs x 1000 points, max |Xs+Ys| = {worst:.3e} (limit 1e-9)"))
}

fn no_sewing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut sewing, mut total) = (0usize, 0usize);
    for k in 0..1000u64 {
        for m in MANIFOLDS {
            let pair = random_pair(&mut rng, m);
            for x in sample_manifold(m, 500, k) {
                total += 1;
                if classify_point(&pair, x, DEFAULT_TOL) == RegionLabel::Sewing {
                    sewing += 1;
                }
            }
        }
    }
    Outcome::new(sewing == 0 && total >= 1_000_000, format!("{sewing} Sewing labels in {total} classifications"))
}

fn mean_field_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut count) = (0.0_f64, 0usize);
    for k in 0..200u64 {
        for m in MANIFOLDS {
            let pair = random_pair(&mut rng, m);
            let mean = (pair.a + pair.b).scale(0.5);
            for x in sample_manifold(m, 100, k) {
                if classify_point(&pair, x, DEFAULT_TOL) != RegionLabel::Sliding {
                    continue;
                }
                let s = filippov_field(&pair, x).expect("sliding points are not tangencies");
                worst = worst.max((s - mean.mul_vec(x)).norm());
                count += 1;
            }
        }
    }
    Outcome::new(worst <= 1e-10, format!("{count} sliding points, max error = {worst:.3e} (limit 1e-10)"))
}

fn theorem_a() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut pairs, mut failures) = (0usize, Vec::new());
    let mut worst = [0.0_f64; 4];
    let names = ["return_distance", "plane_deviation", "pole_norm", "pole_equilibrium"];
    while pairs < 200 {
        let pair = random_pair(&mut rng, SwitchingManifold::Sphere);
        if !sliding_rotation(&pair).is_ok_and(|r| !r.trivial) {
            continue;
        }
        let free = [pair.b[(1, 0)], pair.b[(2, 0)], pair.b[(2, 1)]];
        let rep = verify_theorem_a(&pair.a, free, 20, pairs as u64, 1e-8).expect("harness runs");
        for (w, name) in worst.iter_mut().zip(names) {
            *w = w.max(rep.check(name).expect("check present").worst);
        }
        if !rep.passed() || rep.passed_trials != 20 {
            failures.push(pairs);
        }
        pairs += 1;
    }
    let detail = format!(
        "200 pairs x 20 starts, return {:.2e} (1e-8), plane {:.2e} (1e-9), | |p|-1 | {:.2e}, |Sp| {:.2e} (1e-12), failing pairs {:?}",
        worst[0], worst[1], worst[2], worst[3], failures
    );
    let passed = failures.is_empty() && worst[0] <= 1e-8 && worst[1] <= 1e-9 && worst[2] <= 1e-12 && worst[3] <= 1e-12;
    Outcome::new(passed, detail)
}

fn same_point_sets(a: &[Vec3], b: &[Vec3], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| p.distance(*q) <= tol))
        && b.iter().all(|p| a.iter().any(|q| p.distance(*q) <= tol))
}

fn line_family_vs_angles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut compared, mut skipped, mut mismatches, mut max_count) = (0usize, 0usize, 0usize, 0usize);
    while compared < 500 {
        let pair = random_pair(&mut rng, SwitchingManifold::Sphere);
        let xi = match xi_polynomial(&pair) {
            Ok(xi) => xi,
            Err(Error::ParametrizationDegenerate) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let normal = sliding_rotation(&pair).unwrap().normal.unwrap();
        let direct = trajectory_tangency_points(&pair, normal.any_orthogonal()).unwrap();
        max_count = max_count.max(xi.intersections.len()).max(direct.len());
        if !same_point_sets(&xi.intersections, &direct, 1e-8) {
            mismatches += 1;
        }
        compared += 1;
    }
    Outcome::new(
        mismatches == 0 && max_count <= 4,
        format!("500 pairs ({skipped} degenerate skipped), {mismatches} set mismatches at 1e-8, max count {max_count}"),
    )
}

fn classification_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    for pattern in INERTIA_CLASSES {
        let mut misses = 0;
        for _ in 0..50 {
            let rot = random_rotation(&mut rng);
            let q = form_with_inertia(pattern, || rng.random::<f64>(), rot);
            let class = classify_sphere_tangency(&q, DEFAULT_TOL).expect("nonzero form");
            let inertia = (class.inertia.positive, class.inertia.negative, class.inertia.zero);
            if inertia != pattern || grid_counts(&q) != expected_counts(class.configuration) {
                misses += 1;
            }
        }
        if misses > 0 {
            bad.push((pattern, misses));
        }
    }
    Outcome::new(bad.is_empty(), format!("9 inertia classes x 50 forms, mismatches {bad:?}"))
}

fn random_skew_torus(rng: &mut ChaCha8Rng) -> (Mat3, f64) {
    loop {
        let (a21, a31, a32) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let b21: f64 = rng.random_range(-2.0..2.0);
        if f64::hypot(a31, a32) < 0.05 || (a21 + b21).abs() < 0.1 {
            continue;
        }
        let a = Mat3::from_rows([[0.0, -a21, -a31], [a21, 0.0, -a32], [a31, a32, 0.0]]);
        return (a, b21);
    }
}

/// Points of the four expected tangency circles, built from the torus
/// parametrization rather than from the library's circle objects.
fn expected_circle_points(a: &Mat3) -> Vec<Vec3> {
    let n = Vec3::new(a[(2, 0)], a[(2, 1)], 0.0).normalized().unwrap();
    let d = Vec3::E3.cross(n);
    let mut pts = Vec::new();
    for k in 0..64 {
        let t = TAU * k as f64 / 64.0;
        let (s, c) = t.sin_cos();
        pts.push(Vec3::new(c, s, 0.0));
        pts.push(Vec3::new(3.0 * c, 3.0 * s, 0.0));
        for sign in [1.0, -1.0] {
            pts.push(d.scale(sign * (2.0 + c)) + Vec3::E3.scale(s));
        }
    }
    pts
}

fn theorem_b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = SwitchingManifold::Torus;
    let mut failures = Vec::new();
    let (mut residual, mut period_err) = (0.0_f64, 0.0_f64);
    let mut min_speed = f64::INFINITY;
    for k in 0..200 {
        let (a, b21) = random_skew_torus(&mut rng);
        let set = torus_tangency_set(&a, DEFAULT_TOL).expect("skew torus field");
        for p in expected_circle_points(&a) {
            let on_set = set.circles.iter().map(|c| c.distance_to(p)).fold(f64::INFINITY, f64::min);
            residual = residual
                .max(sigma(m, p).abs())
                .max(lie_derivative(&a, m, p, 1).unwrap().abs())
                .max(on_set);
        }
        let rep = verify_theorem_b(&a, b21, 20, k, 1e-8).expect("harness runs");
        let expected_period = TAU / (0.5 * (a[(1, 0)] + b21)).abs();
        period_err = period_err.max((rep.period.unwrap() - expected_period).abs() / expected_period);
        min_speed = min_speed.min(rep.check("plane_crossing_speed").unwrap().worst);
        if !rep.passed() || rep.passed_trials != 20 {
            failures.push(k);
        }
    }
    let passed = failures.is_empty() && residual <= 1e-9 && period_err <= 1e-12;
    Outcome::new(
        passed,
        format!(
            "200 skew fields x 20 starts, circle residual {residual:.2e} (1e-9), relative period error {period_err:.2e}, min crossing speed {min_speed:.3} x rate, failing {failures:?}"
        ),
    )
}

fn negative_definite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut not_empty, mut not_sliding) = (0usize, 0usize);
    for k in 0..50u64 {
        let l = random_matrix(&mut rng, 1.0);
        let sym = l.mul_mat(&l.transpose()) + Mat3::IDENTITY.scale(0.1);
        let w = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let a = Mat3::cross_matrix(w) - sym;
        let class = classify_sphere_tangency(&quadratic_form_q(&a), DEFAULT_TOL).expect("definite form");
        if class.configuration != TangencyConfiguration::Empty {
            not_empty += 1;
        }
        let pair = InelasticPair::sphere(a, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        not_sliding += sample_manifold(SwitchingManifold::Sphere, 10_000, k)
            .into_iter()
            .filter(|x| classify_point(&pair, *x, DEFAULT_TOL) != RegionLabel::Sliding)
            .count();
    }
    Outcome::new(
        not_empty == 0 && not_sliding == 0,
        format!("50 fields x 10^4 points, {not_empty} non-empty sets, {not_sliding} non-Sliding labels"),
    )
}

fn run_cli(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_filippov")).args(args).output().expect("binary runs");
    (out.status.code(), out.stdout)
}

fn determinism() -> Outcome {
    let specs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    let spec = |name: &str| specs.join(name).to_string_lossy().into_owned();
    let dir = std::env::temp_dir().join(format!("filippov-acceptance-{}", std::process::id()));
    let figure = |k: usize| -> PathBuf { dir.join(format!("fig{k}")) };
    let (lower, circles, torus) = (spec("sphere_lower.json"), spec("sphere_crossing_circles.json"), spec("torus_xz.json"));
    let commands: Vec<Vec<String>> = vec![
        vec!["build".into(), "--spec".into(), circles.clone(), "--seed".into(), "3".into()],
        vec!["classify".into(), "--spec".into(), circles.clone()],
        vec!["classify".into(), "--spec".into(), torus.clone()],
        vec!["verify".into(), "--spec".into(), lower.clone(), "--trials".into(), "50".into(), "--seed".into(), "11".into()],
        vec!["verify".into(), "--spec".into(), torus.clone(), "--trials".into(), "50".into(), "--seed".into(), "11".into()],
        vec!["simulate".into(), "--spec".into(), lower, "--x0".into(), "2,0,0".into(), "--tmax".into(), "8".into(), "--seed".into(), "5".into()],
    ];
    let mut differing = Vec::new();
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let first = run_cli(&args);
        let second = run_cli(&args);
        if first.0 != Some(0) || first != second {
            differing.push(cmd[0].clone());
        }
    }
    let mut figures = Vec::new();
    for k in 0..2 {
        let out = figure(k).to_string_lossy().into_owned();
        if run_cli(&["emit-figure", "--spec", &circles, "--out", &out, "--seed", "2"]).0 != Some(0) {
            differing.push("emit-figure exit".into());
        }
        let read = |f: &str| std::fs::read(figure(k).join(f)).unwrap_or_default();
        figures.push((read("curves.json"), read("mesh.json"), read("trajectories.csv")));
    }
    if figures[0] != figures[1] || figures[0].0.is_empty() {
        differing.push("emit-figure".into());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Outcome::new(
        differing.is_empty(),
        format!("{} invocations run twice, differing outputs {differing:?}", commands.len() + 1),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("inelastic construction", inelastic_construction),
        ("no sewing", no_sewing),
        ("mean-field identity", mean_field_identity),
        ("sphere closure harness", theorem_a),
        ("line family vs angle parametrization", line_family_vs_angles),
        ("sphere classification vs grid", classification_grid),
        ("torus closure harness", theorem_b),
        ("negative-definite field", negative_definite),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {} [{:.1}s]", outcome.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!outcome.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
