use std::f64::consts::{PI, TAU};
use std::path::Path;

use filippov_core::flow::{
    closure_report, harness, simulate, HarnessInput, PiecewiseTrajectory, SegmentKind, SimulateOptions,
};
use filippov_core::inelastic::verify_inelastic;
use filippov_core::manifolds::{torus_point, CircleCurve};
use filippov_core::sliding::sliding_rotation;
use filippov_core::tangency::{
    classify_point, classify_sphere_tangency, monomial_name, quadratic_form_q, quartic_violations, torus_q2_q4,
    torus_tangency_set, SampledLoop, TangencyClassification, TorusTangencySet, Q2_MONOMIALS, Q4_MONOMIALS,
};
use filippov_core::{Error, InelasticPair, SwitchingManifold, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::Command;
use crate::format::{to_json, trajectory_header, write_trajectory_rows};
use crate::spec::SystemSpec;
use crate::{CliError, Outcome};

pub const BUILD_SAMPLES: usize = 1000;
pub const BUILD_RESIDUAL_TOL: f64 = 1e-9;
const REGION_ROWS: usize = 9;
const REGION_COLS: usize = 18;
const MESH_ROWS: usize = 24;
const MESH_COLS: usize = 48;
const FIGURE_TRAJECTORIES: usize = 6;
const FIGURE_TIME_TRIVIAL: f64 = 1.0;

pub fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Build { spec, seed } => build(&SystemSpec::load(&spec.spec)?, *seed),
        Command::Classify { spec, out, tol } => {
            let text = classify(&SystemSpec::load(&spec.spec)?, *tol)?;
            if let Some(path) = out {
                write_file(path, &text)?;
            }
            Ok(Outcome {
                stdout: text,
                ..Outcome::default()
            })
        }
        Command::Simulate {
            spec,
            x0,
            tmax,
            out,
            tol,
            seed,
            strict,
        } => simulate_cmd(&SystemSpec::load(&spec.spec)?, *x0, *tmax, out.as_deref(), *tol, *seed, *strict),
        Command::Verify {
            spec,
            theorem,
            trials,
            seed,
            tol,
            out,
        } => verify(&SystemSpec::load(&spec.spec)?, theorem.as_deref(), *trials, *seed, *tol, out.as_deref()),
        Command::EmitFigure {
            spec,
            figure,
            out,
            seed,
            tol,
        } => emit_figure(&SystemSpec::load(&spec.spec)?, *figure, out, *seed, *tol),
    }
}

/// Turns core failures into the CLI's error classes.
fn lift(err: Error) -> CliError {
    match err {
        Error::ZeroForm => CliError::Degenerate {
            reason: "zero_form",
            message: err.to_string(),
            terms: Vec::new(),
        },
        Error::DegenerateTorus => CliError::Degenerate {
            reason: "degenerate_torus",
            message: err.to_string(),
            terms: Vec::new(),
        },
        Error::HypothesisViolation(ref terms) => CliError::Degenerate {
            reason: "hypothesis_violation",
            message: err.to_string(),
            terms: terms.clone(),
        },
        Error::WrongManifold { .. } | Error::InvalidArgument(_) => CliError::Usage(err.to_string()),
        other => CliError::Core(other),
    }
}

pub fn error_json(err: &CliError) -> String {
    let reason = match err {
        CliError::Parse(_) => "parse",
        CliError::Io(_) => "io",
        CliError::Usage(_) => "usage",
        CliError::Pattern(_) => "pattern",
        CliError::Degenerate { reason, .. } => reason,
        CliError::Core(_) => "numerical",
    };
    let mut body = json!({ "reason": reason, "message": err.to_string() });
    match err {
        CliError::Pattern(entries) => {
            body["entries"] = entries
                .iter()
                .map(|(row, col, got, expected)| json!({"row": row, "col": col, "got": got, "expected": expected}))
                .collect();
        }
        CliError::Degenerate { terms, .. } if !terms.is_empty() => {
            body["terms"] = terms_object(terms.iter().cloned());
        }
        _ => {}
    }
    to_json(&json!({ "error": body }))
}

fn terms_object(terms: impl Iterator<Item = (String, f64)>) -> Value {
    Value::Object(terms.map(|(k, v)| (k, json!(v))).collect::<Map<_, _>>())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn build(spec: &SystemSpec, seed: u64) -> Result<Outcome, CliError> {
    let pair = spec.pair()?;
    let b = spec.explicit_b().unwrap_or(pair.b);
    let residual = verify_inelastic(&pair.a, &b, pair.manifold, BUILD_SAMPLES, seed);
    let ok = residual <= BUILD_RESIDUAL_TOL;
    let report = json!({
        "schema": "filippov-build/v1",
        "manifold": pair.manifold,
        "A": pair.a,
        "B": b,
        "free": pair.free,
        "residual": residual,
        "samples": BUILD_SAMPLES,
        "seed": seed,
        "ok": ok,
    });
    Ok(Outcome {
        stdout: to_json(&report),
        stderr: String::new(),
        code: if ok { 0 } else { 1 },
    })
}

#[derive(Serialize)]
struct RegionSample {
    point: Vec3,
    label: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    torus_region: Option<String>,
}

fn region_grid(pair: &InelasticPair, tol: f64, set: Option<&TorusTangencySet>) -> Value {
    let mut samples = Vec::new();
    for r in 0..REGION_ROWS {
        for c in 0..REGION_COLS {
            let (s, t) = ((r as f64 + 0.5) / REGION_ROWS as f64, (c as f64 + 0.5) / REGION_COLS as f64);
            let x = match pair.manifold {
                SwitchingManifold::Sphere => {
                    let (theta, phi) = (PI * s, TAU * t);
                    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
                }
                SwitchingManifold::Torus => torus_point(TAU * t, TAU * s),
            };
            samples.push(RegionSample {
                point: x,
                label: classify_point(pair, x, tol).name(),
                torus_region: set.and_then(|s| s.region_of(x)).map(|r| format!("{r:?}")),
            });
        }
    }
    let mut counts: Map<String, Value> = Map::new();
    for s in &samples {
        let n = counts.get(s.label).and_then(Value::as_u64).unwrap_or(0);
        counts.insert(s.label.to_string(), json!(n + 1));
    }
    json!({ "rows": REGION_ROWS, "cols": REGION_COLS, "counts": counts, "samples": samples })
}

fn sphere_classification(pair: &InelasticPair, tol: f64) -> Result<TangencyClassification, CliError> {
    classify_sphere_tangency(&quadratic_form_q(&pair.a), tol).map_err(lift)
}

fn classify(spec: &SystemSpec, tol: f64) -> Result<String, CliError> {
    let pair = spec.pair()?;
    let report = match pair.manifold {
        SwitchingManifold::Sphere => {
            let class = sphere_classification(&pair, tol)?;
            json!({
                "schema": "filippov-classify/v1",
                "manifold": pair.manifold,
                "configuration": class.configuration,
                "inertia": class.inertia,
                "circles": class.circles,
                "loops": class.loops,
                "points": class.points,
                "regions": region_grid(&pair, tol, None),
            })
        }
        SwitchingManifold::Torus => {
            let quartic = torus_q2_q4(&pair.a);
            let q2 = terms_object(Q2_MONOMIALS.iter().zip(quartic.q2).map(|(e, v)| (monomial_name(*e), v)));
            let q4 = terms_object(Q4_MONOMIALS.iter().zip(quartic.q4).map(|(e, v)| (monomial_name(*e), v)));
            let violations = quartic_violations(&pair.a, tol);
            let set = if violations.is_empty() {
                Some(torus_tangency_set(&pair.a, tol).map_err(lift)?)
            } else {
                None
            };
            json!({
                "schema": "filippov-classify/v1",
                "manifold": pair.manifold,
                "configuration": set.as_ref().map(|_| "FourCircles"),
                "quadratic_hypothesis": set.is_some(),
                "q2": q2,
                "q4": q4,
                "violations": terms_object(violations.into_iter()),
                "tangency_set": set,
                "regions": region_grid(&pair, tol, set.as_ref()),
            })
        }
    };
    Ok(to_json(&report))
}

fn segment_summary(traj: &PiecewiseTrajectory) -> Vec<Value> {
    traj.segments
        .iter()
        .map(|s| json!({"kind": s.kind.name(), "t_start": s.t_start, "t_end": s.t_end, "samples": s.samples.len()}))
        .collect()
}

fn simulate_cmd(
    spec: &SystemSpec,
    x0: Vec3,
    tmax: f64,
    out: Option<&Path>,
    tol: f64,
    seed: u64,
    strict: bool,
) -> Result<Outcome, CliError> {
    if !(tmax > 0.0 && tmax.is_finite()) {
        return Err(CliError::Usage(format!("--tmax must be positive, got {tmax}")));
    }
    let pair = spec.pair()?;
    let traj = simulate(&pair, x0, tmax, &SimulateOptions::default()).map_err(lift)?;
    let mut csv = trajectory_header(&spec.digest(), seed);
    write_trajectory_rows(&mut csv, &traj, 0);

    let rotation = sliding_rotation(&pair).map_err(lift)?;
    let closure = match traj.segments.iter().rev().find(|s| s.kind == SegmentKind::Sliding) {
        Some(seg) if !rotation.trivial => Some(closure_report(seg, &rotation, tol).map_err(lift)?),
        _ => None,
    };
    let summary = to_json(&json!({
        "schema": "filippov-simulate/v1",
        "spec": spec.digest(),
        "x0": x0,
        "tmax": tmax,
        "termination": traj.termination.name(),
        "segments": segment_summary(&traj),
        "events": traj.events,
        "advisories": traj.advisories,
        "closure": closure,
    }));
    let code = if strict && !traj.advisories.is_empty() { 4 } else { 0 };
    Ok(match out {
        Some(path) => {
            write_file(path, &csv)?;
            Outcome {
                stdout: summary,
                stderr: String::new(),
                code,
            }
        }
        None => Outcome {
            stdout: csv,
            stderr: summary,
            code,
        },
    })
}

fn default_theorem(m: SwitchingManifold) -> &'static str {
    match m {
        SwitchingManifold::Sphere => "A",
        SwitchingManifold::Torus => "B",
    }
}

fn verify(
    spec: &SystemSpec,
    theorem: Option<&str>,
    trials: usize,
    seed: u64,
    tol: f64,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let pair = spec.pair()?;
    let id = theorem.unwrap_or(default_theorem(pair.manifold));
    let h = harness(id).map_err(lift)?;
    if h.manifold() != pair.manifold {
        return Err(CliError::Usage(format!(
            "theorem {} concerns the {}, spec is on the {}",
            h.id(),
            h.manifold(),
            pair.manifold
        )));
    }
    let input = HarnessInput {
        a: pair.a,
        free: pair.free,
        trials,
        seed,
        tol,
    };
    let report = h.run(&input).map_err(lift)?;
    let text = to_json(&report);
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    let note = if report.trivial {
        format!("theorem {}: trivial sliding field, no orbits to close\n", report.theorem)
    } else {
        let failing: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        format!(
            "theorem {}: {}/{} trials passed{}\n",
            report.theorem,
            report.passed_trials,
            report.trials,
            if failing.is_empty() {
                String::new()
            } else {
                format!(", failing checks: {}", failing.join(", "))
            }
        )
    };
    Ok(Outcome {
        stdout: text,
        stderr: note,
        code: if report.passed() { 0 } else { 1 },
    })
}

#[derive(Serialize)]
struct CurveFile<'a> {
    schema: &'static str,
    manifold: SwitchingManifold,
    configuration: Option<String>,
    curves: &'a [CircleCurve],
    loops: &'a [SampledLoop],
    points: &'a [Vec3],
}

fn mesh(m: SwitchingManifold) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity((MESH_ROWS + 1) * MESH_COLS);
    for r in 0..=MESH_ROWS {
        for c in 0..MESH_COLS {
            let (s, t) = (r as f64 / MESH_ROWS as f64, c as f64 / MESH_COLS as f64);
            pts.push(match m {
                SwitchingManifold::Sphere => {
                    let (theta, phi) = (PI * s, TAU * t);
                    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
                }
                SwitchingManifold::Torus => torus_point(TAU * t, TAU * s),
            });
        }
    }
    pts
}

fn emit_figure(spec: &SystemSpec, figure: Option<u8>, out: &Path, seed: u64, tol: f64) -> Result<Outcome, CliError> {
    let pair = spec.pair()?;
    let expected = match pair.manifold {
        SwitchingManifold::Sphere => 1,
        SwitchingManifold::Torus => 2,
    };
    let figure = figure.unwrap_or(expected);
    if figure != expected {
        return Err(CliError::Usage(format!("figure {figure} needs a {} spec", if figure == 1 { "sphere" } else { "torus" })));
    }
    let (configuration, curves, loops, points, singular) = match pair.manifold {
        SwitchingManifold::Sphere => {
            let c = sphere_classification(&pair, tol)?;
            (format!("{:?}", c.configuration), c.circles, c.loops, c.points, Vec::new())
        }
        SwitchingManifold::Torus => {
            let set = torus_tangency_set(&pair.a, tol).map_err(lift)?;
            let singular = set.singular_circles().to_vec();
            ("FourCircles".to_string(), set.circles.to_vec(), Vec::new(), Vec::new(), singular)
        }
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let curve_file = CurveFile {
        schema: "filippov-curves/v1",
        manifold: pair.manifold,
        configuration: Some(configuration),
        curves: &curves,
        loops: &loops,
        points: &points,
    };
    write_file(&out.join("curves.json"), &to_json(&curve_file))?;
    write_file(
        &out.join("mesh.json"),
        &to_json(&json!({
            "schema": "filippov-mesh/v1",
            "manifold": pair.manifold,
            "rows": MESH_ROWS + 1,
            "cols": MESH_COLS,
            "points": mesh(pair.manifold),
        })),
    )?;

    let rotation = sliding_rotation(&pair).map_err(lift)?;
    let t_run = rotation.period().unwrap_or(FIGURE_TIME_TRIVIAL);
    let surface = pair.manifold.surface();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = trajectory_header(&spec.digest(), seed);
    let mut next_segment = 0;
    let mut written = 0;
    let mut attempts = 0;
    while written < FIGURE_TRAJECTORIES && attempts < 1000 {
        attempts += 1;
        let x = surface.sample_point(&mut rng);
        let (xs, _) = pair.normal_components(x);
        if xs.abs() <= 1e-3 * pair.scale() || singular.iter().any(|c| c.distance_to(x) < 1e-3) {
            continue;
        }
        let traj = simulate(&pair, x, t_run, &SimulateOptions::default()).map_err(lift)?;
        next_segment = write_trajectory_rows(&mut csv, &traj, next_segment);
        written += 1;
    }
    write_file(&out.join("trajectories.csv"), &csv)?;
    let summary = json!({
        "schema": "filippov-figure/v1",
        "figure": figure,
        "files": ["curves.json", "mesh.json", "trajectories.csv"],
        "curves": curves.len(),
        "loops": loops.len(),
        "points": points.len(),
        "trajectories": written,
    });
    Ok(Outcome {
        stdout: to_json(&summary),
        ..Outcome::default()
    })
}
