use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::error::{Error, Result};
use crate::sliding::SlidingRotation;

use super::TrajectorySegment;

/// Certificate that a sliding orbit returns to its start and stays in one
/// plane orthogonal to the rotation axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub closed: bool,
    pub period: f64,
    pub return_distance: f64,
    pub normal: Vec3,
    pub max_plane_deviation: f64,
}

/// `x(period)` is read from the segment when it ends one period after its
/// start, otherwise taken from the closed-form rotation.
pub fn closure_report(seg: &TrajectorySegment, rotation: &SlidingRotation, tol: f64) -> Result<ClosureReport> {
    let normal = rotation.normal.ok_or(Error::TrivialSliding)?;
    let period = 2.0 * PI / rotation.rate;
    let &(t0, x0) = seg
        .samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty segment".into()))?;
    let end = match seg.samples.last() {
        Some(&(t, x)) if (t - t0 - period).abs() <= 1e-12 * period.max(1.0) => x,
        _ => rotation.flow(x0, period),
    };
    let return_distance = end.distance(x0);
    let max_plane_deviation = seg
        .samples
        .iter()
        .map(|(_, x)| (*x - x0).dot(normal).abs())
        .fold(0.0, f64::max);
    Ok(ClosureReport {
        closed: return_distance <= tol && period > 0.0,
        period,
        return_distance,
        normal,
        max_plane_deviation,
    })
}
