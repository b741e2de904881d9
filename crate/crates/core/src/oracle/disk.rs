use super::OracleError;
use crate::geometry::Point2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Start and goal separated by a disk obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskScenario {
    pub start: Point2,
    pub goal: Point2,
    pub center: Point2,
    pub radius: f64,
}

/// Which side of the directed line start → goal the path passes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Left of start → goal.
    Upper,
    /// Right of start → goal.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPath {
    pub length: f64,
    /// False when the straight segment misses the disk; the length is then
    /// the straight distance for either side.
    pub blocked: bool,
}

fn segment_distance(c: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((c - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    c.distance(a + ab * t)
}

/// Shortest path around a disk on the given side: two tangent segments and
/// the arc between the tangent points.
pub fn disk_shortest(ds: &DiskScenario, side: Side) -> Result<DiskPath, OracleError> {
    let DiskScenario { start, goal, center, radius: r } = *ds;
    let ds_ = start.distance(center);
    let dg = goal.distance(center);
    if ds_ <= r || dg <= r {
        return Err(OracleError::InsideDisk);
    }
    let straight = start.distance(goal);
    if r <= 0.0 || segment_distance(center, start, goal) >= r {
        return Ok(DiskPath { length: straight, blocked: false });
    }
    let a_s = (start - center).angle();
    let a_g = (goal - center).angle();
    let ccw = (a_g - a_s).rem_euclid(TAU);
    // the arc on the left of start → goal is swept clockwise around the center
    let sweep = match side {
        Side::Upper => TAU - ccw,
        Side::Lower => ccw,
    };
    let arc = sweep - (r / ds_).acos() - (r / dg).acos();
    let tangents = (ds_ * ds_ - r * r).sqrt() + (dg * dg - r * r).sqrt();
    Ok(DiskPath { length: tangents + r * arc.max(0.0), blocked: true })
}
