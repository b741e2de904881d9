//! Obstacle-free optimal connections between two states.

pub mod dubins;

use crate::geometry::Point2;
use dubins::SegmentKind;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::f64::consts::{PI, TAU};

/// Default discretization step for traces, in workspace units.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

thread_local! {
    static STEER_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of `connect`/`steer` solutions computed on this thread.
pub fn steer_calls() -> u64 {
    STEER_CALLS.with(|c| c.get())
}

fn count_call() {
    STEER_CALLS.with(|c| c.set(c.get() + 1));
}

/// Heading normalized to [-π, π).
pub fn normalize_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub position: Point2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
}

impl State {
    pub fn point(p: Point2) -> Self {
        Self { position: p, heading: None }
    }

    pub fn pose(x: f64, y: f64, heading: f64) -> Self {
        Self { position: Point2::new(x, y), heading: Some(normalize_angle(heading)) }
    }

    fn as_pose(&self) -> [f64; 3] {
        [self.position.x, self.position.y, self.heading.expect("dubins states carry a heading")]
    }

    /// Same state up to 1e-12 in every coordinate.
    pub fn coincides(&self, o: &State) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        close(self.position.x, o.position.x)
            && close(self.position.y, o.position.y)
            && match (self.heading, o.heading) {
                (None, None) => true,
                (Some(a), Some(b)) => normalize_angle(a - b).abs() <= 1e-12,
                _ => false,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Holonomic,
    Dubins,
}

impl System {
    /// Dimension of the state space.
    pub fn dimension(self) -> usize {
        match self {
            System::Holonomic => 2,
            System::Dubins => 3,
        }
    }
}

/// Geometric description of a steering solution: a start pose and a list of
/// straight / constant-curvature pieces with world lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathShape {
    start: Point2,
    heading: f64,
    rho: f64,
    pieces: Vec<(SegmentKind, f64)>,
}

impl PathShape {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).sum()
    }

    pub fn pieces(&self) -> &[(SegmentKind, f64)] {
        &self.pieces
    }

    fn advance(&self, pos: Point2, heading: f64, kind: SegmentKind, s: f64) -> (Point2, f64) {
        match kind {
            SegmentKind::Straight => (pos + Point2::new(heading.cos(), heading.sin()) * s, heading),
            SegmentKind::Left => {
                let h = heading + s / self.rho;
                let d = Point2::new(h.sin() - heading.sin(), heading.cos() - h.cos()) * self.rho;
                (pos + d, h)
            }
            SegmentKind::Right => {
                let h = heading - s / self.rho;
                let d = Point2::new(heading.sin() - h.sin(), h.cos() - heading.cos()) * self.rho;
                (pos + d, h)
            }
        }
    }

    /// Position and heading after arc length `s` (clamped to the path).
    pub fn point_at(&self, s: f64) -> (Point2, f64) {
        let mut pos = self.start;
        let mut heading = self.heading;
        let mut left = s.max(0.0);
        for &(kind, len) in &self.pieces {
            if left <= len {
                return self.advance(pos, heading, kind, left);
            }
            (pos, heading) = self.advance(pos, heading, kind, len);
            left -= len;
        }
        (pos, heading)
    }

    fn truncated(&self, s: f64) -> PathShape {
        let mut pieces = Vec::new();
        let mut left = s;
        for &(kind, len) in &self.pieces {
            if left <= 0.0 {
                break;
            }
            pieces.push((kind, len.min(left)));
            left -= len;
        }
        PathShape { pieces, ..self.clone() }
    }

    /// Samples every piece at spacing `<= step` (`step = None` keeps straight
    /// pieces as single chords). The final point is replaced by `end`.
    fn sample(&self, step: f64, dense_straight: bool, end: Point2) -> Vec<Point2> {
        let mut out = vec![self.start];
        let mut pos = self.start;
        let mut heading = self.heading;
        for &(kind, len) in &self.pieces {
            if len <= 0.0 {
                continue;
            }
            let n = if kind == SegmentKind::Straight && !dense_straight {
                1
            } else {
                ((len / step).ceil() as usize).max(1)
            };
            for i in 1..=n {
                let (p, _) = self.advance(pos, heading, kind, len * i as f64 / n as f64);
                out.push(p);
            }
            (pos, heading) = self.advance(pos, heading, kind, len);
        }
        if out.len() == 1 {
            out.push(end);
        } else {
            *out.last_mut().unwrap() = end;
        }
        out
    }
}

/// A local trajectory between two states with its length as cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerResult {
    pub start: State,
    pub end_state: State,
    pub cost: f64,
    pub shape: PathShape,
}

impl SteerResult {
    /// Polyline with straight pieces kept exact and arcs chorded at `resolution`.
    /// This is what collision checks and signature computations consume.
    pub fn polyline(&self, resolution: f64) -> Vec<Point2> {
        self.shape.sample(resolution, false, self.end_state.position)
    }

    /// Dense trace: every piece sampled at arc-length spacing `<= resolution`.
    pub fn trace(&self, resolution: f64) -> Vec<Point2> {
        trace(self, resolution)
    }
}

pub fn trace(result: &SteerResult, resolution: f64) -> Vec<Point2> {
    assert!(resolution > 0.0, "resolution must be positive");
    result.shape.sample(resolution, true, result.end_state.position)
}

/// Steering for a given system; `rho` is the Dubins turning radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steering {
    pub system: System,
    pub rho: f64,
}

impl Steering {
    pub fn holonomic() -> Self {
        Self { system: System::Holonomic, rho: 1.0 }
    }

    pub fn dubins(rho: f64) -> Self {
        assert!(rho > 0.0);
        Self { system: System::Dubins, rho }
    }

    /// Cost of the optimal connection without building the trajectory.
    pub fn cost(&self, a: &State, b: &State) -> f64 {
        match self.system {
            System::Holonomic => a.position.distance(b.position),
            System::Dubins => dubins::shortest(a.as_pose(), b.as_pose(), self.rho).length(),
        }
    }

    /// Lower bound on `cost(a, b)` from positions alone.
    pub fn lower_bound(&self, a: Point2, b: Point2) -> f64 {
        a.distance(b)
    }

    pub fn connect(&self, a: &State, b: &State) -> SteerResult {
        count_call();
        match self.system {
            System::Holonomic => {
                let d = b.position - a.position;
                let len = d.norm();
                SteerResult {
                    start: *a,
                    end_state: *b,
                    cost: len,
                    shape: PathShape {
                        start: a.position,
                        heading: if len > 0.0 { d.angle() } else { 0.0 },
                        rho: self.rho,
                        pieces: vec![(SegmentKind::Straight, len)],
                    },
                }
            }
            System::Dubins => {
                let path = dubins::shortest(a.as_pose(), b.as_pose(), self.rho);
                SteerResult {
                    start: *a,
                    end_state: *b,
                    cost: path.length(),
                    shape: PathShape {
                        start: a.position,
                        heading: a.heading.unwrap(),
                        rho: self.rho,
                        pieces: path.segments().to_vec(),
                    },
                }
            }
        }
    }

    /// Moves from `a` toward `target` along the optimal connection, stopping
    /// after at most `eta` of cost.
    pub fn steer(&self, a: &State, target: &State, eta: f64) -> SteerResult {
        assert!(eta > 0.0, "eta must be positive");
        let full = self.connect(a, target);
        if full.cost <= eta {
            return full;
        }
        let shape = full.shape.truncated(eta);
        let end_state = match self.system {
            System::Holonomic => State::point(a.position.lerp(target.position, eta / full.cost)),
            System::Dubins => {
                let (p, h) = shape.point_at(eta);
                State { position: p, heading: Some(normalize_angle(h)) }
            }
        };
        SteerResult { start: *a, end_state, cost: shape.length(), shape }
    }
}

pub fn connect(a: &State, b: &State, steering: &Steering) -> SteerResult {
    steering.connect(a, b)
}

pub fn steer(a: &State, target: &State, eta: f64, steering: &Steering) -> SteerResult {
    steering.steer(a, target, eta)
}
