//! Shortest paths for a forward-only car with bounded curvature.
//!
//! Closed-form solutions of the six candidate words in the frame where the
//! start sits at the origin and the goal on the positive x axis, distances
//! normalized by the turning radius.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Word {
    LSL,
    RSR,
    LSR,
    RSL,
    RLR,
    LRL,
}

impl Word {
    pub const ALL: [Word; 6] = [Word::LSL, Word::RSR, Word::LSR, Word::RSL, Word::RLR, Word::LRL];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            Word::LSL => [Left, Straight, Left],
            Word::RSR => [Right, Straight, Right],
            Word::LSR => [Left, Straight, Right],
            Word::RSL => [Right, Straight, Left],
            Word::RLR => [Right, Left, Right],
            Word::LRL => [Left, Right, Left],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

/// Angle in [0, 2π); values within 1e-12 of 2π snap to zero.
pub fn mod2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > TAU - 1e-12 {
        0.0
    } else {
        r
    }
}

/// Start/goal configuration in the normalized frame.
struct Frame {
    d: f64,
    alpha: f64,
    beta: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
}

impl Frame {
    fn new(start: [f64; 3], goal: [f64; 3], rho: f64) -> Self {
        let dx = goal[0] - start[0];
        let dy = goal[1] - start[1];
        let dist = dx.hypot(dy);
        let phi = if dist > 0.0 { dy.atan2(dx) } else { 0.0 };
        let alpha = mod2pi(start[2] - phi);
        let beta = mod2pi(goal[2] - phi);
        Frame { d: dist / rho, alpha, beta, sa: alpha.sin(), sb: beta.sin(), ca: alpha.cos(), cb: beta.cos() }
    }
}

/// Below this straight length a CSC word degenerates into a single arc.
const TINY: f64 = 1e-10;

fn clamp_sq(v: f64) -> Option<f64> {
    if v >= 0.0 {
        Some(v.sqrt())
    } else if v > -1e-12 {
        Some(0.0)
    } else {
        None
    }
}

fn word_params(f: &Frame, word: Word) -> Option<[f64; 3]> {
    let Frame { d, alpha, beta, sa, sb, ca, cb } = *f;
    let cab = (alpha - beta).cos();
    match word {
        Word::LSL => {
            let (x, y) = (d + sa - sb, cb - ca);
            let p = x.hypot(y);
            if p < TINY {
                return Some([mod2pi(beta - alpha), 0.0, 0.0]);
            }
            let tmp = y.atan2(x);
            Some([mod2pi(tmp - alpha), p, mod2pi(beta - tmp)])
        }
        Word::RSR => {
            let (x, y) = (d - sa + sb, ca - cb);
            let p = x.hypot(y);
            if p < TINY {
                return Some([mod2pi(alpha - beta), 0.0, 0.0]);
            }
            let tmp = y.atan2(x);
            Some([mod2pi(alpha - tmp), p, mod2pi(tmp - beta)])
        }
        Word::LSR => {
            let p = clamp_sq(-2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb))?;
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        Word::RSL => {
            let p = clamp_sq(-2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb))?;
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        Word::RLR => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - c.acos());
            let t = mod2pi(alpha - phi + p / 2.0);
            Some([t, p, mod2pi(alpha - beta - t + p)])
        }
        Word::LRL => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - c.acos());
            let t = mod2pi(-alpha - phi + p / 2.0);
            Some([t, p, mod2pi(beta - alpha - t + p)])
        }
    }
}

/// A Dubins path: a word with its three normalized segment parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: Word,
    pub params: [f64; 3],
    pub rho: f64,
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.params.iter().sum::<f64>() * self.rho
    }

    /// Segment kinds with world-frame lengths.
    pub fn segments(&self) -> [(SegmentKind, f64); 3] {
        let k = self.word.segments();
        [(k[0], self.params[0] * self.rho), (k[1], self.params[1] * self.rho), (k[2], self.params[2] * self.rho)]
    }
}

/// Every feasible word between two poses (x, y, heading).
pub fn candidates(start: [f64; 3], goal: [f64; 3], rho: f64) -> Vec<DubinsPath> {
    let f = Frame::new(start, goal, rho);
    Word::ALL.iter().filter_map(|&w| word_params(&f, w).map(|params| DubinsPath { word: w, params, rho })).collect()
}

/// The shortest of the six words. Ties go to the earlier word in [`Word::ALL`].
pub fn shortest(start: [f64; 3], goal: [f64; 3], rho: f64) -> DubinsPath {
    candidates(start, goal, rho)
        .into_iter()
        .min_by(|a, b| a.length().total_cmp(&b.length()))
        .expect("LSL and RSR always exist")
}
