//! Winding-number signatures of planar trajectories.
//!
//! Each obstacle carries a representative point ζ. The signature of a path is
//! the per-obstacle winding angle around ζ divided by 2π. For a straight
//! segment that does not pass through ζ the angle is the branch of
//! `arg(z2-ζ) - arg(z1-ζ)` with the smallest magnitude, so each component of a
//! segment signature lies strictly inside (-1/2, 1/2). Longer or curved paths
//! are handled as polylines and their segment signatures summed.

use crate::geometry::{Point2, Workspace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Neg, Sub};
use thiserror::Error;

/// Default quantization step / equality tolerance for signatures.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Distance below which a representative point is considered to lie on a segment.
pub const DEGENERATE_EPS: f64 = 1e-12;

const MAX_SPLIT_DEPTH: u32 = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("segment {from:?} -> {to:?} passes through representative point {obstacle}")]
    Degenerate { from: Point2, to: Point2, obstacle: usize },
    #[error("signature length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Real-valued signature, one component per obstacle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HSig(pub Vec<f64>);

impl HSig {
    pub fn zeros(n: usize) -> Self {
        HSig(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise negation: the signature of the same path traversed backwards.
    pub fn reverse(&self) -> HSig {
        -self
    }

    pub fn key(&self, tol: f64) -> HKey {
        quantize_key(self, tol)
    }

    /// Componentwise rounding to the nearest integer vector.
    pub fn rounded(&self) -> Vec<i64> {
        self.0.iter().map(|v| v.round() as i64).collect()
    }
}

impl Add<&HSig> for &HSig {
    type Output = HSig;
    fn add(self, o: &HSig) -> HSig {
        debug_assert_eq!(self.len(), o.len());
        HSig(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&HSig> for &HSig {
    type Output = HSig;
    fn sub(self, o: &HSig) -> HSig {
        debug_assert_eq!(self.len(), o.len());
        HSig(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &HSig {
    type Output = HSig;
    fn neg(self) -> HSig {
        HSig(self.0.iter().map(|v| -v).collect())
    }
}

/// Hashable class key: signature components quantized by a tolerance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HKey(pub Vec<i64>);

impl std::fmt::Display for HKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

pub fn quantize_key(h: &HSig, tol: f64) -> HKey {
    HKey(h.0.iter().map(|v| (v / tol).round() as i64).collect())
}

pub fn reverse(h: &HSig) -> HSig {
    h.reverse()
}

pub fn hsig_equal(a: &HSig, b: &HSig, tol: f64) -> Result<bool, HomologyError> {
    if a.len() != b.len() {
        return Err(HomologyError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.0.iter().zip(&b.0).all(|(x, y)| (x - y).abs() <= tol))
}

/// Wraps an angle difference to the branch of smallest magnitude, (-π, π].
fn absmin_branch(delta: f64) -> f64 {
    let mut d = delta - TAU * (delta / TAU).round();
    if d <= -PI {
        d += TAU;
    }
    d
}

fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a.lerp(b, t))
}

/// Winding angle of the straight segment z1→z2 around `zeta`, with bisection
/// whenever a piece subtends more than π/2.
fn segment_angle(z1: Point2, z2: Point2, zeta: Point2, depth: u32) -> f64 {
    let delta = absmin_branch((z2 - zeta).angle() - (z1 - zeta).angle());
    if delta.abs() > FRAC_PI_2 && depth < MAX_SPLIT_DEPTH {
        let m = z1.lerp(z2, 0.5);
        segment_angle(z1, m, zeta, depth + 1) + segment_angle(m, z2, zeta, depth + 1)
    } else {
        delta
    }
}

/// Signature increment of one straight segment against an explicit set of
/// representative points.
pub fn segment_hsig_points(z1: Point2, z2: Point2, zetas: &[Point2]) -> Result<HSig, HomologyError> {
    let mut out = Vec::with_capacity(zetas.len());
    for (l, &zeta) in zetas.iter().enumerate() {
        if distance_to_segment(zeta, z1, z2) <= DEGENERATE_EPS {
            return Err(HomologyError::Degenerate { from: z1, to: z2, obstacle: l });
        }
        out.push(segment_angle(z1, z2, zeta, 0) / TAU);
    }
    Ok(HSig(out))
}

pub fn segment_hsig(z1: Point2, z2: Point2, w: &Workspace) -> Result<HSig, HomologyError> {
    segment_hsig_points(z1, z2, w.representatives())
}

pub fn polyline_hsig_points(trace: &[Point2], zetas: &[Point2]) -> Result<HSig, HomologyError> {
    let mut acc = vec![0.0; zetas.len()];
    for s in trace.windows(2) {
        let inc = segment_hsig_points(s[0], s[1], zetas)?;
        for (a, v) in acc.iter_mut().zip(inc.0) {
            *a += v;
        }
    }
    Ok(HSig(acc))
}

pub fn polyline_hsig(trace: &[Point2], w: &Workspace) -> Result<HSig, HomologyError> {
    polyline_hsig_points(trace, w.representatives())
}

/// The allowed signature set: a box `|h_i| <= h_limit` minus an explicit
/// blocked list of class keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignaturePolicy {
    #[serde(default = "default_h_limit")]
    pub h_limit: f64,
    #[serde(default)]
    pub blocked: BTreeSet<HKey>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_h_limit() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Default for SignaturePolicy {
    fn default() -> Self {
        Self { h_limit: 1.0, blocked: BTreeSet::new(), tolerance: DEFAULT_TOLERANCE }
    }
}

impl SignaturePolicy {
    pub fn with_limit(h_limit: f64) -> Self {
        assert!(h_limit > 0.0, "h_limit must be positive");
        Self { h_limit, ..Self::default() }
    }

    pub fn key(&self, h: &HSig) -> HKey {
        quantize_key(h, self.tolerance)
    }

    pub fn is_allowed(&self, h: &HSig) -> bool {
        is_allowed(h, self)
    }
}

/// Decided on the quantized key, so every path of one class gets the same
/// answer even when its components sit exactly on the limit.
pub fn is_allowed(h: &HSig, policy: &SignaturePolicy) -> bool {
    let key = policy.key(h);
    let limit = (policy.h_limit / policy.tolerance).round() as i64;
    key.0.iter().all(|k| k.abs() <= limit) && !policy.blocked.contains(&key)
}
