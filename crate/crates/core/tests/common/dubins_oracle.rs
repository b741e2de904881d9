//! Shortest forward-only bounded-curvature path by explicit circle/tangent
//! construction in the world frame: every left/right start circle, every
//! left/right goal circle, outer and inner tangents, and both middle-circle
//! placements for the three-arc words.

use std::f64::consts::{FRAC_PI_2, TAU};

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > TAU - 1e-9 {
        0.0
    } else {
        r
    }
}

type V = (f64, f64);

fn sub(a: V, b: V) -> V {
    (a.0 - b.0, a.1 - b.1)
}

fn norm(a: V) -> f64 {
    a.0.hypot(a.1)
}

fn ang(a: V) -> f64 {
    a.1.atan2(a.0)
}

fn left_center(q: [f64; 3], rho: f64) -> V {
    (q[0] - rho * q[2].sin(), q[1] + rho * q[2].cos())
}

fn right_center(q: [f64; 3], rho: f64) -> V {
    (q[0] + rho * q[2].sin(), q[1] - rho * q[2].cos())
}

/// Arc length turning from heading `a` to heading `b`.
fn arc(left: bool, a: f64, b: f64, rho: f64) -> f64 {
    rho * if left { wrap(b - a) } else { wrap(a - b) }
}

/// Lengths of every constructible candidate (all words, both CCC solutions).
pub fn all_lengths(s: [f64; 3], g: [f64; 3], rho: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &l1 in &[true, false] {
        for &l2 in &[true, false] {
            let c1 = if l1 { left_center(s, rho) } else { right_center(s, rho) };
            let c2 = if l2 { left_center(g, rho) } else { right_center(g, rho) };
            let v = sub(c2, c1);
            let d = norm(v);
            // straight tangent
            let tangent = if l1 == l2 {
                if d < 1e-12 {
                    out.push(arc(l1, s[2], g[2], rho));
                    None
                } else {
                    Some((d, ang(v)))
                }
            } else if d >= 2.0 * rho {
                let len = (d * d - 4.0 * rho * rho).max(0.0).sqrt();
                let off = (2.0 * rho).atan2(len);
                Some((len, if l1 { ang(v) + off } else { ang(v) - off }))
            } else {
                None
            };
            if let Some((len, phi)) = tangent {
                out.push(arc(l1, s[2], phi, rho) + len + arc(l2, phi, g[2], rho));
            }
            // three arcs: outer circles on the same side, middle circle opposite
            if l1 == l2 && d <= 4.0 * rho && d > 1e-12 {
                let h = (4.0 * rho * rho - d * d / 4.0).max(0.0).sqrt();
                let mid = (c1.0 + v.0 / 2.0, c1.1 + v.1 / 2.0);
                let perp = (-v.1 / d, v.0 / d);
                for sgn in [1.0, -1.0] {
                    let c3 = (mid.0 + sgn * h * perp.0, mid.1 + sgn * h * perp.1);
                    // heading at a tangent point, from the outward normal of the outer circle
                    let n1 = if l1 { sub(c1, c3) } else { sub(c3, c1) };
                    let n2 = if l1 { sub(c2, c3) } else { sub(c3, c2) };
                    let phi1 = ang(n1) - FRAC_PI_2;
                    let phi2 = ang(n2) - FRAC_PI_2;
                    out.push(arc(l1, s[2], phi1, rho) + arc(!l1, phi1, phi2, rho) + arc(l1, phi2, g[2], rho));
                }
            }
        }
    }
    out
}

pub fn shortest_length(s: [f64; 3], g: [f64; 3], rho: f64) -> f64 {
    all_lengths(s, g, rho).into_iter().fold(f64::INFINITY, f64::min)
}
