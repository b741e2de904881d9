#![allow(dead_code)]

pub mod dubins_oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use topoplan::geometry::{Point2, Polygon, Rect, Workspace};
use topoplan::homology::SignaturePolicy;
use topoplan::problem::{GoalRegion, Problem};
use topoplan::steering::{State, Steering};

pub fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

/// Convex polygon with `n` vertices at sorted random angles on a circle.
pub fn random_convex(rng: &mut ChaCha8Rng, center: Point2, radius: f64) -> Polygon {
    let n = rng.gen_range(5..=8);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let pts = angles.iter().map(|a| center + p(a.cos(), a.sin()) * radius).collect();
    Polygon::new(pts).unwrap_or_else(|_| regular(center, radius, 6))
}

pub fn regular(center: Point2, radius: f64, n: usize) -> Polygon {
    let pts = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            center + p(a.cos(), a.sin()) * radius
        })
        .collect();
    Polygon::new(pts).unwrap()
}

/// Random holonomic instance on [0,10]² with `obstacles` convex obstacles
/// between the start (1,5) and the goal disk of radius 1 at (9,5).
pub fn random_instance(seed: u64, obstacles: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = Rect::new(p(0.0, 0.0), p(10.0, 10.0)).unwrap();
    let start = p(1.0, 5.0);
    let goal = GoalRegion::disk(p(9.0, 5.0), 1.0);
    loop {
        let polys: Vec<Polygon> = (0..obstacles)
            .map(|_| {
                let c = p(rng.gen_range(3.0..6.5), rng.gen_range(2.5..7.5));
                let r = rng.gen_range(0.6..1.4);
                random_convex(&mut rng, c, r)
            })
            .collect();
        let Ok(w) = Workspace::new(bounds, polys.clone(), vec![None; obstacles]) else { continue };
        if polys.iter().any(|o| o.contains(start)) {
            continue;
        }
        return Problem {
            workspace: w,
            steering: Steering::holonomic(),
            start: State::point(start),
            goal,
            policy: SignaturePolicy::default(),
            resolution: 0.05,
        };
    }
}

/// Start (-3,0), goal disk at (3,0) r = 0.25, one 32-gon of radius 1 at the origin.
pub fn disk_problem() -> Problem {
    let bounds = Rect::new(p(-5.0, -4.0), p(5.0, 4.0)).unwrap();
    let w = Workspace::new(bounds, vec![regular(p(0.0, 0.0), 1.0, 32)], vec![Some(p(0.0, 0.0))]).unwrap();
    Problem {
        workspace: w,
        steering: Steering::holonomic(),
        start: State::point(p(-3.0, 0.0)),
        goal: GoalRegion::disk(p(3.0, 0.0), 0.25),
        policy: SignaturePolicy::default(),
        resolution: 0.05,
    }
}

pub fn random_pose(rng: &mut ChaCha8Rng, span: f64) -> [f64; 3] {
    [rng.gen_range(-span..span), rng.gen_range(-span..span), rng.gen_range(-PI..PI)]
}

/// Length of the shortest path from `s` to `g` around a disk of radius `r`
/// centered at `c`, passing on the side where the sweep from s to g around c
/// is counter-clockwise (`ccw`) or clockwise. Tangent, arc, tangent.
pub fn tangent_arc_length(s: Point2, g: Point2, c: Point2, r: f64, ccw: bool) -> f64 {
    let (ds, dg) = (s.distance(c), g.distance(c));
    let (ts, tg) = ((ds * ds - r * r).sqrt(), (dg * dg - r * r).sqrt());
    let (a_s, a_g) = ((s.y - c.y).atan2(s.x - c.x), (g.y - c.y).atan2(g.x - c.x));
    let mut sweep = if ccw { a_g - a_s } else { a_s - a_g };
    sweep = sweep.rem_euclid(TAU);
    let arc = sweep - (r / ds).acos() - (r / dg).acos();
    ts + tg + r * arc.max(0.0)
}
