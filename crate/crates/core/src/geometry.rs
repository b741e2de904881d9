//! Planar primitives, polygonal obstacles and the collision predicates used by
//! every planner. The robot is a point; obstacles are closed sets, so touching
//! a boundary counts as a collision.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// Tolerance for degenerate orientation tests (collinear touches).
pub const ORIENT_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero area")]
    Degenerate,
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("centroid {0:?} lies outside the polygon; supply a representative point")]
    CentroidOutside(Point2),
    #[error("representative point of obstacle {0} is not strictly inside it")]
    RepresentativeOutside(usize),
    #[error("obstacles {0} and {1} overlap")]
    ObstaclesOverlap(usize, usize),
    #[error("obstacle {0} is not inside the workspace bounds")]
    ObstacleOutOfBounds(usize),
    #[error("invalid bounds")]
    InvalidBounds,
    #[error("free space appears empty: {0} rejected samples")]
    SamplingBudgetExhausted(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Self) -> f64 {
        (o - self).norm()
    }

    /// Angle of the vector from the origin, in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        Point2::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Sign of the turn a→b→c: positive for counter-clockwise, zero when collinear
/// within [`ORIENT_EPS`].
pub fn orientation(a: Point2, b: Point2, c: Point2) -> i8 {
    let v = (b - a).cross(c - a);
    if v > ORIENT_EPS {
        1
    } else if v < -ORIENT_EPS {
        -1
    } else {
        0
    }
}

fn within_box(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - ORIENT_EPS
        && p.x <= a.x.max(b.x) + ORIENT_EPS
        && p.y >= a.y.min(b.y) - ORIENT_EPS
        && p.y <= a.y.max(b.y) + ORIENT_EPS
}

/// True if `p` lies on the closed segment ab (within tolerance).
pub fn point_on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    orientation(a, b, p) == 0 && within_box(a, b, p)
}

/// Closed segment-segment intersection test; touching and collinear overlap count.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && within_box(p1, p2, q1))
        || (o2 == 0 && within_box(p1, p2, q2))
        || (o3 == 0 && within_box(q1, q2, p1))
        || (o4 == 0 && within_box(q1, q2, p2))
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Result<Self, GeometryError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(max.x > min.x && max.y > min.y) {
            return Err(GeometryError::InvalidBounds);
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    fn overlaps(&self, o: &Rect) -> bool {
        self.min.x <= o.max.x + ORIENT_EPS
            && o.min.x <= self.max.x + ORIENT_EPS
            && self.min.y <= o.max.y + ORIENT_EPS
            && o.min.y <= self.max.y + ORIENT_EPS
    }

    fn of_segment(a: Point2, b: Point2) -> Rect {
        Rect { min: Point2::new(a.x.min(b.x), a.y.min(b.y)), max: Point2::new(a.x.max(b.x), a.y.max(b.y)) }
    }
}

/// Simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
    #[serde(skip)]
    aabb: Rect,
}

impl Polygon {
    /// Validates and normalizes the vertex list. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let area = signed_area(&vertices);
        if area.abs() <= ORIENT_EPS {
            return Err(GeometryError::Degenerate);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(GeometryError::Degenerate);
            }
            for j in (i + 1)..n {
                // adjacent edges share a vertex by construction
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(GeometryError::SelfIntersecting);
                }
            }
        }
        let aabb = bounding_box(&vertices);
        Ok(Self { vertices, aabb })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bounding_box(&self) -> Rect {
        self.aabb
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        self.edges().any(|(a, b)| point_on_segment(p, a, b))
    }

    /// Inside or on the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        if !self.aabb.overlaps(&Rect { min: p, max: p }) {
            return false;
        }
        self.on_boundary(p) || self.strictly_contains_unchecked(p)
    }

    /// Inside and not on the boundary.
    pub fn strictly_contains(&self, p: Point2) -> bool {
        !self.on_boundary(p) && self.strictly_contains_unchecked(p)
    }

    fn strictly_contains_unchecked(&self, p: Point2) -> bool {
        // even-odd crossing rule
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Closed segment ab touches the closed polygon.
    pub fn intersects_segment(&self, a: Point2, b: Point2) -> bool {
        if !self.aabb.overlaps(&Rect::of_segment(a, b)) {
            return false;
        }
        if self.contains(a) || self.contains(b) {
            return true;
        }
        self.edges().any(|(c, d)| segments_intersect(a, b, c, d))
    }

    pub fn translated(&self, by: Point2) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&p| p + by).collect()).expect("translation preserves validity")
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            vertices: Vec<Point2>,
        }
        let raw = Raw::deserialize(d)?;
        Polygon::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn bounding_box(v: &[Point2]) -> Rect {
    let mut min = v[0];
    let mut max = v[0];
    for p in v {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Rect { min, max }
}

/// Area centroid. Fails when the centroid is not strictly interior, which can
/// only happen for non-convex polygons.
pub fn centroid(poly: &Polygon) -> Result<Point2, GeometryError> {
    let v = poly.vertices();
    let n = v.len();
    let a = poly.area();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    let c = Point2::new(cx / (6.0 * a), cy / (6.0 * a));
    if poly.strictly_contains(c) {
        Ok(c)
    } else {
        Err(GeometryError::CentroidOutside(c))
    }
}

/// Bounds, obstacles and one representative point per obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    bounds: Rect,
    obstacles: Vec<Polygon>,
    representatives: Vec<Point2>,
}

impl Workspace {
    /// Builds a workspace; a `None` representative defaults to the centroid.
    pub fn new(
        bounds: Rect,
        obstacles: Vec<Polygon>,
        representatives: Vec<Option<Point2>>,
    ) -> Result<Self, GeometryError> {
        assert_eq!(obstacles.len(), representatives.len());
        let mut reps = Vec::with_capacity(obstacles.len());
        for (i, (poly, rep)) in obstacles.iter().zip(representatives).enumerate() {
            let zeta = match rep {
                Some(p) => {
                    if !poly.strictly_contains(p) {
                        return Err(GeometryError::RepresentativeOutside(i));
                    }
                    p
                }
                None => centroid(poly)?,
            };
            if !poly.vertices().iter().all(|&p| bounds.contains(p)) {
                return Err(GeometryError::ObstacleOutOfBounds(i));
            }
            reps.push(zeta);
        }
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                if polygons_overlap(&obstacles[i], &obstacles[j]) {
                    return Err(GeometryError::ObstaclesOverlap(i, j));
                }
            }
        }
        Ok(Self { bounds, obstacles, representatives: reps })
    }

    pub fn empty(bounds: Rect) -> Self {
        Self { bounds, obstacles: Vec::new(), representatives: Vec::new() }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn representatives(&self) -> &[Point2] {
        &self.representatives
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacles.len()
    }

    /// Same workspace plus one more obstacle.
    pub fn with_obstacle(&self, poly: Polygon, rep: Option<Point2>) -> Result<Self, GeometryError> {
        let mut obstacles = self.obstacles.clone();
        let mut reps: Vec<Option<Point2>> = self.representatives.iter().copied().map(Some).collect();
        obstacles.push(poly);
        reps.push(rep);
        Workspace::new(self.bounds, obstacles, reps)
    }
}

fn polygons_overlap(a: &Polygon, b: &Polygon) -> bool {
    if !a.bounding_box().overlaps(&b.bounding_box()) {
        return false;
    }
    a.edges().any(|(p, q)| b.intersects_segment(p, q)) || b.vertices().iter().any(|&p| a.contains(p))
}

pub fn point_in_obstacle(p: Point2, w: &Workspace) -> bool {
    w.obstacles.iter().any(|o| o.contains(p))
}

/// Closed segment stays in bounds and touches no obstacle. Symmetric in its
/// endpoints by construction.
pub fn segment_collision_free(a: Point2, b: Point2, w: &Workspace) -> bool {
    let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    if !w.bounds.contains(a) || !w.bounds.contains(b) {
        return false;
    }
    !w.obstacles.iter().any(|o| o.intersects_segment(a, b))
}

pub fn polyline_collision_free(trace: &[Point2], w: &Workspace) -> bool {
    trace.windows(2).all(|s| segment_collision_free(s[0], s[1], w))
}

/// Rejection budget per requested sample.
pub const DEFAULT_REJECTION_FACTOR: usize = 1000;

/// `k` points uniform over the bounds, conditioned on lying outside every obstacle.
pub fn sample_free<R: Rng + ?Sized>(k: usize, w: &Workspace, rng: &mut R) -> Result<Vec<Point2>, GeometryError> {
    sample_free_with_budget(k, w, rng, DEFAULT_REJECTION_FACTOR.saturating_mul(k))
}

pub fn sample_free_with_budget<R: Rng + ?Sized>(
    k: usize,
    w: &Workspace,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Vec<Point2>, GeometryError> {
    let mut out = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while out.len() < k {
        if attempts >= max_attempts {
            return Err(GeometryError::SamplingBudgetExhausted(attempts));
        }
        attempts += 1;
        let p = sample_bounds(&w.bounds, rng);
        if !point_in_obstacle(p, w) {
            out.push(p);
        }
    }
    Ok(out)
}

pub(crate) fn sample_bounds<R: Rng + ?Sized>(b: &Rect, rng: &mut R) -> Point2 {
    Point2::new(rng.gen_range(b.min.x..=b.max.x), rng.gen_range(b.min.y..=b.max.y))
}
