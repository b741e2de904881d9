//! Scenario files: a strict, versioned JSON description of one planning run.

use crate::fmht::FmhtConfig;
use crate::geometry::{point_in_obstacle, GeometryError, Point2, Polygon, Rect, Workspace};
use crate::homology::{quantize_key, HSig, SignaturePolicy, DEFAULT_TOLERANCE};
use crate::problem::{GoalRegion, Problem, TerminationRule};
use crate::rrht::{IterationBudget, RrhtConfig};
use crate::steering::{State, Steering, System, DEFAULT_RESOLUTION};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use std::time::Duration;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl ToString) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub vertices: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative_point: Option<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub center: Point2,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative_point: Option<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default = "one")]
    pub h_limit: f64,
    /// Blocked classes, given by a representative goal-closed signature.
    #[serde(default)]
    pub blocked: Vec<HSig>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self { h_limit: 1.0, blocked: Vec::new(), tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Fmht,
    Rrht,
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fmht" => Ok(Algo::Fmht),
            "rrht" => Ok(Algo::Rrht),
            other => Err(format!("unknown algorithm `{other}` (expected fmht or rrht)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSpec {
    #[serde(default = "default_algo")]
    pub algo: Algo,
    /// Batch sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Incremental iteration count.
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    /// Defaults to 1.1 for the batch planner and 1.0 for the incremental one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_multiplier: Option<f64>,
    /// Defaults to 10% of the bounds diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub lazy: bool,
    #[serde(default = "default_resolution")]
    pub trace_resolution: f64,
    #[serde(default = "one")]
    pub turning_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        Self {
            algo: Algo::Fmht,
            samples: default_samples(),
            iterations: default_iterations(),
            gamma_multiplier: None,
            eta: None,
            seed: 0,
            lazy: true,
            trace_resolution: DEFAULT_RESOLUTION,
            turning_radius: 1.0,
            time_limit_s: None,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}
fn default_algo() -> Algo {
    Algo::Fmht
}
fn default_samples() -> usize {
    1000
}
fn default_iterations() -> u64 {
    1000
}
fn default_rule() -> TerminationRule {
    TerminationRule::class_count(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default = "default_system")]
    pub system: System,
    pub bounds: Rect,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub start: State,
    pub goal: GoalSpec,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub planner: PlannerSpec,
    #[serde(default = "default_rule")]
    pub termination: TerminationRule,
}

fn default_system() -> System {
    System::Holonomic
}

impl Scenario {
    /// Parses strictly, fills algorithm-dependent defaults and validates.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut s: Scenario = serde_path_to_error::deserialize(de)
            .map_err(|e| ScenarioError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
        s.resolve_defaults();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn resolve_defaults(&mut self) {
        if self.planner.gamma_multiplier.is_none() {
            self.planner.gamma_multiplier = Some(match self.planner.algo {
                Algo::Fmht => 1.1,
                Algo::Rrht => 1.0,
            });
        }
        if self.planner.eta.is_none() {
            self.planner.eta = Some(0.1 * self.bounds.diagonal());
        }
    }

    pub fn workspace(&self) -> Result<Workspace, ScenarioError> {
        let bounds = Rect::new(self.bounds.min, self.bounds.max).map_err(|e| invalid("bounds", e))?;
        let mut polys = Vec::with_capacity(self.obstacles.len());
        for (i, o) in self.obstacles.iter().enumerate() {
            polys.push(Polygon::new(o.vertices.clone()).map_err(|e| invalid(format!("obstacles[{i}]"), e))?);
        }
        let reps = self.obstacles.iter().map(|o| o.representative_point).collect();
        Workspace::new(bounds, polys, reps).map_err(|e| {
            let field = match &e {
                GeometryError::RepresentativeOutside(i) => format!("obstacles[{i}].representative_point"),
                GeometryError::ObstacleOutOfBounds(i) => format!("obstacles[{i}]"),
                GeometryError::ObstaclesOverlap(i, _) => format!("obstacles[{i}]"),
                _ => "obstacles".to_string(),
            };
            invalid(field, e)
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version)));
        }
        let w = self.workspace()?;
        let p = self.start.position;
        if !p.is_finite() || !w.bounds().contains(p) || point_in_obstacle(p, &w) {
            return Err(invalid("start", "not in free space"));
        }
        match (self.system, self.start.heading) {
            (System::Dubins, None) => return Err(invalid("start.heading", "required for the dubins system")),
            (System::Holonomic, Some(_)) => {
                return Err(invalid("start.heading", "not allowed for the holonomic system"))
            }
            _ => {}
        }
        let g = &self.goal;
        if !(g.radius > 0.0 && g.radius.is_finite()) {
            return Err(invalid("goal.radius", "must be positive"));
        }
        if !w.bounds().contains(g.center) || point_in_obstacle(g.center, &w) {
            return Err(invalid("goal.center", "not in free space"));
        }
        if let Some(r) = g.representative_point {
            if r.distance(g.center) > g.radius {
                return Err(invalid("goal.representative_point", "outside the goal region"));
            }
        }
        if !(self.policy.h_limit > 0.0) {
            return Err(invalid("policy.h_limit", "must be positive"));
        }
        if !(self.policy.tolerance > 0.0) {
            return Err(invalid("policy.tolerance", "must be positive"));
        }
        if let Some(b) = self.policy.blocked.iter().find(|b| b.len() != w.obstacle_count()) {
            return Err(invalid("policy.blocked", format!("key {b:?} does not have one entry per obstacle")));
        }
        let pl = &self.planner;
        if !(pl.trace_resolution > 0.0) {
            return Err(invalid("planner.trace_resolution", "must be positive"));
        }
        if !(pl.turning_radius > 0.0) {
            return Err(invalid("planner.turning_radius", "must be positive"));
        }
        if pl.gamma_multiplier.is_some_and(|g| !(g > 0.0)) {
            return Err(invalid("planner.gamma_multiplier", "must be positive"));
        }
        if pl.eta.is_some_and(|e| !(e > 0.0)) {
            return Err(invalid("planner.eta", "must be positive"));
        }
        if pl.algo == Algo::Fmht && pl.samples == 0 {
            return Err(invalid("planner.samples", "must be positive"));
        }
        if pl.time_limit_s.is_some_and(|t| !(t > 0.0)) {
            return Err(invalid("planner.time_limit_s", "must be positive"));
        }
        if !self.termination.is_set() {
            return Err(invalid("termination", "set at least one criterion"));
        }
        if let Some(t) = &self.termination.target_signature {
            if t.len() != w.obstacle_count() {
                return Err(invalid("termination.target_signature", "needs one entry per obstacle"));
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> SignaturePolicy {
        SignaturePolicy {
            h_limit: self.policy.h_limit,
            blocked: self
                .policy
                .blocked
                .iter()
                .map(|h| quantize_key(h, self.policy.tolerance))
                .collect::<BTreeSet<_>>(),
            tolerance: self.policy.tolerance,
        }
    }

    pub fn steering(&self) -> Steering {
        match self.system {
            System::Holonomic => Steering::holonomic(),
            System::Dubins => Steering::dubins(self.planner.turning_radius),
        }
    }

    pub fn problem(&self) -> Result<Problem, ScenarioError> {
        let goal = GoalRegion {
            center: self.goal.center,
            radius: self.goal.radius,
            representative: self.goal.representative_point.unwrap_or(self.goal.center),
        };
        Ok(Problem {
            workspace: self.workspace()?,
            steering: self.steering(),
            start: self.start,
            goal,
            policy: self.policy(),
            resolution: self.planner.trace_resolution,
        })
    }

    pub fn fmht_config(&self) -> FmhtConfig {
        FmhtConfig {
            samples: self.planner.samples,
            gamma_multiplier: self.planner.gamma_multiplier.unwrap_or(1.1),
            lazy: self.planner.lazy,
            seed: self.planner.seed,
            rule: self.termination.clone(),
        }
    }

    pub fn rrht_config(&self) -> RrhtConfig {
        RrhtConfig {
            budget: IterationBudget {
                max_iterations: self.planner.iterations,
                time_limit: self.planner.time_limit_s.map(Duration::from_secs_f64),
                stop_on_classes: if self.termination.exhaust_open_set {
                    None
                } else {
                    self.termination.target_class_count
                },
            },
            gamma_multiplier: self.planner.gamma_multiplier.unwrap_or(1.0),
            eta: self.planner.eta,
            seed: self.planner.seed,
        }
    }

    /// A single-obstacle example: a unit square between start and goal.
    pub fn example() -> Self {
        let mut s = Scenario {
            schema_version: SCHEMA_VERSION,
            system: System::Holonomic,
            bounds: Rect { min: Point2::new(-3.0, -2.0), max: Point2::new(3.0, 2.0) },
            obstacles: vec![ObstacleSpec {
                vertices: vec![
                    Point2::new(-0.5, -0.5),
                    Point2::new(0.5, -0.5),
                    Point2::new(0.5, 0.5),
                    Point2::new(-0.5, 0.5),
                ],
                representative_point: None,
            }],
            start: State::point(Point2::new(-2.0, 0.0)),
            goal: GoalSpec { center: Point2::new(2.0, 0.0), radius: 0.25, representative_point: None },
            policy: PolicySpec::default(),
            planner: PlannerSpec::default(),
            termination: default_rule(),
        };
        s.resolve_defaults();
        s
    }
}
