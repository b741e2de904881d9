//! Types shared by both planners: the problem tuple, goal bookkeeping and
//! the raw planner output.

use crate::geometry::{point_in_obstacle, sample_bounds, GeometryError, Point2, Workspace};
use crate::graph::{Graph, GraphError, MetricsSnapshot, NodeId, VertexId};
use crate::homology::{segment_hsig, HKey, HSig, HomologyError, SignaturePolicy};
use crate::steering::{State, Steering, System};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// Disk-shaped goal region with the point used to close signatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: Point2,
    pub radius: f64,
    pub representative: Point2,
}

impl GoalRegion {
    pub fn disk(center: Point2, radius: f64) -> Self {
        Self { center, radius, representative: center }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.distance(self.center) <= self.radius
    }
}

/// Everything a planner needs besides its own settings.
#[derive(Debug, Clone)]
pub struct Problem {
    pub workspace: Workspace,
    pub steering: Steering,
    pub start: State,
    pub goal: GoalRegion,
    pub policy: SignaturePolicy,
    /// Arc discretization used for collision checks and signatures.
    pub resolution: f64,
}

impl Problem {
    pub fn validate(&self) -> Result<(), PlanError> {
        let b = self.workspace.bounds();
        if !b.contains(self.start.position) || point_in_obstacle(self.start.position, &self.workspace) {
            return Err(PlanError::Invalid("start is not in free space".into()));
        }
        if (self.steering.system == System::Dubins) != self.start.heading.is_some() {
            return Err(PlanError::Invalid("start heading does not match the system".into()));
        }
        if !(self.goal.radius > 0.0) || !self.goal.radius.is_finite() {
            return Err(PlanError::Invalid("goal radius must be positive".into()));
        }
        if !b.contains(self.goal.center) {
            return Err(PlanError::Invalid("goal center is out of bounds".into()));
        }
        if !self.goal.contains(self.goal.representative) {
            return Err(PlanError::Invalid("goal representative point is outside the goal region".into()));
        }
        if !(self.resolution > 0.0) {
            return Err(PlanError::Invalid("trace resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn new_graph(&self, expected_vertices: usize) -> Graph {
        Graph::new(self.workspace.clone(), self.steering, self.resolution, self.policy.tolerance, expected_vertices)
    }

    /// Uniform state over the bounds (obstacles not excluded).
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let p = sample_bounds(&self.workspace.bounds(), rng);
        self.with_random_heading(p, rng)
    }

    pub(crate) fn with_random_heading<R: Rng + ?Sized>(&self, p: Point2, rng: &mut R) -> State {
        match self.steering.system {
            System::Holonomic => State::point(p),
            System::Dubins => State::pose(p.x, p.y, rng.gen_range(-PI..PI)),
        }
    }

    /// Signature of a node's path extended by the straight segment from its
    /// vertex to the goal representative point.
    pub fn goal_signature(&self, graph: &Graph, n: NodeId) -> Result<HSig, HomologyError> {
        let node = graph.node(n);
        let tail = segment_hsig(graph.position(node.vertex), self.goal.representative, &self.workspace)?;
        Ok(&node.hsig + &tail)
    }
}

/// When a planner may stop.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_signature: Option<HSig>,
    #[serde(default)]
    pub exhaust_open_set: bool,
}

impl TerminationRule {
    pub fn class_count(k: usize) -> Self {
        Self { target_class_count: Some(k), ..Self::default() }
    }

    pub fn exhaust() -> Self {
        Self { exhaust_open_set: true, ..Self::default() }
    }

    pub fn is_set(&self) -> bool {
        self.target_class_count.is_some() || self.target_signature.is_some() || self.exhaust_open_set
    }

    /// Whether the goal classes found so far satisfy the rule. An
    /// exhaustion-only rule is never satisfied early.
    pub fn satisfied(&self, goal_keys: &[HKey], policy: &SignaturePolicy) -> bool {
        if let Some(k) = self.target_class_count {
            if goal_keys.len() >= k {
                return true;
            }
        }
        if let Some(target) = &self.target_signature {
            let key = policy.key(target);
            if goal_keys.contains(&key) {
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    RuleSatisfied,
    OpenSetExhausted,
    IterationBudget,
    TimeLimit,
}

/// Best known path into the goal region for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalEntry {
    /// Key of the signature closed at the goal representative point.
    pub key: HKey,
    pub goal_hsig: HSig,
    pub node: NodeId,
    pub vertex: VertexId,
    pub cost: f64,
}

/// Raw output of a planner run.
#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub graph: Graph,
    pub root: NodeId,
    pub goals: Vec<GoalEntry>,
    pub termination: Termination,
    pub rule_satisfied: bool,
    pub snapshots: Vec<MetricsSnapshot>,
    /// Iteration (expansion for the batch planner) at which the first goal
    /// class was registered.
    pub first_goal_iteration: Option<u64>,
    pub iterations: u64,
    pub radius: f64,
}

impl PlanOutput {
    pub fn goal(&self, key: &HKey) -> Option<&GoalEntry> {
        self.goals.iter().find(|g| &g.key == key)
    }

    pub fn best(&self) -> Option<&GoalEntry> {
        self.goals.iter().min_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.key.cmp(&b.key)))
    }
}
