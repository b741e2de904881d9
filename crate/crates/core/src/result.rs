//! Plan results: one path per signature class, the final counters, and the
//! graph/tree data needed to draw the run afterwards.

use crate::geometry::{polyline_collision_free, Point2};
use crate::graph::{Metrics, MetricsSnapshot, NodeId};
use crate::homology::{polyline_hsig, segment_hsig, HKey, HSig};
use crate::problem::{PlanOutput, Termination};
use crate::scenario::{ObstacleSpec, Scenario, ScenarioError};
use crate::steering::State;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Maximum deviation between a stored and a recomputed signature component.
pub const SIGNATURE_CHECK_TOL: f64 = 1e-6;
/// Maximum relative deviation between cost and trace length.
pub const LENGTH_CHECK_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ResultError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed result at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("class {key}: {reason}")]
    Invalid { key: HKey, reason: String },
    #[error("tree edge {from} -> {to} missing from the graph")]
    MissingEdge { from: usize, to: usize },
}

/// Best path found for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassPath {
    /// Quantized goal-closed signature.
    pub key: HKey,
    /// Signature of the path closed with a straight segment to the goal
    /// representative point.
    pub signature: HSig,
    /// Signature of the path itself.
    pub end_signature: HSig,
    pub cost: f64,
    pub states: Vec<State>,
    /// Dense trace of the whole path.
    pub trace: Vec<Point2>,
    /// False once a later obstacle blocks the path.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    /// Winding layer of the child node: its signature minus that of the
    /// straight segment from the start, rounded. None when that segment is
    /// degenerate.
    pub layer: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderData {
    pub vertices: Vec<State>,
    /// Collision-free edges as vertex index pairs.
    pub graph_edges: Vec<[usize; 2]>,
    pub tree_edges: Vec<TreeEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplanReport {
    pub obstacle: ObstacleSpec,
    pub invalidated: usize,
    pub path_segments: usize,
    pub collision_checks: u64,
    pub steer_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanResult {
    pub scenario: Scenario,
    pub termination: Termination,
    pub rule_satisfied: bool,
    pub iterations: u64,
    pub radius: f64,
    pub first_goal_iteration: Option<u64>,
    pub metrics: Metrics,
    /// Sorted by cost.
    pub classes: Vec<ClassPath>,
    pub snapshots: Vec<MetricsSnapshot>,
    pub render: RenderData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replan: Option<ReplanReport>,
}

fn layer(out: &PlanOutput, start: Point2, n: NodeId) -> Option<Vec<i64>> {
    let g = &out.graph;
    let node = g.node(n);
    let straight = segment_hsig(start, g.position(node.vertex), g.workspace()).ok()?;
    Some(node.hsig.0.iter().zip(&straight.0).map(|(a, b)| (a - b).round() as i64).collect())
}

impl PlanResult {
    pub fn from_output(scenario: Scenario, out: &PlanOutput) -> Result<Self, ResultError> {
        let g = &out.graph;
        let res = g.resolution();
        let mut classes = Vec::with_capacity(out.goals.len());
        for entry in &out.goals {
            let path = g.path_to_root(entry.node);
            let states: Vec<State> = path.iter().map(|&n| g.vertex(g.node(n).vertex).state).collect();
            let mut trace = vec![states[0].position];
            for w in path.windows(2) {
                let (a, b) = (g.node(w[0]).vertex, g.node(w[1]).vertex);
                let e = g.cached_edge(a, b).ok_or(ResultError::MissingEdge { from: a.0, to: b.0 })?;
                trace.extend(g.edge(e).steer.trace(res).into_iter().skip(1));
            }
            classes.push(ClassPath {
                key: entry.key.clone(),
                signature: entry.goal_hsig.clone(),
                end_signature: g.node(entry.node).hsig.clone(),
                cost: entry.cost,
                states,
                trace,
                feasible: true,
            });
        }
        classes.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.key.cmp(&b.key)));

        let start = scenario.start.position;
        let render = RenderData {
            vertices: g.vertices().iter().map(|v| v.state).collect(),
            graph_edges: g.edge_set().map(|e| [g.edge(e).from.0, g.edge(e).to.0]).collect(),
            tree_edges: g
                .nodes()
                .iter()
                .enumerate()
                .filter_map(|(i, node)| {
                    let p = node.parent?;
                    Some(TreeEdge { from: g.node(p).vertex.0, to: node.vertex.0, layer: layer(out, start, NodeId(i)) })
                })
                .collect(),
        };
        Ok(Self {
            scenario,
            termination: out.termination,
            rule_satisfied: out.rule_satisfied,
            iterations: out.iterations,
            radius: out.radius,
            first_goal_iteration: out.first_goal_iteration,
            metrics: g.metrics(),
            classes,
            snapshots: out.snapshots.clone(),
            render,
            replan: None,
        })
    }

    /// Cheapest class that is still feasible.
    pub fn best(&self) -> Option<&ClassPath> {
        self.classes.iter().filter(|c| c.feasible).min_by(|a, b| a.cost.total_cmp(&b.cost))
    }

    pub fn is_feasible(&self) -> bool {
        self.best().is_some()
    }

    /// Re-checks every feasible path: collision-free, signature recomputed
    /// from the trace, and cost against trace length.
    pub fn validate(&self) -> Result<(), ResultError> {
        let w = self.scenario.workspace()?;
        let rep = self.scenario.goal.representative_point.unwrap_or(self.scenario.goal.center);
        for c in self.classes.iter().filter(|c| c.feasible) {
            let bad = |reason: String| ResultError::Invalid { key: c.key.clone(), reason };
            if c.trace.is_empty() {
                return Err(bad("empty trace".into()));
            }
            if !polyline_collision_free(&c.trace, &w) {
                return Err(bad("trace collides".into()));
            }
            let end = polyline_hsig(&c.trace, &w).map_err(|e| bad(e.to_string()))?;
            let tail = segment_hsig(*c.trace.last().unwrap(), rep, &w).map_err(|e| bad(e.to_string()))?;
            let closed = &end + &tail;
            if closed.len() != c.signature.len() {
                return Err(bad("signature length mismatch".into()));
            }
            let dev = closed.0.iter().zip(&c.signature.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dev > SIGNATURE_CHECK_TOL {
                return Err(bad(format!("signature deviates by {dev:e}")));
            }
            let len: f64 = c.trace.windows(2).map(|s| s[0].distance(s[1])).sum();
            if (len - c.cost).abs() > LENGTH_CHECK_TOL * c.cost.max(f64::MIN_POSITIVE) && (len - c.cost).abs() > 1e-12 {
                return Err(bad(format!("cost {} but trace length {len}", c.cost)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ResultError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| ResultError::Schema { path: e.path().to_string(), message: e.inner().to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ResultError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ResultError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ResultError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| ResultError::Io { path: path.display().to_string(), source })
    }
}
