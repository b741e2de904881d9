//! The shared geometric graph.
//!
//! Vertices are sampled states. Each vertex hosts a set of nodes, one per
//! homology class reached at that state. Edges are steering solutions between
//! vertex pairs; each is computed at most once and its collision status is
//! resolved at most once, no matter how many classes later travel along it.

mod index;
mod metrics;

pub use metrics::{Metrics, MetricsSnapshot};

use crate::geometry::{point_in_obstacle, polyline_collision_free, Point2, Workspace};
use crate::homology::{polyline_hsig, quantize_key, HKey, HSig};
use crate::steering::{State, SteerResult, Steering};
use index::GridIndex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use thiserror::Error;

/// Costs closer than this are treated as ties; ties keep the incumbent node.
pub const COST_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("state {0:?} duplicates vertex {1}")]
    DuplicateVertex(State, usize),
    #[error("state {0:?} is not in free space")]
    NotFree(State),
    #[error("connection radius needs at least 2 vertices, got {0}")]
    TooFewVertices(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: VertexId,
    pub state: State,
    /// One node per class key.
    pub nodes: BTreeMap<HKey, NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub hsig: HSig,
    pub key: HKey,
    pub cost: f64,
    pub parent: Option<NodeId>,
    pub vertex: VertexId,
    pub status: NodeStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionStatus {
    Unknown,
    Free,
    Blocked,
}

#[derive(Debug, Clone)]
pub struct CachedEdge {
    pub from: VertexId,
    pub to: VertexId,
    pub steer: SteerResult,
    pub hsig_increment: HSig,
    pub collision: CollisionStatus,
    /// The trajectory passes through a representative point, so its
    /// increment is undefined (and it necessarily collides).
    pub degenerate: bool,
}

impl CachedEdge {
    pub fn cost(&self) -> f64 {
        self.steer.cost
    }
}

/// A neighbor returned by the near queries, with the connecting edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: VertexId,
    pub edge: EdgeId,
    pub cost: f64,
}

/// Result of offering a node to a vertex under the dominance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppendOutcome {
    /// New class at this vertex.
    Inserted(NodeId),
    /// Cheaper node for an existing class; the slot is reused, so children
    /// that point at it keep a valid parent.
    Improved(NodeId),
    Dominated,
}

impl AppendOutcome {
    pub fn accepted(self) -> Option<NodeId> {
        match self {
            AppendOutcome::Inserted(n) | AppendOutcome::Improved(n) => Some(n),
            AppendOutcome::Dominated => None,
        }
    }
}

/// `gamma * (ln n / n)^(1/d)`.
pub fn radius(n: f64, gamma: f64, d: usize) -> Result<f64, GraphError> {
    if n < 2.0 {
        return Err(GraphError::TooFewVertices(n));
    }
    Ok(gamma * (n.ln() / n).powf(1.0 / d as f64))
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(d as f64 / 2.0) / gamma_half(d),
    }
}

// Γ(d/2 + 1) for integer d.
fn gamma_half(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (1..=d / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt() / 2.0;
        let mut k = 1.5;
        while k < d as f64 / 2.0 + 1.0 - 1e-9 {
            g *= k;
            k += 1.0;
        }
        g
    }
}

/// State-space measure used by the radius constants: the bounds area, times
/// 2π when a heading dimension is present.
pub fn state_space_measure(w: &Workspace, d: usize) -> f64 {
    let area = w.bounds().area();
    if d >= 3 {
        area * 2.0 * PI
    } else {
        area
    }
}

/// Batch-planner constant `2 (μ / (d ζ_d))^(1/d)` scaled by `multiplier`.
pub fn batch_gamma(measure: f64, d: usize, multiplier: f64) -> f64 {
    multiplier * 2.0 * (measure / (d as f64 * unit_ball_volume(d))).powf(1.0 / d as f64)
}

/// Incremental-planner constant `2 (1 + 1/d)^(1/d) (μ / ζ_d)^(1/d)` scaled by `multiplier`.
pub fn incremental_gamma(measure: f64, d: usize, multiplier: f64) -> f64 {
    let df = d as f64;
    multiplier * 2.0 * (1.0 + 1.0 / df).powf(1.0 / df) * (measure / unit_ball_volume(d)).powf(1.0 / df)
}

/// Vertex store, node arena, edge cache and work counters.
#[derive(Debug, Clone)]
pub struct Graph {
    workspace: Workspace,
    steering: Steering,
    resolution: f64,
    tolerance: f64,
    vertices: Vec<Vertex>,
    nodes: Vec<Node>,
    edges: Vec<CachedEdge>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    tree_out: Vec<Vec<EdgeId>>,
    index: GridIndex,
    metrics: Metrics,
}

impl Graph {
    /// `resolution` is the arc discretization step; `tolerance` the signature
    /// quantization step; `expected_vertices` sizes the spatial index.
    pub fn new(
        workspace: Workspace,
        steering: Steering,
        resolution: f64,
        tolerance: f64,
        expected_vertices: usize,
    ) -> Self {
        let index = GridIndex::new(workspace.bounds(), expected_vertices);
        Self {
            workspace,
            steering,
            resolution,
            tolerance,
            vertices: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            edge_index: HashMap::new(),
            tree_out: Vec::new(),
            index,
            metrics: Metrics::default(),
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn steering(&self) -> &Steering {
        &self.steering
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.0]
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut Node {
        &mut self.nodes[n.0]
    }

    pub fn edge(&self, e: EdgeId) -> &CachedEdge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[CachedEdge] {
        &self.edges
    }

    pub fn position(&self, v: VertexId) -> Point2 {
        self.vertices[v.0].state.position
    }

    pub fn node_at(&self, v: VertexId, key: &HKey) -> Option<NodeId> {
        self.vertices[v.0].nodes.get(key).copied()
    }

    pub fn key(&self, h: &HSig) -> HKey {
        quantize_key(h, self.tolerance)
    }

    pub fn add_vertex(&mut self, x: State) -> Result<VertexId, GraphError> {
        if point_in_obstacle(x.position, &self.workspace) || !self.workspace.bounds().contains(x.position) {
            return Err(GraphError::NotFree(x));
        }
        if let Some(dup) = self.find_vertex(&x) {
            return Err(GraphError::DuplicateVertex(x, dup.0));
        }
        let id = VertexId(self.vertices.len());
        self.vertices.push(Vertex { id, state: x, nodes: BTreeMap::new() });
        self.tree_out.push(Vec::new());
        self.index.insert(x.position, id);
        self.metrics.vertex_count += 1;
        Ok(id)
    }

    /// Creates the zero-signature, zero-cost root node at `v`.
    pub fn insert_root(&mut self, v: VertexId) -> NodeId {
        let hsig = HSig::zeros(self.workspace.obstacle_count());
        match self.append_node(v, hsig, 0.0, None) {
            AppendOutcome::Inserted(n) => n,
            other => panic!("root insertion failed: {other:?}"),
        }
    }

    fn compute_edge(&mut self, from: VertexId, to: VertexId, steer: SteerResult) -> EdgeId {
        let poly = steer.polyline(self.resolution);
        // A polyline through a representative point crosses its obstacle.
        let (hsig_increment, collision, degenerate) = match polyline_hsig(&poly, &self.workspace) {
            Ok(h) => (h, CollisionStatus::Unknown, false),
            Err(_) => (HSig::zeros(self.workspace.obstacle_count()), CollisionStatus::Blocked, true),
        };
        let id = EdgeId(self.edges.len());
        self.edges.push(CachedEdge { from, to, steer, hsig_increment, collision, degenerate });
        self.edge_index.insert((from, to), id);
        self.metrics.edges_computed += 1;
        id
    }

    /// Cached edge `from → to`, computing it on first request.
    pub fn edge_between(&mut self, from: VertexId, to: VertexId) -> EdgeId {
        if let Some(&e) = self.edge_index.get(&(from, to)) {
            return e;
        }
        let steer = self.steering.connect(&self.vertices[from.0].state, &self.vertices[to.0].state);
        self.compute_edge(from, to, steer)
    }

    /// Registers a steering result already computed by the caller as the
    /// cached edge between two vertices.
    pub fn insert_edge(&mut self, from: VertexId, to: VertexId, steer: SteerResult) -> EdgeId {
        if let Some(&e) = self.edge_index.get(&(from, to)) {
            return e;
        }
        self.compute_edge(from, to, steer)
    }

    /// Evaluates a trajectory that does not yet have a target vertex: counts
    /// one edge computation and one collision check, and returns the
    /// signature increment when the trajectory is collision-free.
    pub fn probe_edge(&mut self, steer: &SteerResult) -> Option<HSig> {
        self.metrics.edges_computed += 1;
        self.metrics.collision_checks += 1;
        let poly = steer.polyline(self.resolution);
        if !polyline_collision_free(&poly, &self.workspace) {
            return None;
        }
        polyline_hsig(&poly, &self.workspace).ok()
    }

    /// Registers an edge already evaluated by [`Graph::probe_edge`] as free.
    pub fn insert_probed_edge(&mut self, from: VertexId, to: VertexId, steer: SteerResult, inc: HSig) -> EdgeId {
        let id = EdgeId(self.edges.len());
        self.edges.push(CachedEdge {
            from,
            to,
            steer,
            hsig_increment: inc,
            collision: CollisionStatus::Free,
            degenerate: false,
        });
        self.edge_index.insert((from, to), id);
        id
    }

    /// Existing vertex coinciding with `x`, if any.
    pub fn find_vertex(&self, x: &State) -> Option<VertexId> {
        let mut near = Vec::new();
        self.index.candidates_within(x.position, 1e-12, &mut near);
        near.into_iter().find(|&v| self.vertices[v.0].state.coincides(x))
    }

    pub fn cached_edge(&self, from: VertexId, to: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(from, to)).copied()
    }

    fn near(&mut self, center: VertexId, r: f64, forward: bool) -> Vec<Neighbor> {
        assert!(r > 0.0, "radius must be positive");
        let p = self.position(center);
        let mut cand = Vec::new();
        self.index.candidates_within(p, r, &mut cand);
        cand.sort_unstable();
        let mut out = Vec::new();
        for v in cand {
            if v == center || self.steering.lower_bound(p, self.position(v)) > r {
                continue;
            }
            let e = if forward { self.edge_between(center, v) } else { self.edge_between(v, center) };
            let cost = self.edges[e.0].cost();
            if cost <= r {
                out.push(Neighbor { vertex: v, edge: e, cost });
            }
        }
        out
    }

    /// Vertices reachable from `x` within cost `r`, with the edges `x → v`.
    pub fn near_forward(&mut self, x: VertexId, r: f64) -> Vec<Neighbor> {
        self.near(x, r, true)
    }

    /// Vertices that reach `x` within cost `r`, with the edges `v → x`.
    pub fn near_backward(&mut self, x: VertexId, r: f64) -> Vec<Neighbor> {
        self.near(x, r, false)
    }

    /// Vertex minimizing the steering cost from it to `x`.
    pub fn nearest(&self, x: &State) -> Option<VertexId> {
        let mut best: Option<(f64, VertexId)> = None;
        self.index.ring_search(x.position, |v| {
            let s = &self.vertices[v.0].state;
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            if self.steering.lower_bound(s.position, x.position) <= bound {
                let c = self.steering.cost(s, x);
                if best.is_none_or(|b| (c, v) < b) {
                    best = Some((c, v));
                }
            }
            best.map_or(f64::INFINITY, |b| b.0)
        });
        best.map(|b| b.1)
    }

    /// Resolves and memoizes the collision status of an edge. Returns true when free.
    pub fn check_collision(&mut self, e: EdgeId) -> bool {
        let edge = &self.edges[e.0];
        match edge.collision {
            CollisionStatus::Free => true,
            CollisionStatus::Blocked => false,
            CollisionStatus::Unknown => {
                let poly = edge.steer.polyline(self.resolution);
                let free = polyline_collision_free(&poly, &self.workspace);
                self.edges[e.0].collision = if free { CollisionStatus::Free } else { CollisionStatus::Blocked };
                self.metrics.collision_checks += 1;
                free
            }
        }
    }

    /// Adds a collision-free edge to the planner's edge set E (idempotent).
    pub fn add_to_edge_set(&mut self, e: EdgeId) {
        debug_assert_eq!(self.edges[e.0].collision, CollisionStatus::Free);
        let from = self.edges[e.0].from;
        if !self.tree_out[from.0].contains(&e) {
            self.tree_out[from.0].push(e);
        }
    }

    /// Outgoing edges of `v` that belong to E.
    pub fn edge_set_out(&self, v: VertexId) -> &[EdgeId] {
        &self.tree_out[v.0]
    }

    /// Every edge in E.
    pub fn edge_set(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.tree_out.iter().flatten().copied()
    }

    /// Offers a node to `v`: inserted if its class is new there, replaces the
    /// incumbent if strictly cheaper by more than [`COST_EPS`], dominated otherwise.
    pub fn append_node(&mut self, v: VertexId, hsig: HSig, cost: f64, parent: Option<NodeId>) -> AppendOutcome {
        let key = self.key(&hsig);
        if let Some(&existing) = self.vertices[v.0].nodes.get(&key) {
            let node = &mut self.nodes[existing.0];
            if cost < node.cost - COST_EPS {
                node.cost = cost;
                node.hsig = hsig;
                node.parent = parent;
                return AppendOutcome::Improved(existing);
            }
            return AppendOutcome::Dominated;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { hsig, key: key.clone(), cost, parent, vertex: v, status: NodeStatus::Closed });
        self.vertices[v.0].nodes.insert(key, id);
        self.metrics.node_count += 1;
        AppendOutcome::Inserted(id)
    }

    /// Node ids from the root down to `n`.
    pub fn path_to_root(&self, n: NodeId) -> Vec<NodeId> {
        let mut path = vec![n];
        let mut cur = n;
        while let Some(p) = self.nodes[cur.0].parent {
            path.push(p);
            cur = p;
            assert!(path.len() <= self.nodes.len(), "parent cycle at node {}", n.0);
        }
        path.reverse();
        path
    }

    pub fn snapshot(&self, iteration: u64, best_costs: Vec<(HKey, f64)>) -> MetricsSnapshot {
        MetricsSnapshot { iteration, metrics: self.metrics, best_costs }
    }
}
