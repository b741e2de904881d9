//! Brute-force references: shortest paths over an explicit product of graph
//! vertices and signature classes, the analytic shortest path around a disk,
//! and winding numbers by ray crossing.

mod disk;
mod winding;

pub use disk::{disk_shortest, DiskPath, DiskScenario, Side};
pub use winding::crossing_winding;

use crate::geometry::{polyline_collision_free, Point2, Workspace};
use crate::graph::Graph;
use crate::homology::{polyline_hsig, quantize_key, segment_hsig, HKey, HSig, SignaturePolicy};
use crate::problem::GoalRegion;
use crate::steering::{State, Steering};
use ordered_float::OrderedFloat;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point {0:?} lies on the trace")]
    OnTrace(Point2),
    #[error("trace is not closed")]
    NotClosed,
    #[error("start or goal lies inside the disk")]
    InsideDisk,
}

/// A directed trajectory between two vertices, as the oracle sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub polyline: Vec<Point2>,
}

/// Every ordered pair whose obstacle-free steering cost is at most `r`.
pub fn r_disk_arcs(vertices: &[State], steering: &Steering, r: f64, resolution: f64) -> Vec<Arc> {
    let mut arcs = Vec::new();
    for (i, a) in vertices.iter().enumerate() {
        for (j, b) in vertices.iter().enumerate() {
            if i == j || steering.cost(a, b) > r {
                continue;
            }
            let s = steering.connect(a, b);
            arcs.push(Arc { from: i, to: j, cost: s.cost, polyline: s.polyline(resolution) });
        }
    }
    arcs
}

/// The arcs of a planner's collision-free edge set.
pub fn edge_set_arcs(g: &Graph) -> Vec<Arc> {
    g.edge_set()
        .map(|e| {
            let e = g.edge(e);
            Arc { from: e.from.0, to: e.to.0, cost: e.cost(), polyline: e.steer.polyline(g.resolution()) }
        })
        .collect()
}

/// Explicit product graph over (vertex, class key) states reachable from
/// (root, zero signature) through collision-free arcs with allowed signatures.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    pub states: Vec<(usize, HKey)>,
    pub hsigs: Vec<HSig>,
    /// (from state, to state, cost)
    pub arcs: Vec<(usize, usize, f64)>,
    pub root: usize,
}

impl AugmentedGraph {
    pub fn build(vertex_count: usize, arcs: &[Arc], root: usize, w: &Workspace, policy: &SignaturePolicy) -> Self {
        // resolve each geometric arc once
        let mut out: Vec<Vec<(usize, f64, HSig)>> = vec![Vec::new(); vertex_count];
        for a in arcs {
            if !polyline_collision_free(&a.polyline, w) {
                continue;
            }
            let Ok(inc) = polyline_hsig(&a.polyline, w) else { continue };
            out[a.from].push((a.to, a.cost, inc));
        }
        let zero = HSig::zeros(w.obstacle_count());
        let mut index: HashMap<(usize, HKey), usize> = HashMap::new();
        let mut states = vec![(root, quantize_key(&zero, policy.tolerance))];
        let mut hsigs = vec![zero];
        index.insert(states[0].clone(), 0);
        let mut product_arcs = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let (v, _) = states[s].clone();
            for (to, cost, inc) in &out[v] {
                let h = &hsigs[s] + inc;
                if !policy.is_allowed(&h) {
                    continue;
                }
                let key = (*to, quantize_key(&h, policy.tolerance));
                let t = match index.get(&key) {
                    Some(&t) => t,
                    None => {
                        let t = states.len();
                        states.push(key.clone());
                        hsigs.push(h);
                        index.insert(key, t);
                        queue.push_back(t);
                        t
                    }
                };
                product_arcs.push((s, t, *cost));
            }
        }
        Self { states, hsigs, arcs: product_arcs, root: 0 }
    }

    /// Shortest cost to every product state.
    pub fn distances(&self) -> Vec<f64> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.states.len()];
        for &(s, t, c) in &self.arcs {
            adj[s].push((t, c));
        }
        let mut dist = vec![f64::INFINITY; self.states.len()];
        dist[self.root] = 0.0;
        let mut heap = BinaryHeap::from([Reverse((OrderedFloat(0.0), self.root))]);
        while let Some(Reverse((d, s))) = heap.pop() {
            if d.0 > dist[s] {
                continue;
            }
            for &(t, c) in &adj[s] {
                let nd = d.0 + c;
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(Reverse((OrderedFloat(nd), t)));
                }
            }
        }
        dist
    }
}

/// Costs computed by [`augmented_dijkstra`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleCosts {
    /// Per (vertex index, class key) shortest cost.
    pub nodes: BTreeMap<(usize, HKey), f64>,
    /// Per goal class (signature closed at the goal representative point)
    /// the cheapest cost to a goal-region vertex, and that vertex.
    pub goals: BTreeMap<HKey, (f64, usize)>,
}

/// Exact per-class shortest costs on the given arcs.
pub fn augmented_dijkstra(
    vertices: &[State],
    arcs: &[Arc],
    root: usize,
    w: &Workspace,
    policy: &SignaturePolicy,
    goal: &GoalRegion,
) -> OracleCosts {
    let ag = AugmentedGraph::build(vertices.len(), arcs, root, w, policy);
    let dist = ag.distances();
    let mut out = OracleCosts::default();
    for (s, (v, key)) in ag.states.iter().enumerate() {
        if !dist[s].is_finite() {
            continue;
        }
        out.nodes.insert((*v, key.clone()), dist[s]);
        let p = vertices[*v].position;
        if !goal.contains(p) {
            continue;
        }
        let Ok(tail) = segment_hsig(p, goal.representative, w) else { continue };
        let gh = &ag.hsigs[s] + &tail;
        if !policy.is_allowed(&gh) {
            continue;
        }
        let gk = quantize_key(&gh, policy.tolerance);
        let e = out.goals.entry(gk).or_insert((f64::INFINITY, usize::MAX));
        if (dist[s], *v) < *e {
            *e = (dist[s], *v);
        }
    }
    out
}
