//! Incremental anytime planner: grow the graph one steered vertex at a time,
//! connect it to its backward neighbors and push every improvement through
//! the collision-free edge set with a uniform-cost queue.

use crate::geometry::point_in_obstacle;
use crate::graph::{incremental_gamma, radius, state_space_measure, Graph, Neighbor, NodeId, VertexId, COST_EPS};
use crate::homology::{HKey, HSig, SignaturePolicy};
use crate::problem::{GoalEntry, PlanError, PlanOutput, Problem, Termination};
use crate::steering::State;
use log::{debug, info};
use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::time::{Duration, Instant};

/// Iteration bounds. At least one must be finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationBudget {
    pub max_iterations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<Duration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_on_classes: Option<usize>,
}

impl IterationBudget {
    pub fn iterations(n: u64) -> Self {
        Self { max_iterations: n, time_limit: None, stop_on_classes: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrhtConfig {
    pub budget: IterationBudget,
    pub gamma_multiplier: f64,
    /// One-step limit; defaults to 10% of the bounds diagonal.
    pub eta: Option<f64>,
    pub seed: u64,
}

impl Default for RrhtConfig {
    fn default() -> Self {
        Self { budget: IterationBudget::iterations(1000), gamma_multiplier: 1.0, eta: None, seed: 0 }
    }
}

type QueueKey = Reverse<(OrderedFloat<f64>, VertexId, HKey, NodeId)>;

/// Min-cost queue holding at most one live entry per node; re-inserting a
/// node supersedes its previous entry.
#[derive(Debug, Default)]
pub struct RewireQueue {
    heap: BinaryHeap<QueueKey>,
    live: HashMap<NodeId, f64>,
}

impl RewireQueue {
    pub fn insert(&mut self, g: &Graph, n: NodeId) {
        let node = g.node(n);
        self.live.insert(n, node.cost);
        self.heap.push(Reverse((OrderedFloat(node.cost), node.vertex, node.key.clone(), n)));
    }

    pub fn pop(&mut self) -> Option<NodeId> {
        while let Some(Reverse((c, _, _, n))) = self.heap.pop() {
            if self.live.get(&n) == Some(&c.0) {
                self.live.remove(&n);
                return Some(n);
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }
}

/// A node candidate produced by pushing a node through an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub hsig: HSig,
    pub cost: f64,
    pub parent: NodeId,
}

/// Pushes each node through an edge with the given increment and cost,
/// dropping disallowed signatures.
pub fn propagate_edge(g: &Graph, nodes: &[NodeId], inc: &HSig, cost: f64, policy: &SignaturePolicy) -> Vec<Propagated> {
    nodes
        .iter()
        .filter_map(|&n| {
            let node = g.node(n);
            let hsig = &node.hsig + inc;
            policy.is_allowed(&hsig).then_some(Propagated { hsig, cost: node.cost + cost, parent: n })
        })
        .collect()
}

fn nodes_at(g: &Graph, v: VertexId) -> Vec<NodeId> {
    g.vertex(v).nodes.values().copied().collect()
}

/// Incremental planner state; exposed so a vertex sequence can be replayed.
pub struct Rrht<'a> {
    problem: &'a Problem,
    gamma: f64,
    eta: f64,
    graph: Graph,
    root: NodeId,
    touched: Vec<NodeId>,
    goal_tails: HashMap<VertexId, Option<HSig>>,
    goals: BTreeMap<HKey, GoalEntry>,
}

impl<'a> Rrht<'a> {
    pub fn new(problem: &'a Problem, cfg: &RrhtConfig, expected_vertices: usize) -> Result<Self, PlanError> {
        problem.validate()?;
        let eta = cfg.eta.unwrap_or(0.1 * problem.workspace.bounds().diagonal());
        if !(eta > 0.0) {
            return Err(PlanError::Invalid("eta must be positive".into()));
        }
        let d = problem.steering.system.dimension();
        let gamma = incremental_gamma(state_space_measure(&problem.workspace, d), d, cfg.gamma_multiplier);
        let mut graph = problem.new_graph(expected_vertices);
        let root_v = graph.add_vertex(problem.start)?;
        let root = graph.insert_root(root_v);
        let mut s = Self {
            problem,
            gamma,
            eta,
            graph,
            root,
            touched: vec![root],
            goal_tails: HashMap::new(),
            goals: BTreeMap::new(),
        };
        s.update_goals();
        Ok(s)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn goals(&self) -> impl Iterator<Item = &GoalEntry> {
        self.goals.values()
    }

    /// Current connection radius.
    pub fn radius(&self) -> f64 {
        let n = self.graph.vertex_count() as f64;
        if n < 2.0 {
            return self.eta;
        }
        radius(n, self.gamma, self.problem.steering.system.dimension()).expect("n >= 2").min(self.eta)
    }

    fn append(&mut self, v: VertexId, c: Propagated) -> Option<NodeId> {
        let n = self.graph.append_node(v, c.hsig, c.cost, Some(c.parent)).accepted()?;
        self.touched.push(n);
        Some(n)
    }

    /// Nearest vertex, steered toward `x_rand`; returns the new vertex when
    /// it is free, new, reachable by a free edge and carries at least one
    /// allowed node.
    pub fn extend(&mut self, x_rand: &State) -> Option<VertexId> {
        let nearest = self.graph.nearest(x_rand).expect("graph has a root");
        let from = self.graph.vertex(nearest).state;
        let steer = self.problem.steering.steer(&from, x_rand, self.eta);
        let x_new = steer.end_state;
        if !self.problem.workspace.bounds().contains(x_new.position)
            || point_in_obstacle(x_new.position, &self.problem.workspace)
            || self.graph.find_vertex(&x_new).is_some()
        {
            return None;
        }
        let inc = self.graph.probe_edge(&steer)?;
        let cands =
            propagate_edge(&self.graph, &nodes_at(&self.graph, nearest), &inc, steer.cost, &self.problem.policy);
        if cands.is_empty() {
            return None;
        }
        let v_new = self.graph.add_vertex(x_new).ok()?;
        let e = self.graph.insert_probed_edge(nearest, v_new, steer, inc);
        self.graph.add_to_edge_set(e);
        for c in cands {
            self.append(v_new, c);
        }
        Some(v_new)
    }

    /// Offers every node of each free backward neighbor to `v_new`.
    pub fn choose_parent(&mut self, v_new: VertexId, backward: &[Neighbor]) {
        for nb in backward {
            if !self.graph.check_collision(nb.edge) {
                continue;
            }
            self.graph.add_to_edge_set(nb.edge);
            let e = self.graph.edge(nb.edge);
            let (inc, cost) = (e.hsig_increment.clone(), e.cost());
            let cands =
                propagate_edge(&self.graph, &nodes_at(&self.graph, nb.vertex), &inc, cost, &self.problem.policy);
            for c in cands {
                self.append(v_new, c);
            }
        }
    }

    /// Adds the free forward edges, then runs the uniform-cost search from
    /// the nodes of `v_new` over the whole edge set until no node improves.
    pub fn rewire(&mut self, v_new: VertexId, forward: &[Neighbor]) {
        for nb in forward {
            if self.graph.check_collision(nb.edge) {
                self.graph.add_to_edge_set(nb.edge);
            }
        }
        let mut q = RewireQueue::default();
        for n in nodes_at(&self.graph, v_new) {
            q.insert(&self.graph, n);
        }
        while let Some(n) = q.pop() {
            let v = self.graph.node(n).vertex;
            let out: Vec<_> = self.graph.edge_set_out(v).to_vec();
            for e in out {
                let edge = self.graph.edge(e);
                let (to, inc, cost) = (edge.to, edge.hsig_increment.clone(), edge.cost());
                let cands = propagate_edge(&self.graph, &[n], &inc, cost, &self.problem.policy);
                for c in cands {
                    if let Some(m) = self.append(to, c) {
                        q.insert(&self.graph, m);
                    }
                }
            }
        }
    }

    /// Inserts a state through extend, choose-parent and rewire.
    pub fn insert(&mut self, x_rand: &State) -> Option<VertexId> {
        let v_new = self.extend(x_rand)?;
        let r = self.radius();
        let backward = self.graph.near_backward(v_new, r);
        let forward = self.graph.near_forward(v_new, r);
        self.choose_parent(v_new, &backward);
        self.rewire(v_new, &forward);
        self.update_goals();
        Some(v_new)
    }

    fn goal_tail(&mut self, v: VertexId) -> Option<HSig> {
        if let Some(t) = self.goal_tails.get(&v) {
            return t.clone();
        }
        let p = self.graph.position(v);
        let tail = if self.problem.goal.contains(p) {
            match crate::homology::segment_hsig(p, self.problem.goal.representative, &self.problem.workspace) {
                Ok(h) => Some(h),
                Err(e) => {
                    debug!("goal vertex {} skipped: {e}", v.0);
                    None
                }
            }
        } else {
            None
        };
        self.goal_tails.insert(v, tail.clone());
        tail
    }

    /// Re-evaluates goal incumbents for the nodes changed since the last call.
    fn update_goals(&mut self) {
        let touched = std::mem::take(&mut self.touched);
        for n in touched {
            let v = self.graph.node(n).vertex;
            let Some(tail) = self.goal_tail(v) else { continue };
            let node = self.graph.node(n);
            let goal_hsig = &node.hsig + &tail;
            if !self.problem.policy.is_allowed(&goal_hsig) {
                continue;
            }
            let key = self.problem.policy.key(&goal_hsig);
            let entry = GoalEntry { key: key.clone(), goal_hsig, node: n, vertex: v, cost: node.cost };
            match self.goals.get(&key) {
                Some(old) if old.node != n && old.cost <= entry.cost + COST_EPS => {}
                _ => {
                    self.goals.insert(key, entry);
                }
            }
        }
    }

    fn goal_costs(&self) -> Vec<(HKey, f64)> {
        self.goals.iter().map(|(k, e)| (k.clone(), e.cost)).collect()
    }

    pub fn finish(
        self,
        termination: Termination,
        snapshots: Vec<crate::graph::MetricsSnapshot>,
        first_goal_iteration: Option<u64>,
        iterations: u64,
    ) -> PlanOutput {
        let r = self.radius();
        PlanOutput {
            graph: self.graph,
            root: self.root,
            goals: self.goals.into_values().collect(),
            termination,
            rule_satisfied: true,
            snapshots,
            first_goal_iteration,
            iterations,
            radius: r,
        }
    }
}

/// Runs the incremental planner.
pub fn plan(problem: &Problem, cfg: &RrhtConfig) -> Result<PlanOutput, PlanError> {
    let budget = cfg.budget;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Rrht::new(problem, cfg, budget.max_iterations as usize + 1)?;
    let started = Instant::now();
    let mut snapshots = Vec::with_capacity(budget.max_iterations as usize);
    let mut first_goal_iteration = (!s.goals.is_empty()).then_some(0);
    let mut termination = Termination::IterationBudget;
    let mut i = 0u64;
    while i < budget.max_iterations {
        if budget.stop_on_classes.is_some_and(|k| s.goals.len() >= k) {
            termination = Termination::RuleSatisfied;
            break;
        }
        if budget.time_limit.is_some_and(|t| started.elapsed() >= t) {
            termination = Termination::TimeLimit;
            break;
        }
        i += 1;
        let x_rand = problem.sample_state(&mut rng);
        s.insert(&x_rand);
        if first_goal_iteration.is_none() && !s.goals.is_empty() {
            first_goal_iteration = Some(i);
        }
        snapshots.push(s.graph.snapshot(i, s.goal_costs()));
    }
    info!(
        "incremental search stopped ({termination:?}) after {i} iterations: {} vertices, {} classes",
        s.graph.vertex_count(),
        s.goals.len()
    );
    Ok(s.finish(termination, snapshots, first_goal_iteration, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Polygon, Rect, Workspace};
    use crate::problem::GoalRegion;
    use crate::steering::Steering;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn problem(obstacle: bool) -> Problem {
        let b = Rect::new(p(-3.0, -2.0), p(3.0, 2.0)).unwrap();
        let w = if obstacle {
            let sq = Polygon::new(vec![p(-0.5, -0.5), p(0.5, -0.5), p(0.5, 0.5), p(-0.5, 0.5)]).unwrap();
            Workspace::new(b, vec![sq], vec![None]).unwrap()
        } else {
            Workspace::empty(b)
        };
        Problem {
            workspace: w,
            steering: Steering::holonomic(),
            start: State::point(p(-2.0, 0.0)),
            goal: GoalRegion::disk(p(2.0, 0.0), 0.25),
            policy: SignaturePolicy::default(),
            resolution: 0.05,
        }
    }

    #[test]
    fn zero_iterations() {
        let out =
            plan(&problem(true), &RrhtConfig { budget: IterationBudget::iterations(0), ..Default::default() }).unwrap();
        assert!(out.goals.is_empty());
        assert_eq!(out.graph.vertex_count(), 1);
    }

    #[test]
    fn extend_truncates() {
        let mut pr = problem(false);
        pr.start = State::point(p(0.0, 0.0));
        pr.goal = GoalRegion::disk(p(2.5, 1.5), 0.25);
        let cfg = RrhtConfig { eta: Some(1.0), ..Default::default() };
        let mut s = Rrht::new(&pr, &cfg, 10).unwrap();
        let v = s.extend(&State::point(p(10.0, 0.0))).unwrap();
        assert!(s.graph().position(v).distance(p(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn extend_acceptance_rules() {
        let pr = problem(true);
        let cfg = RrhtConfig { eta: Some(1.0), ..Default::default() };
        let mut s = Rrht::new(&pr, &cfg, 10).unwrap();
        // root at (-2,0); target inside the obstacle, step ends outside it
        assert!(s.extend(&State::point(p(0.0, 0.0))).is_some());
        // a longer step ends inside the obstacle
        let mut s2 = Rrht::new(&pr, &RrhtConfig { eta: Some(1.7), ..Default::default() }, 10).unwrap();
        assert!(s2.extend(&State::point(p(0.0, 0.0))).is_none());
    }

    #[test]
    fn propagate_edge_examples() {
        let pr = problem(true);
        let mut g = pr.new_graph(10);
        let a = g.add_vertex(State::point(p(-2.0, 1.0))).unwrap();
        let n1 = g.append_node(a, HSig(vec![0.4]), 2.0, None).accepted().unwrap();
        let n2 = g.append_node(a, HSig(vec![-0.6]), 5.0, None).accepted().unwrap();
        let out = propagate_edge(&g, &[n1], &HSig(vec![0.3]), 1.0, &pr.policy);
        assert_eq!(out.len(), 1);
        assert!((out[0].hsig.0[0] - 0.7).abs() < 1e-12 && out[0].cost == 3.0 && out[0].parent == n1);
        let n3 = g.append_node(a, HSig(vec![0.9]), 2.0, None).accepted().unwrap();
        assert!(propagate_edge(&g, &[n3], &HSig(vec![0.3]), 1.0, &pr.policy).is_empty());
        assert_eq!(propagate_edge(&g, &[n1, n2], &HSig(vec![0.1]), 1.0, &pr.policy).len(), 2);
    }

    #[test]
    fn anytime_monotone_and_finds_both_classes() {
        let pr = problem(true);
        let cfg = RrhtConfig { budget: IterationBudget::iterations(1000), seed: 4, ..Default::default() };
        let out = plan(&pr, &cfg).unwrap();
        assert!(out.goals.len() >= 2, "{}", out.goals.len());
        let mut best: BTreeMap<HKey, f64> = BTreeMap::new();
        for snap in &out.snapshots {
            for (k, c) in &snap.best_costs {
                if let Some(prev) = best.get(k) {
                    assert!(*c <= *prev + 1e-12);
                }
                best.insert(k.clone(), *c);
            }
        }
        // dominance soundness and tree consistency
        for v in out.graph.vertices() {
            for (k, &n) in &v.nodes {
                assert_eq!(&out.graph.node(n).key, k);
                let node = out.graph.node(n);
                if let Some(par) = node.parent {
                    let pn = out.graph.node(par);
                    let e = out.graph.edge(out.graph.cached_edge(pn.vertex, node.vertex).unwrap());
                    assert!((pn.cost + e.cost() - node.cost).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn voronoi_bias_spreads() {
        let b = Rect::new(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
        let pr = Problem {
            workspace: Workspace::empty(b),
            steering: Steering::holonomic(),
            start: State::point(p(0.5, 0.5)),
            goal: GoalRegion::disk(p(0.9, 0.9), 0.05),
            policy: SignaturePolicy::default(),
            resolution: 0.05,
        };
        let out = plan(
            &pr,
            &RrhtConfig { budget: IterationBudget::iterations(500), eta: Some(0.05), seed: 2, ..Default::default() },
        )
        .unwrap();
        let xs: Vec<_> = out.graph.vertices().iter().map(|v| v.state.position).collect();
        let span = |f: fn(&Point2) -> f64| {
            xs.iter().map(f).fold(f64::MIN, f64::max) - xs.iter().map(f).fold(f64::MAX, f64::min)
        };
        assert!(span(|q| q.x) >= 0.8 && span(|q| q.y) >= 0.8);
    }
}
