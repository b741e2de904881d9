//! Batch planner: sample a fixed set of states, then grow the tree outward in
//! cost-to-arrive order over the r-disk graph, one node per (vertex, class).

use crate::geometry::sample_free;
use crate::graph::{batch_gamma, radius, state_space_measure, Graph, NodeId, NodeStatus, VertexId};
use crate::graph::{EdgeId, GraphError};
use crate::homology::{HKey, HSig, SignaturePolicy};
use crate::problem::{GoalEntry, PlanError, PlanOutput, Problem, Termination, TerminationRule};
use log::{debug, info};
use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmhtConfig {
    /// Number of free-space samples drawn besides the start.
    pub samples: usize,
    pub gamma_multiplier: f64,
    /// Only the chosen connection is collision-checked; a blocked choice
    /// defers the candidate. With `lazy = false` every neighbor edge is
    /// checked and open nodes may be re-connected more cheaply, which makes
    /// the search an exact shortest-path computation on the r-disk graph.
    pub lazy: bool,
    pub seed: u64,
    pub rule: TerminationRule,
}

impl Default for FmhtConfig {
    fn default() -> Self {
        Self { samples: 1000, gamma_multiplier: 1.1, lazy: true, seed: 0, rule: TerminationRule::class_count(2) }
    }
}

type OpenKey = Reverse<(OrderedFloat<f64>, VertexId, HKey, NodeId)>;

/// Open nodes ordered by (cost, vertex id, class key). Entries whose node
/// has since been closed or re-costed are skipped on pop.
#[derive(Debug, Default)]
pub struct OpenSet {
    heap: BinaryHeap<OpenKey>,
}

impl OpenSet {
    pub fn push(&mut self, g: &mut Graph, n: NodeId) {
        let node = g.node_mut(n);
        node.status = NodeStatus::Open;
        self.heap.push(Reverse((OrderedFloat(node.cost), node.vertex, node.key.clone(), n)));
    }

    pub fn pop(&mut self, g: &Graph) -> Option<NodeId> {
        while let Some(Reverse((c, _, _, n))) = self.heap.pop() {
            let node = g.node(n);
            if node.status == NodeStatus::Open && node.cost == c.0 {
                return Some(n);
            }
        }
        None
    }
}

/// Goal classes in discovery order, keyed by the signature closed at the
/// goal representative point.
#[derive(Debug, Clone, Default)]
pub struct GoalSet {
    pub entries: Vec<GoalEntry>,
}

impl GoalSet {
    pub fn keys(&self) -> Vec<HKey> {
        self.entries.iter().map(|e| e.key.clone()).collect()
    }

    /// Appends `z` unless its closed signature is disallowed or already
    /// present. Returns whether it was appended.
    pub fn append(&mut self, problem: &Problem, g: &Graph, z: NodeId) -> Result<bool, PlanError> {
        let goal_hsig = problem.goal_signature(g, z)?;
        if !problem.policy.is_allowed(&goal_hsig) {
            return Ok(false);
        }
        let key = problem.policy.key(&goal_hsig);
        if self.entries.iter().any(|e| e.key == key) {
            return Ok(false);
        }
        let node = g.node(z);
        self.entries.push(GoalEntry { key, goal_hsig, node: z, vertex: node.vertex, cost: node.cost });
        Ok(true)
    }
}

/// Signatures reached by pushing `hsig` along each edge, filtered by the policy.
pub fn propagate_forward(hsig: &HSig, increments: &[HSig], policy: &SignaturePolicy) -> Vec<HSig> {
    increments.iter().map(|inc| hsig + inc).filter(|h| policy.is_allowed(h)).collect()
}

struct Connection {
    total: f64,
    parent: NodeId,
    edge: EdgeId,
}

struct Search<'a> {
    problem: &'a Problem,
    lazy: bool,
    r: f64,
    g: Graph,
    open: OpenSet,
}

impl Search<'_> {
    /// Cheapest open node whose propagation into `v` lands in class `key`,
    /// ignoring obstacles in lazy mode.
    fn best_backward(&mut self, v: VertexId, key: &HKey) -> Option<Connection> {
        let mut best: Option<(f64, VertexId, HKey, Connection)> = None;
        for nb in self.g.near_backward(v, self.r) {
            if self.g.edge(nb.edge).degenerate {
                continue;
            }
            if !self.lazy && !self.g.check_collision(nb.edge) {
                continue;
            }
            let e = self.g.edge(nb.edge);
            for (ykey, &y) in &self.g.vertex(nb.vertex).nodes {
                let yn = self.g.node(y);
                if yn.status != NodeStatus::Open {
                    continue;
                }
                if &self.g.key(&(&yn.hsig + &e.hsig_increment)) != key {
                    continue;
                }
                let total = yn.cost + e.cost();
                let better = match &best {
                    None => true,
                    Some((c, bv, bk, _)) => (total, nb.vertex, ykey) < (*c, *bv, bk),
                };
                if better {
                    best = Some((total, nb.vertex, ykey.clone(), Connection { total, parent: y, edge: nb.edge }));
                }
            }
        }
        best.map(|b| b.3)
    }

    fn expand(&mut self, z: NodeId) {
        let zv = self.g.node(z).vertex;
        let zh = self.g.node(z).hsig.clone();
        let mut candidates: Vec<(VertexId, HKey)> = Vec::new();
        for nb in self.g.near_forward(zv, self.r) {
            if self.g.edge(nb.edge).degenerate {
                continue;
            }
            if !self.lazy && !self.g.check_collision(nb.edge) {
                continue;
            }
            let h = &zh + &self.g.edge(nb.edge).hsig_increment;
            if !self.problem.policy.is_allowed(&h) {
                continue;
            }
            let key = self.g.key(&h);
            match self.g.node_at(nb.vertex, &key) {
                None => candidates.push((nb.vertex, key)),
                Some(existing) if !self.lazy && self.g.node(existing).status == NodeStatus::Open => {
                    candidates.push((nb.vertex, key))
                }
                Some(_) => {}
            }
        }

        let mut opened = Vec::new();
        for (v, key) in candidates {
            let Some(conn) = self.best_backward(v, &key) else {
                continue;
            };
            if self.lazy && !self.g.check_collision(conn.edge) {
                continue;
            }
            let h = &self.g.node(conn.parent).hsig + &self.g.edge(conn.edge).hsig_increment;
            if let Some(n) = self.g.append_node(v, h, conn.total, Some(conn.parent)).accepted() {
                opened.push(n);
            }
        }
        for n in opened {
            self.open.push(&mut self.g, n);
        }
    }
}

/// Runs the batch planner on `problem`.
pub fn plan(problem: &Problem, cfg: &FmhtConfig) -> Result<PlanOutput, PlanError> {
    problem.validate()?;
    if !cfg.rule.is_set() {
        return Err(PlanError::Invalid("termination rule sets no criterion".into()));
    }
    if cfg.samples == 0 {
        return Err(PlanError::Invalid("sample count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = problem.new_graph(cfg.samples + 1);
    let root_v = g.add_vertex(problem.start)?;
    for p in sample_free(cfg.samples, &problem.workspace, &mut rng)? {
        let s = problem.with_random_heading(p, &mut rng);
        match g.add_vertex(s) {
            Ok(_) => {}
            Err(GraphError::DuplicateVertex(..)) => debug!("dropping duplicate sample {p:?}"),
            Err(e) => return Err(e.into()),
        }
    }
    search(problem, cfg, g, root_v)
}

/// Runs the search on a graph whose vertices are already in place, rooted
/// at `root_v`.
pub fn plan_on_vertices(
    problem: &Problem,
    cfg: &FmhtConfig,
    g: Graph,
    root_v: VertexId,
) -> Result<PlanOutput, PlanError> {
    problem.validate()?;
    search(problem, cfg, g, root_v)
}

fn search(problem: &Problem, cfg: &FmhtConfig, mut g: Graph, root_v: VertexId) -> Result<PlanOutput, PlanError> {
    let d = problem.steering.system.dimension();
    let gamma = batch_gamma(state_space_measure(&problem.workspace, d), d, cfg.gamma_multiplier);
    let r = radius(g.vertex_count() as f64, gamma, d)?;
    info!("batch search over {} vertices, radius {r:.4}", g.vertex_count());

    let root = g.insert_root(root_v);
    let mut s = Search { problem, lazy: cfg.lazy, r, g, open: OpenSet::default() };
    let mut goals = GoalSet::default();
    let mut snapshots = Vec::new();
    let mut first_goal_iteration = None;
    let mut iteration = 0u64;

    s.open.push(&mut s.g, root);
    let mut z = s.open.pop(&s.g).expect("root is open");
    if problem.goal.contains(s.g.position(root_v)) && goals.append(problem, &s.g, z)? {
        first_goal_iteration = Some(0);
    }

    let early_stop = |goals: &GoalSet| !cfg.rule.exhaust_open_set && cfg.rule.satisfied(&goals.keys(), &problem.policy);
    let termination = loop {
        if early_stop(&goals) {
            break Termination::RuleSatisfied;
        }
        s.expand(z);
        s.g.node_mut(z).status = NodeStatus::Closed;
        iteration += 1;
        snapshots.push(s.g.snapshot(iteration, goals.entries.iter().map(|e| (e.key.clone(), e.cost)).collect()));
        match s.open.pop(&s.g) {
            None => break Termination::OpenSetExhausted,
            Some(next) => z = next,
        }
        if problem.goal.contains(s.g.position(s.g.node(z).vertex)) && goals.append(problem, &s.g, z)? {
            debug!("goal class {} at cost {:.4}", goals.entries.last().unwrap().key, s.g.node(z).cost);
            first_goal_iteration.get_or_insert(iteration);
        }
    };
    let keys = goals.keys();
    let rule_satisfied = cfg.rule.satisfied(&keys, &problem.policy)
        || (cfg.rule.target_class_count.is_none() && cfg.rule.target_signature.is_none());
    info!("batch search stopped ({termination:?}) after {iteration} expansions with {} classes", goals.entries.len());
    Ok(PlanOutput {
        graph: s.g,
        root,
        goals: goals.entries,
        termination,
        rule_satisfied,
        snapshots,
        first_goal_iteration,
        iterations: iteration,
        radius: r,
    })
}
