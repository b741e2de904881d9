use crate::homology::HKey;
use serde::{Deserialize, Serialize};

/// Work counters of one planning run. All of them only grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub edges_computed: u64,
    pub collision_checks: u64,
    pub node_count: u64,
    pub vertex_count: u64,
}

/// Counters plus the best goal cost per discovered class after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub iteration: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub best_costs: Vec<(HKey, f64)>,
}

impl MetricsSnapshot {
    pub fn best_cost(&self, key: &HKey) -> Option<f64> {
        self.best_costs.iter().find(|(k, _)| k == key).map(|(_, c)| *c)
    }
}
