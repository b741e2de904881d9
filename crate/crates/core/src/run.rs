//! Runs a scenario end to end and compares the outcome with the exact
//! per-class optimum on the same vertices.

use crate::fmht;
use crate::homology::HKey;
use crate::oracle::{augmented_dijkstra, edge_set_arcs, r_disk_arcs};
use crate::problem::{PlanError, PlanOutput};
use crate::render::{write_metrics_csv_file, write_svg, RenderError};
use crate::result::{PlanResult, ResultError};
use crate::rrht;
use crate::scenario::{Algo, Scenario, ScenarioError};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Result(#[from] ResultError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot create {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Plans with the algorithm the scenario selects.
pub fn plan(scenario: &Scenario) -> Result<PlanOutput, RunError> {
    let problem = scenario.problem()?;
    let out = match scenario.planner.algo {
        Algo::Fmht => fmht::plan(&problem, &scenario.fmht_config())?,
        Algo::Rrht => rrht::plan(&problem, &scenario.rrht_config())?,
    };
    Ok(out)
}

pub fn run(scenario: &Scenario) -> Result<(PlanResult, PlanOutput), RunError> {
    let out = plan(scenario)?;
    let result = PlanResult::from_output(scenario.clone(), &out)?;
    Ok((result, out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub key: HKey,
    pub planner: Option<f64>,
    pub oracle: Option<f64>,
    /// planner / oracle, when both exist.
    pub ratio: Option<f64>,
}

/// Per-class planner cost against the exact optimum over the planner's own
/// vertices: the r-disk graph at the final radius for the batch planner, the
/// final edge set for the incremental one.
pub fn gap(scenario: &Scenario, out: &PlanOutput) -> Result<Vec<GapRow>, RunError> {
    let problem = scenario.problem()?;
    let g = &out.graph;
    let vertices: Vec<_> = g.vertices().iter().map(|v| v.state).collect();
    let arcs = match scenario.planner.algo {
        Algo::Fmht => r_disk_arcs(&vertices, g.steering(), out.radius, g.resolution()),
        Algo::Rrht => edge_set_arcs(g),
    };
    let root = g.node(out.root).vertex.0;
    let oracle = augmented_dijkstra(&vertices, &arcs, root, &problem.workspace, &problem.policy, &problem.goal);
    let mut keys: Vec<HKey> = oracle.goals.keys().cloned().chain(out.goals.iter().map(|e| e.key.clone())).collect();
    keys.sort();
    keys.dedup();
    Ok(keys
        .into_iter()
        .map(|key| {
            let planner = out.goal(&key).map(|e| e.cost);
            let oracle = oracle.goals.get(&key).map(|&(c, _)| c);
            let ratio = match (planner, oracle) {
                (Some(p), Some(o)) if o > 0.0 => Some(p / o),
                (Some(_), Some(_)) => Some(1.0),
                _ => None,
            };
            GapRow { key, planner, oracle, ratio }
        })
        .collect())
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub result: PathBuf,
    pub metrics: PathBuf,
    pub svg: PathBuf,
}

/// Writes result.json, metrics.csv and plan.svg into `dir`.
pub fn write_outputs(result: &PlanResult, dir: &Path) -> Result<OutputFiles, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.display().to_string(), source })?;
    let files =
        OutputFiles { result: dir.join("result.json"), metrics: dir.join("metrics.csv"), svg: dir.join("plan.svg") };
    result.save(&files.result)?;
    write_metrics_csv_file(result, &files.metrics)?;
    write_svg(result, &files.svg)?;
    Ok(files)
}
