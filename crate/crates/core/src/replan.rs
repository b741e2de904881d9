//! Fast replanning against a newly observed obstacle, using only the stored
//! class paths of a previous run.

use crate::geometry::{GeometryError, Polygon};
use crate::homology::{polyline_hsig_points, quantize_key, segment_hsig_points};
use crate::result::{PlanResult, ReplanReport, ResultError};
use crate::scenario::ObstacleSpec;
use crate::steering::steer_calls;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReplanError {
    #[error("prior result has no classes")]
    EmptyPrior,
    #[error("new obstacle: {0}")]
    Obstacle(#[from] GeometryError),
    #[error(transparent)]
    Result(#[from] ResultError),
}

/// Extends every class signature by the new obstacle's component, marks
/// classes whose path touches it (or leaves the allowed set) infeasible, and
/// re-sorts. Each trace segment is checked against the new obstacle only,
/// stopping at the first hit. No trajectories are recomputed.
///
/// The returned result may have no feasible class; see [`PlanResult::is_feasible`].
pub fn replan(prior: &PlanResult, obstacle: &ObstacleSpec) -> Result<PlanResult, ReplanError> {
    if prior.classes.is_empty() {
        return Err(ReplanError::EmptyPrior);
    }
    let calls_before = steer_calls();
    let poly = Polygon::new(obstacle.vertices.clone())?;
    let w = prior
        .scenario
        .workspace()
        .map_err(ResultError::from)?
        .with_obstacle(poly.clone(), obstacle.representative_point)?;
    let zeta = [*w.representatives().last().expect("just added")];

    let mut out = prior.clone();
    out.scenario.obstacles.push(obstacle.clone());
    // old blocked signatures keep meaning "this class, not wound around the new obstacle"
    for b in &mut out.scenario.policy.blocked {
        b.0.push(0.0);
    }
    let policy = out.scenario.policy();
    let goal_rep = out.scenario.goal.representative_point.unwrap_or(out.scenario.goal.center);

    let mut checks = 0u64;
    let mut segments = 0usize;
    let mut invalidated = 0usize;
    for c in &mut out.classes {
        segments += c.trace.len().saturating_sub(1);
        let comps = polyline_hsig_points(&c.trace, &zeta).and_then(|end| {
            let tail = segment_hsig_points(*c.trace.last().expect("non-empty trace"), goal_rep, &zeta)?;
            Ok((end.0[0], end.0[0] + tail.0[0]))
        });
        let (end, closed) = comps.clone().unwrap_or((0.0, 0.0));
        c.end_signature.0.push(end);
        c.signature.0.push(closed);
        c.key = quantize_key(&c.signature, policy.tolerance);
        if !c.feasible {
            continue;
        }
        let mut hit = comps.is_err();
        for s in c.trace.windows(2) {
            if hit {
                break;
            }
            checks += 1;
            hit = poly.intersects_segment(s[0], s[1]);
        }
        if hit || !policy.is_allowed(&c.signature) {
            c.feasible = false;
            invalidated += 1;
        }
    }
    out.classes
        .sort_by(|a, b| b.feasible.cmp(&a.feasible).then(a.cost.total_cmp(&b.cost)).then_with(|| a.key.cmp(&b.key)));
    out.replan = Some(ReplanReport {
        obstacle: obstacle.clone(),
        invalidated,
        path_segments: segments,
        collision_checks: checks,
        steer_calls: steer_calls() - calls_before,
    });
    Ok(out)
}
