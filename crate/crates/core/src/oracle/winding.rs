use super::OracleError;
use crate::geometry::{point_on_segment, Point2};

const PERTURB: f64 = 1e-9;

/// Winding number of a closed polyline around `zeta`, counted as signed
/// crossings of a ray from `zeta`. A ray through a trace vertex is rotated by
/// a tiny angle and the count retried.
pub fn crossing_winding(trace: &[Point2], zeta: Point2) -> Result<i64, OracleError> {
    if trace.len() < 2 || trace[0].distance(trace[trace.len() - 1]) > 1e-9 {
        return Err(OracleError::NotClosed);
    }
    if trace.windows(2).any(|s| point_on_segment(zeta, s[0], s[1])) {
        return Err(OracleError::OnTrace(zeta));
    }
    let mut theta = 0.0f64;
    loop {
        let (sin, cos) = theta.sin_cos();
        // coordinates in a frame whose x axis is the ray
        let local: Vec<(f64, f64)> = trace
            .iter()
            .map(|&q| {
                let d = q - zeta;
                (d.x * cos + d.y * sin, -d.x * sin + d.y * cos)
            })
            .collect();
        if local.iter().any(|&(x, y)| y == 0.0 && x > 0.0) {
            theta += PERTURB;
            continue;
        }
        let mut w = 0i64;
        for s in local.windows(2) {
            let ((ax, ay), (bx, by)) = (s[0], s[1]);
            if (ay < 0.0) == (by < 0.0) {
                continue;
            }
            let x = ax + (0.0 - ay) * (bx - ax) / (by - ay);
            if x > 0.0 {
                w += if by > ay { 1 } else { -1 };
            }
        }
        return Ok(w);
    }
}
