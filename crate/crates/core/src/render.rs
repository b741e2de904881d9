//! SVG drawing of a result and CSV export of its metric snapshots.

use crate::geometry::Point2;
use crate::homology::{segment_hsig_points, HKey};
use crate::result::PlanResult;
use crate::steering::{State, Steering, System};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
}

const WIDTH_PX: f64 = 800.0;
const MARGIN_PX: f64 = 20.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"];

struct View {
    min: Point2,
    max_y: f64,
    scale: f64,
}

impl View {
    fn x(&self, p: Point2) -> f64 {
        MARGIN_PX + (p.x - self.min.x) * self.scale
    }
    fn y(&self, p: Point2) -> f64 {
        MARGIN_PX + (self.max_y - p.y) * self.scale
    }
    fn points(&self, pts: &[Point2]) -> String {
        let mut s = String::new();
        for (i, &p) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", self.x(p), self.y(p));
        }
        s
    }
}

fn edge_polyline(steering: &Steering, a: &State, b: &State, resolution: f64) -> Vec<Point2> {
    match steering.system {
        System::Holonomic => vec![a.position, b.position],
        System::Dubins => steering.connect(a, b).polyline(resolution),
    }
}

fn color(layers: &[Vec<i64>], layer: &[i64]) -> &'static str {
    layers.iter().position(|l| l == layer).map_or("#444444", |i| PALETTE[i % PALETTE.len()])
}

/// Draws obstacles, graph edges in gray, tree edges colored by winding layer,
/// the class paths in bold and a legend of class signatures.
pub fn render_svg(result: &PlanResult) -> Result<String, RenderError> {
    let s = &result.scenario;
    let w = s.workspace()?;
    let b = w.bounds();
    let scale = (WIDTH_PX - 2.0 * MARGIN_PX) / b.width();
    let view = View { min: b.min, max_y: b.max.y, scale };
    let height = b.height() * scale + 2.0 * MARGIN_PX;
    let steering = s.steering();
    let res = s.planner.trace_resolution;
    let verts = &result.render.vertices;

    let start = s.start.position;
    let class_layer = |trace: &[Point2]| -> Option<Vec<i64>> {
        let end = *trace.last()?;
        let path = crate::homology::polyline_hsig_points(trace, w.representatives()).ok()?;
        let straight = segment_hsig_points(start, end, w.representatives()).ok()?;
        Some(path.0.iter().zip(&straight.0).map(|(a, b)| (a - b).round() as i64).collect())
    };
    let class_layers: Vec<Option<Vec<i64>>> = result.classes.iter().map(|c| class_layer(&c.trace)).collect();
    let layers: Vec<Vec<i64>> = result
        .render
        .tree_edges
        .iter()
        .filter_map(|e| e.layer.clone())
        .chain(class_layers.iter().flatten().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH_PX:.0}" height="{height:.0}" viewBox="0 0 {WIDTH_PX:.0} {height:.0}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black"/>"#,
        view.x(b.min),
        view.y(b.max),
        b.width() * scale,
        b.height() * scale
    );

    out.push_str("<g id=\"obstacles\" fill=\"#555555\">\n");
    for (poly, zeta) in w.obstacles().iter().zip(w.representatives()) {
        let _ = writeln!(out, r#"<polygon points="{}"/>"#, view.points(poly.vertices()));
        let _ =
            writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#ffffff"/>"##, view.x(*zeta), view.y(*zeta));
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"graph\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.5\">\n");
    for [a, b] in &result.render.graph_edges {
        let pts = edge_polyline(&steering, &verts[*a], &verts[*b], res);
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, view.points(&pts));
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"trees\" fill=\"none\" stroke-width=\"1\">\n");
    for e in &result.render.tree_edges {
        let c = e.layer.as_deref().map_or("#444444", |l| color(&layers, l));
        let pts = edge_polyline(&steering, &verts[e.from], &verts[e.to], res);
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{c}"/>"#, view.points(&pts));
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"paths\" fill=\"none\" stroke-width=\"3\">\n");
    for (c, l) in result.classes.iter().zip(&class_layers) {
        let col = l.as_deref().map_or("#000000", |l| color(&layers, l));
        let dash = if c.feasible { "" } else { r#" stroke-dasharray="6,4""# };
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{col}"{dash}/>"#, view.points(&c.trace));
    }
    out.push_str("</g>\n");

    let g = &s.goal;
    let _ = writeln!(
        out,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#2ca02c" stroke-width="2"/>"##,
        view.x(g.center),
        view.y(g.center),
        g.radius * scale
    );
    let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, view.x(start), view.y(start));

    out.push_str("<g id=\"legend\" font-family=\"monospace\" font-size=\"12\">\n");
    for (i, (c, l)) in result.classes.iter().zip(&class_layers).enumerate() {
        let col = l.as_deref().map_or("#000000", |l| color(&layers, l));
        let sig: Vec<String> = c.signature.0.iter().map(|v| format!("{v:.3}")).collect();
        let y = MARGIN_PX + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{y:.0}" fill="{col}">h=[{}] cost={:.3}{}</text>"#,
            MARGIN_PX + 6.0,
            sig.join(", "),
            c.cost,
            if c.feasible { "" } else { " (blocked)" }
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn write_svg(result: &PlanResult, path: &Path) -> Result<(), RenderError> {
    let svg = render_svg(result)?;
    std::fs::write(path, svg).map_err(|source| RenderError::Io { path: path.display().to_string(), source })
}

/// Every class that appears in any snapshot, in key order.
pub fn snapshot_classes(result: &PlanResult) -> Vec<HKey> {
    result
        .snapshots
        .iter()
        .flat_map(|s| s.best_costs.iter().map(|(k, _)| k.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// One row per snapshot. Class columns are named by their key and left empty
/// before the class is found.
pub fn write_metrics_csv<W: Write>(result: &PlanResult, sink: W) -> Result<(), RenderError> {
    let classes = snapshot_classes(result);
    let mut wtr = csv::Writer::from_writer(sink);
    let mut header: Vec<String> =
        ["iteration", "node_count", "vertex_count", "edges_computed", "collision_checks"].map(String::from).to_vec();
    let tol = result.scenario.policy.tolerance;
    header.extend(classes.iter().map(|k| {
        let h: Vec<String> = k.0.iter().map(|&v| format!("{:.3}", v as f64 * tol)).collect();
        format!("best_cost_class_[{}]", h.join(" "))
    }));
    wtr.write_record(&header)?;
    for s in &result.snapshots {
        let m = &s.metrics;
        let mut row = vec![
            s.iteration.to_string(),
            m.node_count.to_string(),
            m.vertex_count.to_string(),
            m.edges_computed.to_string(),
            m.collision_checks.to_string(),
        ];
        row.extend(classes.iter().map(|k| s.best_cost(k).map(|c| c.to_string()).unwrap_or_default()));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| RenderError::Csv(e.into()))?;
    Ok(())
}

pub fn write_metrics_csv_file(result: &PlanResult, path: &Path) -> Result<(), RenderError> {
    let f =
        std::fs::File::create(path).map_err(|source| RenderError::Io { path: path.display().to_string(), source })?;
    write_metrics_csv(result, std::io::BufWriter::new(f))
}
