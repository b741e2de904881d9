//! The acceptance suite. Each criterion runs in isolation and reports one
//! PASS/FAIL line on stderr; the test fails if any criterion fails.

mod common;

use common::dubins_oracle;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use topoplan::fmht::{self, FmhtConfig};
use topoplan::geometry::{polyline_collision_free, segment_collision_free, Point2, Rect, Workspace};
use topoplan::graph::Graph;
use topoplan::homology::{polyline_hsig, segment_hsig, HKey, SignaturePolicy};
use topoplan::oracle::{
    augmented_dijkstra, crossing_winding, disk_shortest, edge_set_arcs, r_disk_arcs, DiskScenario, Side,
};
use topoplan::problem::{Problem, TerminationRule};
use topoplan::replan::replan;
use topoplan::result::PlanResult;
use topoplan::rrht::{self, IterationBudget, RrhtConfig};
use topoplan::run::run;
use topoplan::scenario::{ObstacleSpec, Scenario};
use topoplan::steering::{steer_calls, State, Steering};

type Criterion = fn() -> Result<String, String>;

fn report(line: &str) {
    // written straight to the stream so the line shows even when output is captured
    let mut err = std::io::stderr();
    let _ = writeln!(err, "{line}");
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    check(t.elapsed() < limit, format!("took {:?}, limit {limit:?}", t.elapsed()))
}

fn vertex_states(g: &Graph) -> Vec<State> {
    g.vertices().iter().map(|v| v.state).collect()
}

/// 25 single-obstacle and 25 triple-obstacle instances.
fn instances() -> Vec<Problem> {
    (0..25).map(|s| random_instance(100 + s, 1)).chain((0..25).map(|s| random_instance(200 + s, 3))).collect()
}

// 1 -------------------------------------------------------------------------

/// Star-shaped loop around `c` with `turns` revolutions in direction `dir`.
fn random_loop(rng: &mut ChaCha8Rng, c: Point2, base: f64, turns: usize, dir: f64) -> Vec<Point2> {
    let per_turn = rng.gen_range(12..40);
    let n = per_turn * turns;
    let phase = rng.gen_range(0.0..TAU);
    let mut pts: Vec<Point2> = (0..n)
        .map(|i| {
            let a = phase + dir * TAU * i as f64 / per_turn as f64;
            let r = base * rng.gen_range(0.7..1.3) * (1.0 + 0.15 * (i / per_turn) as f64);
            c + p(a.cos(), a.sin()) * r
        })
        .collect();
    pts.push(pts[0]);
    pts
}

fn c1_winding_integrality() -> Result<String, String> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bounds = Rect::new(p(0.0, 0.0), p(10.0, 10.0)).unwrap();
    let mut loops = 0;
    let mut nonzero = 0;
    let mut worst = 0.0f64;
    while loops < 200 {
        let k = 1 + loops % 5;
        let polys: Vec<_> = (0..k)
            .map(|_| {
                let c = p(rng.gen_range(1.0..9.0), rng.gen_range(1.0..9.0));
                let r = rng.gen_range(0.2..0.6);
                random_convex(&mut rng, c, r)
            })
            .collect();
        let Ok(w) = Workspace::new(bounds, polys, vec![None; k]) else { continue };
        let mut made = false;
        for _ in 0..200 {
            // mostly around an obstacle so that windings are not all zero
            let (c, base) = if rng.gen_bool(0.7) {
                let z = w.representatives()[rng.gen_range(0..k)];
                (z + p(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)), rng.gen_range(0.9..2.5))
            } else {
                (p(rng.gen_range(2.0..8.0), rng.gen_range(2.0..8.0)), rng.gen_range(0.5..3.0))
            };
            let turns = rng.gen_range(1..=2);
            let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let lp = random_loop(&mut rng, c, base, turns, dir);
            if !polyline_collision_free(&lp, &w) {
                continue;
            }
            let h = polyline_hsig(&lp, &w).map_err(|e| e.to_string())?;
            for (l, (&v, &zeta)) in h.values().iter().zip(w.representatives()).enumerate() {
                worst = worst.max((v - v.round()).abs());
                check((v - v.round()).abs() <= 1e-9, format!("loop {loops} obstacle {l}: {v} is not integral"))?;
                let n = crossing_winding(&lp, zeta).map_err(|e| e.to_string())?;
                check(n == v.round() as i64, format!("loop {loops} obstacle {l}: {v} vs crossing count {n}"))?;
                if n != 0 {
                    nonzero += 1;
                }
            }
            made = true;
            break;
        }
        if made {
            loops += 1;
        }
    }
    check(nonzero > 50, format!("only {nonzero} non-zero windings; loops too trivial"))?;
    within(t, Duration::from_secs(5))?;
    Ok(format!("200 loops, {nonzero} non-zero components, worst deviation {worst:.1e}, {:?}", t.elapsed()))
}

// 2 -------------------------------------------------------------------------

/// Composite Simpson integration of Im(dz / (z - ζ)) / 2π along a → b.
fn simpson_winding(a: Point2, b: Point2, zeta: Point2, steps: usize) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let f = |t: f64| {
        let (x, y) = (a.x + t * dx - zeta.x, a.y + t * dy - zeta.y);
        // Im((dx + i dy) / (x + i y))
        (dy * x - dx * y) / (x * x + y * y)
    };
    let h = 1.0 / steps as f64;
    let mut sum = f(0.0) + f(1.0);
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0 / TAU
}

fn c2_segment_integral() -> Result<String, String> {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut seed = 0;
    while done < 500 {
        let pr = random_instance(5000 + seed, 1 + (seed as usize % 3));
        seed += 1;
        let w = &pr.workspace;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let a = p(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            let b = p(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            if !segment_collision_free(a, b, w) {
                continue;
            }
            let h = segment_hsig(a, b, w).map_err(|e| e.to_string())?;
            for (l, &zeta) in w.representatives().iter().enumerate() {
                let num = simpson_winding(a, b, zeta, 100_000);
                let d = (h.values()[l] - num).abs();
                worst = worst.max(d);
                check(d <= 1e-6, format!("segment {a:?}->{b:?} obstacle {l}: {} vs {num}", h.values()[l]))?;
            }
            done += 1;
            if done == 500 {
                break;
            }
        }
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!("500 segments, worst deviation {worst:.1e}, {:?}", t.elapsed()))
}

// 3 -------------------------------------------------------------------------

fn c3_rrht_oracle() -> Result<String, String> {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for (i, pr) in instances().iter().enumerate() {
        let cfg = RrhtConfig { budget: IterationBudget::iterations(299), seed: i as u64, ..Default::default() };
        let out = rrht::plan(pr, &cfg).map_err(|e| e.to_string())?;
        let g = &out.graph;
        check(g.vertex_count() <= 300, format!("instance {i}: {} vertices", g.vertex_count()))?;
        let oc = augmented_dijkstra(&vertex_states(g), &edge_set_arcs(g), 0, &pr.workspace, &pr.policy, &pr.goal);
        let mut count = 0;
        for v in g.vertices() {
            for (k, &n) in &v.nodes {
                count += 1;
                let c = oc.nodes.get(&(v.id.0, k.clone())).copied();
                let c = c.ok_or(format!("instance {i}: node at vertex {} class {k} unknown to the oracle", v.id.0))?;
                let d = (c - g.node(n).cost).abs();
                worst = worst.max(d);
                check(d <= 1e-9, format!("instance {i}: vertex {} class {k}: {} vs {c}", v.id.0, g.node(n).cost))?;
            }
        }
        check(count == oc.nodes.len(), format!("instance {i}: {count} nodes vs {} oracle states", oc.nodes.len()))?;
        compared += count;
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("50 instances, {compared} (vertex, class) costs, worst deviation {worst:.1e}, {:?}", t.elapsed()))
}

// 4 -------------------------------------------------------------------------

fn c4_fmht_oracle() -> Result<String, String> {
    let t = Instant::now();
    let mut lazy_equal = 0;
    let mut classes = 0;
    for (i, pr) in instances().iter().enumerate() {
        let cfg = FmhtConfig {
            samples: 200,
            seed: i as u64,
            lazy: false,
            rule: TerminationRule::exhaust(),
            ..Default::default()
        };
        let eager = fmht::plan(pr, &cfg).map_err(|e| e.to_string())?;
        let lazy = fmht::plan(pr, &FmhtConfig { lazy: true, ..cfg.clone() }).map_err(|e| e.to_string())?;
        let g = &eager.graph;
        let vs = vertex_states(g);
        let arcs = r_disk_arcs(&vs, &pr.steering, eager.radius, pr.resolution);
        let oc = augmented_dijkstra(&vs, &arcs, 0, &pr.workspace, &pr.policy, &pr.goal);
        check(
            oc.goals.len() == eager.goals.len(),
            format!("instance {i}: eager found {} classes, oracle {}", eager.goals.len(), oc.goals.len()),
        )?;
        for e in &eager.goals {
            let o = oc.goals.get(&e.key).ok_or(format!("instance {i}: class {} unknown to the oracle", e.key))?.0;
            check((o - e.cost).abs() <= 1e-9, format!("instance {i}: eager class {}: {} vs {o}", e.key, e.cost))?;
        }
        for e in &lazy.goals {
            let o = oc.goals.get(&e.key).ok_or(format!("instance {i}: lazy class {} unknown to the oracle", e.key))?.0;
            check(e.cost >= o - 1e-9, format!("instance {i}: lazy class {} below optimum: {} < {o}", e.key, e.cost))?;
        }
        let equal = lazy.goals.len() == oc.goals.len()
            && lazy.goals.iter().all(|e| (oc.goals[&e.key].0 - e.cost).abs() <= 1e-9);
        lazy_equal += equal as usize;
        classes += oc.goals.len();
    }
    // A lazy vertex whose cheapest open neighbor is blocked is deferred, and
    // its good parents may close meanwhile, so some classes end slightly
    // above the optimum. 45/50 at 200 samples is the calibrated floor.
    check(lazy_equal >= 45, format!("lazy equal to the oracle on only {lazy_equal}/50"))?;
    Ok(format!("eager exact on 50/50 ({classes} goal classes), lazy equal on {lazy_equal}/50, {:?}", t.elapsed()))
}

// 5 -------------------------------------------------------------------------

fn c5_counter_sharing() -> Result<String, String> {
    let t = Instant::now();
    let base = Scenario::example().problem().map_err(|e| e.to_string())?;
    let cfg = RrhtConfig { budget: IterationBudget::iterations(1500), seed: 11, ..Default::default() };
    let mut runs = Vec::new();
    for h in [1.0, 2.0] {
        let pr = Problem { policy: SignaturePolicy::with_limit(h), ..base.clone() };
        runs.push(rrht::plan(&pr, &cfg).map_err(|e| e.to_string())?);
    }
    let (a, b) = (&runs[0], &runs[1]);
    check(vertex_states(&a.graph) == vertex_states(&b.graph), "vertex sequences differ")?;
    let (ma, mb) = (a.graph.metrics(), b.graph.metrics());
    check(ma.edges_computed == mb.edges_computed, format!("edges {} vs {}", ma.edges_computed, mb.edges_computed))?;
    check(
        ma.collision_checks == mb.collision_checks,
        format!("collision checks {} vs {}", ma.collision_checks, mb.collision_checks),
    )?;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        check(
            sa.metrics.edges_computed == sb.metrics.edges_computed
                && sa.metrics.collision_checks == sb.metrics.collision_checks,
            format!("counters diverge at iteration {}", sa.iteration),
        )?;
    }
    check(mb.node_count > ma.node_count, format!("node count {} (h=2) vs {} (h=1)", mb.node_count, ma.node_count))?;
    let at = b
        .snapshots
        .iter()
        .find(|s| s.metrics.node_count >= 1000)
        .ok_or(format!("only {} nodes after 1500 iterations", mb.node_count))?;
    check(
        at.metrics.node_count > at.metrics.vertex_count,
        format!("{} nodes on {} vertices", at.metrics.node_count, at.metrics.vertex_count),
    )?;
    Ok(format!(
        "edges {} / checks {} identical; nodes {} (h=1) < {} (h=2); {} nodes on {} vertices at iteration {}, {:?}",
        ma.edges_computed,
        ma.collision_checks,
        ma.node_count,
        mb.node_count,
        at.metrics.node_count,
        at.metrics.vertex_count,
        at.iteration,
        t.elapsed()
    ))
}

// 6 -------------------------------------------------------------------------

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn c6_convergence() -> Result<String, String> {
    let pr = disk_problem();
    let (s, g) = (pr.start.position, pr.goal.center);
    let reference = tangent_arc_length(s, g, p(0.0, 0.0), 1.0, true);
    let lower = tangent_arc_length(s, g, p(0.0, 0.0), 1.0, false);
    check((reference - 6.33653).abs() < 1e-5, format!("tangent construction gives {reference}"))?;
    check((reference - lower).abs() < 1e-12, "sides not symmetric")?;
    let ds = DiskScenario { start: s, goal: g, center: p(0.0, 0.0), radius: 1.0 };
    for side in [Side::Upper, Side::Lower] {
        let lib = disk_shortest(&ds, side).map_err(|e| e.to_string())?.length;
        check((lib - reference).abs() < 1e-9, format!("library disk oracle {lib} vs {reference}"))?;
    }

    let mut lines = Vec::new();
    let mut slowest = Duration::ZERO;
    for algo in ["fmht", "rrht"] {
        // class cost into the goal region, and the same path extended to the goal center
        let mut per_class: std::collections::BTreeMap<HKey, Vec<(f64, f64)>> = Default::default();
        for seed in 0..10u64 {
            let t = Instant::now();
            let out = if algo == "fmht" {
                fmht::plan(&pr, &FmhtConfig { samples: 2000, seed, ..Default::default() })
            } else {
                rrht::plan(&pr, &RrhtConfig { budget: IterationBudget::iterations(3000), seed, ..Default::default() })
            }
            .map_err(|e| e.to_string())?;
            slowest = slowest.max(t.elapsed());
            check(t.elapsed() < Duration::from_secs(60), format!("{algo} seed {seed} took {:?}", t.elapsed()))?;
            check(out.goals.len() == 2, format!("{algo} seed {seed}: {} classes", out.goals.len()))?;
            for e in &out.goals {
                let tail = out.graph.position(e.vertex).distance(g);
                per_class.entry(e.key.clone()).or_default().push((e.cost, e.cost + tail));
            }
        }
        check(per_class.len() == 2, format!("{algo}: {} distinct classes over seeds", per_class.len()))?;
        for (k, costs) in per_class {
            check(costs.len() == 10, format!("{algo}: class {k} found on {} seeds", costs.len()))?;
            let m = median(costs.iter().map(|c| c.0).collect());
            let to_center = median(costs.iter().map(|c| c.1).collect());
            let rel = (m - reference).abs() / reference;
            check(rel <= 0.05, format!("{algo}: class {k} median {m:.5} is {:.2}% off", rel * 100.0))?;
            lines.push(format!(
                "{algo} h={:+.2} median {m:.4} ({:+.2}%; extended to the goal center {:+.2}%)",
                k.0[0] as f64 * 1e-6,
                (m / reference - 1.0) * 100.0,
                (to_center / reference - 1.0) * 100.0
            ));
        }
    }
    Ok(format!("reference {reference:.5}; {}; slowest run {slowest:?}", lines.join(", ")))
}

// 7 -------------------------------------------------------------------------

fn c7_dubins() -> Result<String, String> {
    let t = Instant::now();
    let steering = Steering::dubins(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let span = if i % 4 == 0 { 1.0 } else { 6.0 };
        let (a, b) = (random_pose(&mut rng, span), random_pose(&mut rng, span));
        let got = steering.connect(&State::pose(a[0], a[1], a[2]), &State::pose(b[0], b[1], b[2])).cost;
        let want = dubins_oracle::shortest_length(a, b, 1.0);
        let d = (got - want).abs();
        worst = worst.max(d);
        check(d <= 1e-9, format!("pair {i} {a:?} -> {b:?}: {got} vs {want}"))?;
    }
    let q = steering.connect(&State::pose(0.0, 0.0, 0.0), &State::pose(1.0, 1.0, FRAC_PI_2)).cost;
    check((q - FRAC_PI_2).abs() <= 1e-12, format!("quarter arc {q}"))?;
    within(t, Duration::from_secs(5))?;
    Ok(format!(
        "1000 pairs, worst deviation {worst:.1e}; quarter arc off by {:.1e}, {:?}",
        (q - PI / 2.0).abs(),
        t.elapsed()
    ))
}

// 8 -------------------------------------------------------------------------

fn c8_replan() -> Result<String, String> {
    let mut s = Scenario::example();
    s.planner.seed = 3;
    let (prior, _) = run(&s).map_err(|e| e.to_string())?;
    check(prior.classes.len() == 2, format!("prior has {} classes", prior.classes.len()))?;
    let best = prior.best().unwrap().clone();
    let other = prior.classes.iter().find(|c| c.key != best.key).unwrap().clone();
    // a wall from the obstacle to the boundary on the cheaper side
    let side = if best.trace.iter().map(|q| q.y).sum::<f64>() > 0.0 { 1.0 } else { -1.0 };
    let (y0, y1) = ((side * 0.55f64).min(side * 1.95), (side * 0.55f64).max(side * 1.95));
    let wall =
        ObstacleSpec { vertices: vec![p(-0.1, y0), p(0.1, y0), p(0.1, y1), p(-0.1, y1)], representative_point: None };
    let calls = steer_calls();
    let t = Instant::now();
    let next: PlanResult = replan(&prior, &wall).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let rep = next.replan.as_ref().ok_or("no replan report")?;
    check(steer_calls() == calls && rep.steer_calls == 0, "steering was called")?;
    check(next.metrics == prior.metrics, "graph counters changed")?;
    check(
        rep.collision_checks as usize <= rep.path_segments,
        format!("{} checks for {} stored segments", rep.collision_checks, rep.path_segments),
    )?;
    let now = next.best().ok_or("every class blocked")?;
    check(now.cost == other.cost && now.trace == other.trace, "returned path is not the alternative class")?;
    check(!next.classes.iter().any(|c| c.feasible && c.trace == best.trace), "blocked class still feasible")?;
    next.validate().map_err(|e| e.to_string())?;
    check(elapsed < Duration::from_millis(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "alternative class cost {:.4} returned; 0 steering calls, {} checks against the new obstacle ({} stored segments), {elapsed:?}",
        now.cost, rep.collision_checks, rep.path_segments
    ))
}

// 9 -------------------------------------------------------------------------

fn c9_anytime() -> Result<String, String> {
    let t = Instant::now();
    let s = Scenario::example();
    let pr = s.problem().map_err(|e| e.to_string())?;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..10u64 {
        let rr = rrht::plan(&pr, &RrhtConfig { budget: IterationBudget::iterations(1000), seed, ..Default::default() })
            .map_err(|e| e.to_string())?;
        let fm =
            fmht::plan(&pr, &FmhtConfig { samples: 1000, seed, ..Default::default() }).map_err(|e| e.to_string())?;
        let (a, b) = (rr.first_goal_iteration, fm.first_goal_iteration);
        if let (Some(a), Some(b)) = (a, b) {
            wins += (a < b) as usize;
        } else if a.is_some() {
            wins += 1;
        }
        pairs.push(format!("{}/{}", a.map_or("-".into(), |v| v.to_string()), b.map_or("-".into(), |v| v.to_string())));
        // incumbents never get worse and never disappear
        let mut seen: std::collections::BTreeMap<HKey, f64> = Default::default();
        for snap in &rr.snapshots {
            for (k, prev) in &seen {
                let c = snap.best_cost(k).ok_or(format!("seed {seed}: class {k} vanished at {}", snap.iteration))?;
                check(c <= *prev, format!("seed {seed}: class {k} rose {prev} -> {c} at {}", snap.iteration))?;
            }
            for (k, c) in &snap.best_costs {
                seen.insert(k.clone(), *c);
            }
        }
    }
    check(wins >= 8, format!("incremental first on only {wins}/10 seeds ({})", pairs.join(" ")))?;
    Ok(format!("incremental first on {wins}/10 seeds (iterations/expansions: {}), {:?}", pairs.join(" "), t.elapsed()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 9] = [
        ("1 winding integrality", c1_winding_integrality),
        ("2 segment signature vs integration", c2_segment_integral),
        ("3 RRHT* oracle equivalence", c3_rrht_oracle),
        ("4 FMHT* oracle equivalence", c4_fmht_oracle),
        ("5 edge/collision sharing", c5_counter_sharing),
        ("6 convergence on the disk scenario", c6_convergence),
        ("7 Dubins steering", c7_dubins),
        ("8 replanning", c8_replan),
        ("9 anytime behavior", c9_anytime),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => report(&format!("PASS criterion {name}: {detail}")),
            Err(why) => {
                report(&format!("FAIL criterion {name}: {why}"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn helpers_sane() {
    // the integrator reproduces a closed-form quarter turn
    let q = simpson_winding(p(1.0, 0.0), p(0.0, 1.0), p(0.0, 0.0), 1000);
    assert!((q - 0.25).abs() < 1e-9);
}
