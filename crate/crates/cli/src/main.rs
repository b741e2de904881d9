use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use topoplan::render::{write_metrics_csv_file, write_svg};
use topoplan::replan::replan;
use topoplan::result::{ClassPath, PlanResult};
use topoplan::run::{gap, plan, run, write_outputs};
use topoplan::scenario::{Algo, ObstacleSpec, Scenario};

/// Exit code when no class reaches the goal.
const INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "topoplan", version, about = "Optimal planning over homology classes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan a scenario and write result.json, metrics.csv and plan.svg.
    Plan {
        scenario: PathBuf,
        #[arg(long)]
        algo: Option<Algo>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample count for fmht.
        #[arg(long)]
        samples: Option<usize>,
        /// Iteration count for rrht.
        #[arg(long)]
        iters: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-select the best class of a result after adding an obstacle.
    Replan {
        result: PathBuf,
        /// JSON file with {"vertices": [[x,y],...], "representative_point": [x,y]?}.
        #[arg(long)]
        obstacle: PathBuf,
        /// Defaults to replan.json next to the input result.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan, then print per-class planner cost against the exact optimum on the same vertices.
    Gap {
        scenario: PathBuf,
        #[arg(long)]
        algo: Option<Algo>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw a result as SVG and export its metrics as CSV.
    Render {
        result: PathBuf,
        /// Defaults to the result path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the result path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print an example scenario.
    Example,
}

fn load_scenario(path: &Path, algo: Option<Algo>, seed: Option<u64>) -> Result<Scenario> {
    let mut s = Scenario::load(path)?;
    if let Some(a) = algo {
        if a != s.planner.algo {
            s.planner.algo = a;
            s.planner.gamma_multiplier = None;
            s.resolve_defaults();
        }
    }
    if let Some(seed) = seed {
        s.planner.seed = seed;
    }
    Ok(s)
}

fn describe(c: &ClassPath) -> String {
    let h: Vec<String> = c.signature.0.iter().map(|v| format!("{v:.4}")).collect();
    format!("h=[{}] cost={:.6}{}", h.join(", "), c.cost, if c.feasible { "" } else { " blocked" })
}

fn exit_for(feasible: bool) -> ExitCode {
    if feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(INFEASIBLE)
    }
}

fn execute(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Plan { scenario, algo, seed, samples, iters, out } => {
            let mut s = load_scenario(&scenario, algo, seed)?;
            if let Some(k) = samples {
                s.planner.samples = k;
            }
            if let Some(n) = iters {
                s.planner.iterations = n;
            }
            s.validate()?;
            let (result, _) = run(&s)?;
            result.validate().context("planner produced an invalid path")?;
            let files = write_outputs(&result, &out)?;
            println!("termination: {:?}", result.termination);
            for c in &result.classes {
                println!("{}", describe(c));
            }
            println!("wrote {}", files.result.display());
            if !result.is_feasible() {
                eprintln!("no class reached the goal");
            }
            Ok(exit_for(result.is_feasible()))
        }
        Cmd::Replan { result, obstacle, out } => {
            let prior = PlanResult::load(&result)?;
            let text = std::fs::read_to_string(&obstacle).with_context(|| format!("reading {}", obstacle.display()))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let new_obstacle: ObstacleSpec = serde_path_to_error::deserialize(de)
                .with_context(|| format!("parsing obstacle {}", obstacle.display()))?;
            let started = std::time::Instant::now();
            let next = replan(&prior, &new_obstacle)?;
            let elapsed = started.elapsed();
            let out = out.unwrap_or_else(|| result.with_file_name("replan.json"));
            next.save(&out)?;
            let rep = next.replan.as_ref().expect("replan report");
            println!(
                "invalidated {} of {} classes, {} collision checks, {} steering calls, {:.3} ms",
                rep.invalidated,
                next.classes.len(),
                rep.collision_checks,
                rep.steer_calls,
                elapsed.as_secs_f64() * 1e3
            );
            match next.best() {
                Some(best) => println!("best: {}", describe(best)),
                None => eprintln!("every stored class is blocked; plan again"),
            }
            println!("wrote {}", out.display());
            Ok(exit_for(next.is_feasible()))
        }
        Cmd::Gap { scenario, algo, seed } => {
            let s = load_scenario(&scenario, algo, seed)?;
            let out = plan(&s)?;
            let rows = gap(&s, &out)?;
            let tol = s.policy.tolerance;
            println!("{:<32} {:>12} {:>12} {:>10}", "class", "planner", "oracle", "ratio");
            let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |v| format!("{v:.p$}"));
            for r in &rows {
                let h: Vec<String> = r.key.0.iter().map(|&k| format!("{:.3}", k as f64 * tol)).collect();
                println!(
                    "{:<32} {:>12} {:>12} {:>10}",
                    format!("[{}]", h.join(", ")),
                    fmt(r.planner, 6),
                    fmt(r.oracle, 6),
                    fmt(r.ratio, 4)
                );
            }
            Ok(exit_for(!out.goals.is_empty()))
        }
        Cmd::Render { result, out, csv } => {
            let r = PlanResult::load(&result)?;
            let svg = out.unwrap_or_else(|| result.with_extension("svg"));
            let csv = csv.unwrap_or_else(|| result.with_extension("csv"));
            write_svg(&r, &svg)?;
            write_metrics_csv_file(&r, &csv)?;
            println!("wrote {} and {}", svg.display(), csv.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Example => {
            println!("{}", Scenario::example().to_json());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("TOPOPLAN_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
