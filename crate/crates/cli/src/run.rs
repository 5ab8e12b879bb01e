//! Task dispatch.

use std::path::{Path, PathBuf};
use std::time::Instant;

use fysolve_core::chains::{
    approx_class_count, chain_label, classify_chains, emit_tree, enumerate_chains,
};
use fysolve_core::error::FyError;
use fysolve_core::fy3::{
    residual3, solve_bound3, solve_elastic3, Operator3, Problem3, SWaveSystem3, SolveResult3,
};
use fysolve_core::fy4::{solve_bound4, Problem4};
use fysolve_core::twobody::{solve_pair, solve_pair_ground};
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::record::{format_f64, to_csv, to_json, ErrorInfo, ResultRecord, Timing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides `chains.dot`.
    pub dot: Option<PathBuf>,
    /// Lists every class in the chains record.
    pub classes: bool,
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Solver(#[from] FyError),
    #[error("{0}")]
    Io(String),
}

pub struct Outcome {
    pub record: ResultRecord,
    pub json_path: PathBuf,
    pub exit_code: i32,
}

/// Runs `task`, writes `<task>.json` (and CSV/DOT files) under the output
/// directory, and reports the exit code.
pub fn run(config: &RunConfig, task: Task, opts: &RunOptions) -> Outcome {
    let start = Instant::now();
    let warnings = box_warnings(config, task);
    let result = dispatch(config, task, opts);
    let (status, outputs, error, mut exit_code) = match result {
        Ok(v) => ("ok", v, None, EXIT_OK),
        Err(e) => {
            let (kind, code) = match &e {
                RunError::Solver(FyError::NoBoundState { .. }) => ("no_bound_state", EXIT_SOLVER),
                RunError::Solver(FyError::Krylov { .. }) => ("krylov", EXIT_SOLVER),
                RunError::Solver(FyError::NotConverged { .. }) => ("not_converged", EXIT_SOLVER),
                RunError::Solver(_) => ("solver", EXIT_SOLVER),
                RunError::Io(_) => ("io", EXIT_IO),
            };
            (
                "error",
                Value::Null,
                Some(ErrorInfo {
                    kind: kind.into(),
                    message: e.to_string(),
                }),
                code,
            )
        }
    };
    let record = ResultRecord {
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        task: task.name().into(),
        status: status.into(),
        workers: rayon::current_num_threads(),
        config: config.clone(),
        outputs,
        error,
        warnings,
        timing: Timing {
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    };
    let json_path = opts.out_dir.join(format!("{}.json", task.name()));
    if let Err(e) = write_file(&json_path, &to_json(&record)) {
        eprintln!("{e}");
        exit_code = EXIT_IO;
    }
    Outcome {
        record,
        json_path,
        exit_code,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| RunError::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

fn box_warnings(config: &RunConfig, task: Task) -> Vec<String> {
    let range = config.longest_range();
    let mut out = Vec::new();
    if task == Task::Chains || range == 0.0 {
        return out;
    }
    for (name, g) in [
        ("x", &config.grid.x),
        ("y", &config.grid.y),
        ("z", &config.grid.z),
    ] {
        if let Some(g) = g {
            if g.max < 4.0 * range {
                out.push(format!(
                    "grid.{name}.max = {} is less than four potential ranges ({})",
                    g.max,
                    4.0 * range
                ));
            }
        }
    }
    for w in &out {
        eprintln!("warning: {w}");
    }
    out
}

fn dispatch(config: &RunConfig, task: Task, opts: &RunOptions) -> Result<Value, RunError> {
    match task {
        Task::Pair => pair(config, None),
        Task::Bound3 => bound3(config, None),
        Task::Scatter3 => scatter3(config, config.energy.scatter.expect("validated")),
        Task::Bound4 => bound4(config, None),
        Task::Chains => chains(config, opts),
        Task::Sweep => sweep(config, opts),
    }
}

fn grid_x(config: &RunConfig, n: Option<usize>) -> Result<fysolve_core::basis::Grid1D, FyError> {
    let g = config.grid.x.as_ref().expect("validated");
    n.map_or_else(|| g.build(), |n| g.build_with(n))
}

fn grids(
    config: &RunConfig,
    n: Option<usize>,
) -> Result<[fysolve_core::basis::Grid1D; 3], FyError> {
    let build = |g: &Option<crate::config::GridConfig>| -> Result<_, FyError> {
        match g {
            Some(g) => n.map_or_else(|| g.build(), |n| g.build_with(n)),
            None => grid_x(config, n),
        }
    };
    Ok([
        grid_x(config, n)?,
        build(&config.grid.y)?,
        build(&config.grid.z)?,
    ])
}

fn pair(config: &RunConfig, n: Option<usize>) -> Result<Value, RunError> {
    let s = config.hbar2_over_m;
    let spec = config.potential_spec()?;
    let g = grid_x(config, n)?;
    let sol = match config.energy.guess {
        Some(e) => solve_pair(&spec, &g, e / s)?,
        None => solve_pair_ground(&spec, 0, &g)?,
    };
    Ok(json!({
        "energy": sol.energy * s,
        "intervals": g.intervals(),
        "outer_iterations": sol.stats.outer_iterations,
    }))
}

fn problem3_bound(config: &RunConfig, n: Option<usize>) -> Result<Problem3, FyError> {
    let [gx, gy, _] = grids(config, n)?;
    let sys = SWaveSystem3::new(config.system.kind(), &config.potential_spec()?);
    Problem3::bound(sys, gx, gy, config.quadrature.u as usize)
}

fn midpoints(g: &fysolve_core::basis::Grid1D) -> Vec<f64> {
    g.nodes().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn off_grid_points(p: &Problem3) -> Vec<(f64, f64)> {
    let ys = midpoints(&p.grid_y);
    midpoints(&p.grid_x)
        .into_iter()
        .flat_map(|x| ys.iter().map(move |&y| (x, y)))
        .collect()
}

fn bound3(config: &RunConfig, n: Option<usize>) -> Result<Value, RunError> {
    let s = config.hbar2_over_m;
    let p = problem3_bound(config, n)?;
    let b = solve_bound3(
        &p,
        config.energy.guess.expect("validated") / s,
        &config.solver.options(),
    )?;
    let op = Operator3::new(&p)?;
    let res = residual3(&op, &SolveResult3::Bound(b.clone()), &off_grid_points(&p))?;
    Ok(json!({
        "energy": b.energy * s,
        "threshold": b.threshold * s,
        "intervals": [p.grid_x.intervals(), p.grid_y.intervals()],
        "outer_iterations": b.outer_iterations,
        "inner_iterations": b.inner_iterations,
        "max_inner_iterations": b.max_inner,
        "residual_max": res.max,
        "residual_rms": res.rms,
    }))
}

fn scatter3(config: &RunConfig, energy: f64) -> Result<Value, RunError> {
    let s = config.hbar2_over_m;
    let [gx, gy, _] = grids(config, None)?;
    let sys = SWaveSystem3::new(config.system.kind(), &config.potential_spec()?);
    let p = Problem3::elastic(
        sys,
        gx,
        gy,
        config.quadrature.u as usize,
        energy / s,
        config.energy.channel,
    )?;
    let op = Operator3::new(&p)?;
    let r = solve_elastic3(&p, &config.solver.options())?;
    let res = residual3(&op, &SolveResult3::Elastic(r.clone()), &off_grid_points(&p))?;
    Ok(json!({
        "energy": energy,
        "p": r.p,
        "tan_delta": r.tan_delta,
        "pair_energy": r.pair_energy * s,
        "iterations": r.stats.iterations,
        "relative_residual": r.stats.residual,
        "residual_max": res.max,
        "residual_rms": res.rms,
    }))
}

fn bound4(config: &RunConfig, n: Option<usize>) -> Result<Value, RunError> {
    let s = config.hbar2_over_m;
    let g = grids(config, n)?;
    let intervals = [g[0].intervals(), g[1].intervals(), g[2].intervals()];
    let mut p = Problem4::new(
        config.potential_spec()?,
        g,
        [config.quadrature.u as usize, config.quadrature.v as usize],
        config.energy.guess.expect("validated") / s,
    )?;
    if let Some(t) = config.energy.threshold {
        p = p.with_threshold(t / s);
    }
    let b = solve_bound4(&p, &config.solver.options())?;
    Ok(json!({
        "energy": b.energy * s,
        "threshold": b.threshold * s,
        "intervals": intervals,
        "outer_iterations": b.outer_iterations,
        "inner_iterations": b.inner_iterations,
        "max_inner_iterations": b.max_inner,
    }))
}

fn chains(config: &RunConfig, opts: &RunOptions) -> Result<Value, RunError> {
    let c = config.chains.as_ref().expect("validated");
    let n = c.n as usize;
    let all = enumerate_chains(n)?;
    let classes = classify_chains(&all)?;
    let mut out = json!({
        "n": n,
        "counts": { "chains": all.len(), "classes": classes.len() },
        "approx_class_formula": approx_class_count(n),
    });
    if c.classes || opts.classes {
        out["classes"] = classes
            .iter()
            .map(|k| json!({ "canonical": chain_label(&k.canonical_form), "members": k.members }))
            .collect();
    }
    let dot = opts
        .dot
        .clone()
        .or_else(|| c.dot.as_ref().map(|d| opts.out_dir.join(d)));
    if let Some(path) = dot {
        let text: String = classes
            .iter()
            .map(|k| emit_tree(&k.canonical_form))
            .collect();
        write_file(&path, &text)?;
        out["dot"] = json!(path.display().to_string());
    }
    Ok(out)
}

fn sweep(config: &RunConfig, opts: &RunOptions) -> Result<Value, RunError> {
    let sw = config.sweep.as_ref().expect("validated");
    let f = format_f64;
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match sw.task {
        Task::Scatter3 => {
            let mut rows = Vec::new();
            for &e in &sw.energies {
                let v = scatter3(config, e)?;
                rows.push(vec![
                    f(e),
                    f(v["p"].as_f64().unwrap_or(f64::NAN)),
                    f(v["tan_delta"].as_f64().unwrap_or(f64::NAN)),
                    v["iterations"].to_string(),
                ]);
            }
            (vec!["E", "p", "tan_delta", "iterations"], rows)
        }
        task => {
            let mut rows = Vec::new();
            for &n in &sw.intervals {
                let n = n as usize;
                let v = match task {
                    Task::Pair => pair(config, Some(n))?,
                    Task::Bound3 => bound3(config, Some(n))?,
                    _ => bound4(config, Some(n))?,
                };
                let inner = v
                    .get("inner_iterations")
                    .map_or("0".into(), |x| x.to_string());
                rows.push(vec![
                    n.to_string(),
                    f(v["energy"].as_f64().unwrap_or(f64::NAN)),
                    v["outer_iterations"].to_string(),
                    inner,
                ]);
            }
            (
                vec!["intervals", "E", "outer_iterations", "inner_iterations"],
                rows,
            )
        }
    };
    let path = opts.out_dir.join(&sw.csv);
    write_file(&path, &to_csv(&header, &rows))?;
    Ok(json!({ "task": sw.task.name(), "rows": rows.len(), "csv": path.display().to_string() }))
}
