use std::time::{Duration, Instant};

use super::bicgstab::SolverStats;
use super::{dot, norm};
use crate::error::{FyError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseIterationConfig {
    pub tol_e: f64,
    pub max_outer: usize,
}

impl Default for InverseIterationConfig {
    fn default() -> Self {
        InverseIterationConfig {
            tol_e: 1e-9,
            max_outer: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// Unit vector, largest component positive.
    pub vector: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Largest inner iteration count of any outer step.
    pub max_inner: usize,
    pub wall_time: Duration,
}

/// Inverse iteration with a fixed shift `λ₀`.
///
/// `solve(x, λ)` must return `y = (K − λ₀)⁻¹ x`; `λ` is the current
/// eigenvalue estimate (`None` on the first step) and may be used to seed an
/// iterative inner solver with `x/(λ − λ₀)`. The estimate is updated as
/// `λ = λ₀ + ⟨x,x⟩/⟨x,y⟩`.
pub fn inverse_iteration<F>(
    mut solve: F,
    x0: &[f64],
    lambda0: f64,
    cfg: InverseIterationConfig,
) -> Result<EigenResult>
where
    F: FnMut(&[f64], Option<f64>) -> Result<(Vec<f64>, SolverStats)>,
{
    let start = Instant::now();
    if !(cfg.tol_e > 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "tol_E {} must be positive",
            cfg.tol_e
        )));
    }
    let n0 = norm(x0);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(FyError::InvalidArgument(
            "start vector must be non-zero".into(),
        ));
    }
    let mut x: Vec<f64> = x0.iter().map(|v| v / n0).collect();
    let mut lambda: Option<f64> = None;
    let (mut inner, mut max_inner) = (0, 0);
    for outer in 1..=cfg.max_outer {
        let (y, stats) = solve(&x, lambda)?;
        inner += stats.iterations;
        max_inner = max_inner.max(stats.iterations);
        let xy = dot(&x, &y);
        let ny = norm(&y);
        if !(xy.is_finite() && ny.is_finite()) || xy == 0.0 || ny == 0.0 {
            return Err(FyError::NotConverged {
                iterations: outer,
                last_change: f64::NAN,
            });
        }
        let new = lambda0 + 1.0 / xy;
        let change = lambda.map_or(f64::INFINITY, |l| (new - l).abs());
        x = y.iter().map(|v| v / ny).collect();
        lambda = Some(new);
        if change < cfg.tol_e {
            let imax = (0..x.len())
                .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
                .unwrap_or(0);
            if x[imax] < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(EigenResult {
                lambda: new,
                vector: x,
                outer_iterations: outer,
                inner_iterations: inner,
                max_inner,
                wall_time: start.elapsed(),
            });
        }
        if outer == cfg.max_outer {
            return Err(FyError::NotConverged {
                iterations: outer,
                last_change: change,
            });
        }
    }
    Err(FyError::NotConverged {
        iterations: 0,
        last_change: f64::INFINITY,
    })
}
