use std::time::{Duration, Instant};

use super::operator::LinearOperator;
use super::{dot, norm};
use crate::error::{FyError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicgstabConfig {
    /// Relative residual target `‖Ax − b‖/‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BicgstabConfig {
    fn default() -> Self {
        BicgstabConfig {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    pub iterations: usize,
    /// Final true relative residual.
    pub residual: f64,
    pub restarts: usize,
    pub wall_time: Duration,
}

enum Sweep {
    Converged,
    Breakdown(&'static str),
    Exhausted,
}

/// Right-preconditioned BiCGSTAB: iterates on `A M y = b` and returns
/// `x = M y`, so the monitored residual is the true one. Pass
/// [`Identity`](super::Identity) for no preconditioning.
///
/// On breakdown (`ρ` or `ω` vanishing) the iteration restarts once from the
/// current iterate; a second breakdown is an error.
pub fn bicgstab(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: BicgstabConfig,
) -> Result<(Vec<f64>, SolverStats)> {
    let start = Instant::now();
    let n = a.dim();
    if m.dim() != n || b.len() != n {
        return Err(FyError::DimensionMismatch {
            context: "bicgstab",
            expected: n,
            got: b.len().min(m.dim()),
        });
    }
    if !(cfg.tol > 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "tolerance {} must be positive",
            cfg.tol
        )));
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(FyError::DimensionMismatch {
                context: "bicgstab x0",
                expected: n,
                got: x0.len(),
            })
        }
        None => vec![0.0; n],
    };
    let bnorm = norm(b);
    let mut stats = SolverStats::default();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        stats.wall_time = start.elapsed();
        return Ok((x, stats));
    }
    let mut breakdowns = 0;
    loop {
        let r = true_residual(a, &x, b);
        stats.residual = norm(&r) / bnorm;
        if stats.residual <= cfg.tol {
            stats.wall_time = start.elapsed();
            return Ok((x, stats));
        }
        if stats.iterations >= cfg.max_iter {
            return Err(FyError::Krylov {
                iterations: stats.iterations,
                residual: stats.residual,
                reason: "maximum iterations exceeded".into(),
            });
        }
        match sweep(a, m, bnorm, &mut x, r, cfg, &mut stats.iterations) {
            Sweep::Converged | Sweep::Exhausted => {}
            Sweep::Breakdown(what) => {
                breakdowns += 1;
                if breakdowns > 1 {
                    let r = true_residual(a, &x, b);
                    return Err(FyError::Krylov {
                        iterations: stats.iterations,
                        residual: norm(&r) / bnorm,
                        reason: format!("breakdown ({what}) after restart"),
                    });
                }
            }
        }
        stats.restarts = breakdowns;
    }
}

fn true_residual(a: &dyn LinearOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.apply_vec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn sweep(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    bnorm: f64,
    x: &mut [f64],
    mut r: Vec<f64>,
    cfg: BicgstabConfig,
    iterations: &mut usize,
) -> Sweep {
    let n = x.len();
    let r_hat = r.clone();
    let tiny = f64::EPSILON * f64::EPSILON;
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let r_hat_norm = norm(&r_hat);
    while *iterations < cfg.max_iter {
        *iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= tiny * r_hat_norm * norm(&r) {
            return Sweep::Breakdown("rho");
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() <= tiny * r_hat_norm * norm(&v) {
            return Sweep::Breakdown("rho");
        }
        alpha = rho_new / rv;
        rho = rho_new;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) <= cfg.tol * bnorm {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Sweep::Converged;
        }
        m.apply(&s, &mut s_hat);
        a.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= cfg.tol * bnorm {
            return Sweep::Converged;
        }
        if omega.abs() <= tiny {
            return Sweep::Breakdown("omega");
        }
    }
    Sweep::Exhausted
}
