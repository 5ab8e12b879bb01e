use std::time::{Duration, Instant};

use super::operator::Operator4;
use super::Problem4;
use crate::basis::TensorCoefficients;
use crate::error::{FyError, Result};
use crate::fy3::{solve_bound3, Problem3, SWaveSystem3, SystemKind};
use crate::krylov::{
    bicgstab, build_precond, check_linearity, inverse_iteration, FnOperator, LinearOperator,
    SolverOptions, SolverStats,
};

#[derive(Debug, Clone)]
pub struct BoundState4 {
    pub energy: f64,
    /// Both amplitudes, normalized to `Σ_α ∫∫∫ φ_α² = 1`.
    pub coeffs: TensorCoefficients,
    /// The 3 + 1 threshold the energy was checked against.
    pub threshold: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub max_inner: usize,
    pub wall_time: Duration,
}

pub(crate) fn system_operator(op: &Operator4, energy: f64) -> impl LinearOperator + '_ {
    FnOperator::new(op.len(), move |x: &[f64], y: &mut [f64]| {
        op.apply_l(energy, x, y);
        let mut r = vec![0.0; x.len()];
        op.apply_r(x, &mut r);
        y.iter_mut().zip(&r).for_each(|(a, b)| *a -= b);
    })
}

/// Three-boson energy for the same potential on the x and y grids.
pub fn three_body_threshold(problem: &Problem4, opts: &SolverOptions) -> Result<f64> {
    let sys = SWaveSystem3::new(SystemKind::Boson, &problem.potential);
    let p3 = Problem3::bound(
        sys,
        problem.grid_x.clone(),
        problem.grid_y.clone(),
        problem.quad_u.order(),
    )?;
    let guess = problem.lambda0.min(-1e-3);
    match solve_bound3(&p3, guess, opts) {
        Ok(b) => Ok(b.energy),
        Err(FyError::InvalidArgument(_)) | Err(FyError::NoBoundState { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn start_vector(op: &Operator4) -> Vec<f64> {
    let shape = |axis: usize| {
        let b = op.basis(axis);
        let s = 0.1 * b.q_max();
        b.interpolate(|q| q * (-q / s).exp(), |q| (1.0 - q / s) * (-q / s).exp())
    };
    let (cx, cy, cz) = (shape(0), shape(1), shape(2));
    let mut out = Vec::with_capacity(op.len());
    for scale in [1.0, 0.5] {
        for &a in &cx {
            for &b in &cy {
                out.extend(cz.iter().map(|&c| scale * a * b * c));
            }
        }
    }
    out
}

/// Four-boson ground state nearest `problem.lambda0`.
pub fn solve_bound4(problem: &Problem4, opts: &SolverOptions) -> Result<BoundState4> {
    let start = Instant::now();
    let lambda0 = problem.lambda0;
    let threshold = match problem.threshold {
        Some(t) => t,
        None => three_body_threshold(problem, opts)?,
    };
    if !(lambda0 < threshold) {
        return Err(FyError::InvalidArgument(format!(
            "energy guess {lambda0} must lie below the 3+1 threshold {threshold}"
        )));
    }
    let op = Operator4::new(problem)?;
    let a = system_operator(&op, lambda0);
    check_linearity(&a, 1e-10)?;
    let precond = build_precond(&op.axis_factors(lambda0))?;
    let cfg = opts.bicgstab();
    let solve = |x: &[f64], lambda: Option<f64>| -> Result<(Vec<f64>, SolverStats)> {
        let mut bx = vec![0.0; x.len()];
        op.apply_mass(x, &mut bx);
        bx.iter_mut().for_each(|v| *v = -*v);
        let guess: Option<Vec<f64>> = lambda.map(|l| x.iter().map(|v| v / (l - lambda0)).collect());
        bicgstab(&a, &precond, &bx, guess.as_deref(), cfg)
    };
    let eig = inverse_iteration(solve, &start_vector(&op), lambda0, opts.inverse_iteration())?;
    if !(eig.lambda < threshold) {
        return Err(FyError::NoBoundState {
            guess: lambda0,
            reason: format!(
                "iteration settled at E = {} above the threshold {threshold}",
                eig.lambda
            ),
        });
    }
    let mut c = eig.vector;
    let scale = op.norm_sq(&c).sqrt();
    c.iter_mut().for_each(|v| *v /= scale);
    Ok(BoundState4 {
        energy: eig.lambda,
        coeffs: TensorCoefficients::from_vec(&op.dims(), 2, c)?,
        threshold,
        outer_iterations: eig.outer_iterations,
        inner_iterations: eig.inner_iterations,
        max_inner: eig.max_inner,
        wall_time: start.elapsed(),
    })
}
