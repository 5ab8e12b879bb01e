use std::time::{Duration, Instant};

use super::operator::Operator3;
use super::{Mode3, Problem3};
use crate::basis::TensorCoefficients;
use crate::error::{FyError, Result};
use crate::krylov::{
    bicgstab, build_precond, check_linearity, inverse_iteration, FnOperator, LinearOperator,
    SolverOptions, SolverStats,
};
use crate::twobody::solve_pair_ground;

#[derive(Debug, Clone)]
pub struct BoundState3 {
    pub energy: f64,
    /// Normalized to `Σ_α ∫∫ φ_α² = 1`.
    pub coeffs: TensorCoefficients,
    /// Lowest 2 + 1 threshold on the x grid (0 if no pair is bound).
    pub threshold: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub max_inner: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct ElasticResult3 {
    pub tan_delta: f64,
    /// Channel momentum.
    pub p: f64,
    pub pair_energy: f64,
    /// Scattered part `φ_sc`.
    pub coeffs: TensorCoefficients,
    pub stats: SolverStats,
}

#[derive(Debug, Clone)]
pub enum SolveResult3 {
    Bound(BoundState3),
    Elastic(ElasticResult3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub rms: f64,
}

/// `A = L(E) − R` as an operator.
pub(crate) fn system_operator(op: &Operator3, energy: f64) -> impl LinearOperator + '_ {
    FnOperator::new(op.len(), move |x: &[f64], y: &mut [f64]| {
        op.apply_l(energy, x, y);
        let mut r = vec![0.0; x.len()];
        op.apply_r(x, &mut r);
        y.iter_mut().zip(&r).for_each(|(a, b)| *a -= b);
    })
}

/// Lowest pair level over amplitudes, or 0 if none binds.
pub fn pair_threshold(problem: &Problem3) -> Result<f64> {
    let mut t: f64 = 0.0;
    for a in 0..problem.system.n_amp() {
        let pot = problem.system.potential(a);
        if pot.is_zero() {
            continue;
        }
        match solve_pair_ground(pot, 0, &problem.grid_x) {
            Ok(p) => t = t.min(p.energy),
            Err(FyError::NoBoundState { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(t)
}

fn start_vector(op: &Operator3) -> Vec<f64> {
    let bx = op.basis_x();
    let sx = 0.1 * bx.q_max();
    let sy = 0.1 * op.basis_y(0).q_max();
    let cx = bx.interpolate(
        |q| q * (-q / sx).exp(),
        |q| (1.0 - q / sx) * (-q / sx).exp(),
    );
    let mut out = Vec::with_capacity(op.len());
    for a in 0..op.n_amp() {
        let cy = op.basis_y(a).interpolate(
            |q| q * (-q / sy).exp(),
            |q| (1.0 - q / sy) * (-q / sy).exp(),
        );
        let sign = if a == 0 { 1.0 } else { 0.5 };
        for &p in &cx {
            out.extend(cy.iter().map(|&q| sign * p * q));
        }
    }
    out
}

/// Three-body bound state nearest `lambda0` (which must lie below the
/// 2 + 1 threshold), by preconditioned inverse iteration.
pub fn solve_bound3(problem: &Problem3, lambda0: f64, opts: &SolverOptions) -> Result<BoundState3> {
    if problem.mode != Mode3::Bound {
        return Err(FyError::InvalidArgument(
            "solve_bound3 needs a bound-mode problem".into(),
        ));
    }
    let start = Instant::now();
    let threshold = pair_threshold(problem)?;
    if !(lambda0 < threshold) {
        return Err(FyError::InvalidArgument(format!(
            "energy guess {lambda0} must lie below the 2+1 threshold {threshold}"
        )));
    }
    let op = Operator3::new(problem)?;
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
    Ok(BoundState3 {
        energy: eig.lambda,
        coeffs: TensorCoefficients::from_vec(&op.dims(), op.n_amp(), c)?,
        threshold,
        outer_iterations: eig.outer_iterations,
        inner_iterations: eig.inner_iterations,
        max_inner: eig.max_inner,
        wall_time: start.elapsed(),
    })
}

/// Elastic 1 + (2) scattering: solves `(L − R)φ_sc = R[u sin(py)]` and
/// reads `tan δ` from the `cos(py)` tail of `φ_sc` at `y_max`.
pub fn solve_elastic3(problem: &Problem3, opts: &SolverOptions) -> Result<ElasticResult3> {
    let Mode3::Elastic { energy, .. } = problem.mode else {
        return Err(FyError::InvalidArgument(
            "solve_elastic3 needs an elastic-mode problem".into(),
        ));
    };
    let op = Operator3::new(problem)?;
    solve_elastic_with(&op, energy, opts)
}

pub(crate) fn solve_elastic_with(
    op: &Operator3,
    energy: f64,
    opts: &SolverOptions,
) -> Result<ElasticResult3> {
    let (pair, p, channel) = op.channel().expect("elastic operator");
    let a = system_operator(op, energy);
    check_linearity(&a, 1e-10)?;
    let precond = build_precond(&op.axis_factors(energy))?;
    let b = op.driving();
    let (c, stats) = bicgstab(&a, &precond, &b, None, opts.bicgstab())?;
    let [nx, ny] = op.dims();
    let blk = &c[channel * nx * ny..(channel + 1) * nx * ny];
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &x) in op.basis_x().collocation_points().iter().enumerate() {
        let w = op.basis_x().colloc_local(i, 0);
        let beta: f64 = (0..w.len)
            .map(|k| w.vals[k] * blk[(w.start + k) * ny + ny - 1])
            .sum();
        let u = pair.u(x, 0);
        num += beta * u;
        den += u * u;
    }
    Ok(ElasticResult3 {
        tan_delta: num / den,
        p,
        pair_energy: pair.energy,
        coeffs: TensorCoefficients::from_vec(&op.dims(), op.n_amp(), c)?,
        stats,
    })
}

/// Pointwise residual of the solved equations at arbitrary `(x, y)`,
/// `x > 0`: `|(L − R)φ|` for bound states, `|(L − R)φ_sc − R[u sin]|` for
/// scattering.
pub fn residual3(op: &Operator3, result: &SolveResult3, points: &[(f64, f64)]) -> Result<Residual> {
    let (energy, c, elastic) = match result {
        SolveResult3::Bound(b) => (b.energy, b.coeffs.data(), false),
        SolveResult3::Elastic(e) => (op.elastic_energy().unwrap_or(0.0), e.coeffs.data(), true),
    };
    if c.len() != op.len() {
        return Err(FyError::DimensionMismatch {
            context: "residual3",
            expected: op.len(),
            got: c.len(),
        });
    }
    let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
    for &(x, y) in points {
        for a in 0..op.n_amp() {
            let mut r = op.l_at(energy, c, a, x, y)? - op.r_at(c, a, x, y)?;
            if elastic {
                r -= op.driving_at(a, x, y)?;
            }
            max = max.max(r.abs());
            sum += r * r;
            count += 1;
        }
    }
    let rms = if count > 0 {
        (sum / count as f64).sqrt()
    } else {
        0.0
    };
    Ok(Residual { max, rms })
}
