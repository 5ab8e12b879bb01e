//! Short-range pair potentials and the S-wave two-body bound state.

use nalgebra::DMatrix;

use crate::basis::{gauss_legendre, AxisBasis, Grid1D, OuterBoundary};
use crate::error::{FyError, Result};
use crate::krylov::{
    dense_reference_solve, inverse_iteration, InverseIterationConfig, SolverStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `s·exp(−(x/r)²)`
    Gaussian,
    /// `s·exp(−x/r)/x`
    Yukawa,
    /// `s·exp(−x/r)`
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    pub shape: Shape,
    pub strength: f64,
    pub range: f64,
    /// Amplitudes this term acts in; `None` means all.
    pub amplitudes: Option<Vec<usize>>,
}

impl PotentialTerm {
    pub fn new(shape: Shape, strength: f64, range: f64) -> Self {
        PotentialTerm {
            shape,
            strength,
            range,
            amplitudes: None,
        }
    }

    fn value(&self, x: f64) -> f64 {
        let t = x / self.range;
        self.strength
            * match self.shape {
                Shape::Gaussian => (-t * t).exp(),
                Shape::Yukawa => (-t).exp() / x,
                Shape::Exponential => (-t).exp(),
            }
    }

    fn acts_on(&self, alpha: usize) -> bool {
        self.amplitudes.as_ref().is_none_or(|a| a.contains(&alpha))
    }
}

/// Sum of pair-potential terms in units where `ħ²/m = 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialSpec {
    terms: Vec<PotentialTerm>,
}

impl PotentialSpec {
    pub fn new(terms: Vec<PotentialTerm>) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if !(t.range > 0.0 && t.range.is_finite()) {
                return Err(FyError::InvalidArgument(format!(
                    "term {k}: range {} must be positive",
                    t.range
                )));
            }
            if !t.strength.is_finite() {
                return Err(FyError::InvalidArgument(format!(
                    "term {k}: strength is not finite"
                )));
            }
        }
        Ok(PotentialSpec { terms })
    }

    pub fn gaussian(strength: f64, range: f64) -> Result<Self> {
        Self::new(vec![PotentialTerm::new(Shape::Gaussian, strength, range)])
    }

    pub fn zero() -> Self {
        PotentialSpec::default()
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.strength == 0.0)
    }

    /// Terms acting in amplitude `alpha`, as a single-amplitude spec.
    pub fn restricted(&self, alpha: usize) -> PotentialSpec {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.acts_on(alpha))
            .map(|t| PotentialTerm {
                amplitudes: None,
                ..t.clone()
            })
            .collect();
        PotentialSpec { terms }
    }

    pub fn eval(&self, alpha: usize, x: f64) -> Result<f64> {
        potential_eval(self, alpha, x)
    }
}

/// `v_α(x)`.
pub fn potential_eval(spec: &PotentialSpec, alpha: usize, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "potential requested at x = {x}"
        )));
    }
    let mut v = 0.0;
    for t in spec.terms.iter().filter(|t| t.acts_on(alpha)) {
        if x == 0.0 && t.shape == Shape::Yukawa {
            return Err(FyError::InvalidArgument(
                "Yukawa term diverges at x = 0".into(),
            ));
        }
        v += t.value(x);
    }
    Ok(v)
}

/// Bound pair: energy and reduced radial function `u(x)` with `u(0) = 0`,
/// `u(x_max) = 0`, `∫u² = 1`, `u'(0) > 0`.
#[derive(Debug, Clone)]
pub struct PairSolution {
    pub energy: f64,
    basis: AxisBasis,
    coeffs: Vec<f64>,
    pub stats: PairStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub outer_iterations: usize,
}

impl PairSolution {
    pub fn grid(&self) -> &Grid1D {
        self.basis.grid()
    }

    pub fn basis(&self) -> &AxisBasis {
        &self.basis
    }

    /// Coefficients in the boundary-adapted basis.
    pub fn reduced_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Full Hermite coefficients (value/slope per node).
    pub fn u_coeffs(&self) -> Vec<f64> {
        self.basis.to_hermite(&self.coeffs)
    }

    /// `u^{(d)}(x)`; zero beyond the grid.
    pub fn u(&self, x: f64, d: u8) -> f64 {
        self.basis.eval(&self.coeffs, x, d)
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.basis, &self.coeffs)
    }
}

fn norm_sq(basis: &AxisBasis, c: &[f64]) -> f64 {
    let rule = gauss_legendre(6).expect("order 6");
    basis
        .grid()
        .nodes()
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], |x| basis.eval(c, x, 0).powi(2)))
        .sum()
}

/// Solves `(ε + d²/dx² − v(x)) u = 0` with `u(0) = u(x_max) = 0` for the
/// level nearest `lambda0`, by collocation and inverse iteration.
pub fn solve_pair(spec: &PotentialSpec, grid: &Grid1D, lambda0: f64) -> Result<PairSolution> {
    solve_pair_with(
        spec,
        0,
        grid,
        lambda0,
        InverseIterationConfig {
            tol_e: 1e-12,
            max_outer: 1000,
        },
    )
}

/// Ground pair state of amplitude `alpha`, with the shift placed just
/// below a dense estimate of the lowest level.
pub fn solve_pair_ground(
    spec: &PotentialSpec,
    alpha: usize,
    grid: &Grid1D,
) -> Result<PairSolution> {
    let basis = AxisBasis::new(grid.clone(), OuterBoundary::Dirichlet)?;
    let n = basis.dim();
    let nm = basis.matrix(0);
    let d2 = basis.matrix(2);
    let v: Vec<f64> = basis
        .collocation_points()
        .iter()
        .map(|&x| potential_eval(spec, alpha, x))
        .collect::<Result<_>>()?;
    let h = DMatrix::from_fn(n, n, |i, k| -d2[(i, k)] + v[i] * nm[(i, k)]);
    let ninv = nm
        .try_inverse()
        .ok_or_else(|| FyError::Singular("collocation matrix".into()))?;
    let lowest = (ninv * h)
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-8 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !(lowest < 0.0) {
        return Err(FyError::NoBoundState {
            guess: lowest,
            reason: "pair potential has no bound state on this grid".into(),
        });
    }
    let shift = lowest - 1e-3 * lowest.abs();
    solve_pair_with(
        spec,
        alpha,
        grid,
        shift,
        InverseIterationConfig {
            tol_e: 1e-13,
            max_outer: 1000,
        },
    )
}

pub fn solve_pair_with(
    spec: &PotentialSpec,
    alpha: usize,
    grid: &Grid1D,
    lambda0: f64,
    cfg: InverseIterationConfig,
) -> Result<PairSolution> {
    if !(lambda0 < 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "energy guess {lambda0} must be negative"
        )));
    }
    let basis = AxisBasis::new(grid.clone(), OuterBoundary::Dirichlet)?;
    let n = basis.dim();
    let nm = basis.matrix(0);
    let d2 = basis.matrix(2);
    let v: Vec<f64> = basis
        .collocation_points()
        .iter()
        .map(|&x| potential_eval(spec, alpha, x))
        .collect::<Result<_>>()?;
    // (−D2 + vN − λ₀N) y = N x
    let shifted = DMatrix::from_fn(n, n, |i, k| -d2[(i, k)] + (v[i] - lambda0) * nm[(i, k)]);
    let lu = shifted.clone().lu();
    if !lu.is_invertible() {
        return Err(FyError::Singular(
            "energy guess coincides with a pair level".into(),
        ));
    }
    let solve = |x: &[f64], _: Option<f64>| -> Result<(Vec<f64>, SolverStats)> {
        let rhs = &nm * nalgebra::DVector::from_column_slice(x);
        Ok((
            dense_reference_solve(&shifted, rhs.as_slice())?,
            SolverStats::default(),
        ))
    };
    let q = grid.q_max();
    let x0 = basis.interpolate(
        |x| x * (-x / q * 4.0).exp(),
        |x| (1.0 - 4.0 * x / q) * (-x / q * 4.0).exp(),
    );
    let eig = inverse_iteration(solve, &x0, lambda0, cfg).map_err(|e| match e {
        FyError::NotConverged { .. } => FyError::NoBoundState {
            guess: lambda0,
            reason: e.to_string(),
        },
        other => other,
    })?;
    if !(eig.lambda < 0.0) {
        return Err(FyError::NoBoundState {
            guess: lambda0,
            reason: format!("iteration converged to ε = {} ≥ 0", eig.lambda),
        });
    }
    let mut coeffs = eig.vector;
    let scale = norm_sq(&basis, &coeffs).sqrt();
    let sign = if basis.eval(&coeffs, 0.0, 1) < 0.0 {
        -1.0
    } else {
        1.0
    };
    coeffs.iter_mut().for_each(|c| *c *= sign / scale);
    Ok(PairSolution {
        energy: eig.lambda,
        basis,
        coeffs,
        stats: PairStats {
            outer_iterations: eig.outer_iterations,
        },
    })
}
