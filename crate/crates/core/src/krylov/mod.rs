//! Matrix-free linear algebra: operators, BiCGSTAB, the Kronecker-sum
//! preconditioner, inverse iteration and a dense LU reference solver.

mod bicgstab;
mod dense;
mod eigen;
mod inverse;
mod kronecker;
mod operator;

pub use bicgstab::{bicgstab, BicgstabConfig, SolverStats};
pub use dense::{dense_reference_solve, DENSE_LIMIT};
pub use eigen::{complex_eigen, ComplexEigen};
pub use inverse::{inverse_iteration, EigenResult, InverseIterationConfig};
pub use kronecker::{build_precond, kron_apply, mode_apply, AxisFactor, KroneckerPreconditioner};
pub use operator::{check_linearity, DenseOperator, FnOperator, Identity, LinearOperator};

/// Tolerances shared by the few-body eigen and linear solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop inverse iteration when successive energies differ by less.
    pub tol_e: f64,
    /// Relative residual of each BiCGSTAB solve.
    pub inner_tol: f64,
    pub max_inner: usize,
    pub max_outer: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_e: 1e-9,
            inner_tol: 1e-10,
            max_inner: 300,
            max_outer: 300,
        }
    }
}

impl SolverOptions {
    pub fn bicgstab(&self) -> BicgstabConfig {
        BicgstabConfig {
            tol: self.inner_tol,
            max_iter: self.max_inner,
        }
    }

    pub fn inverse_iteration(&self) -> InverseIterationConfig {
        InverseIterationConfig {
            tol_e: self.tol_e,
            max_outer: self.max_outer,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
