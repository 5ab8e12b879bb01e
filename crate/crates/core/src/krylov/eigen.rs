use nalgebra::{Complex, DMatrix};

use crate::error::{FyError, Result};

pub type C64 = Complex<f64>;

/// Eigendecomposition `M = U·diag(d)·U⁻¹` of a real nonsymmetric matrix.
#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<C64>,
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
}

/// Complex Schur form followed by triangular back-substitution.
/// Errors when the eigenvector matrix is numerically singular (defective
/// input) or an eigenpair residual exceeds `1e-10·max(1, ‖M‖)`.
pub fn complex_eigen(m: &DMatrix<f64>) -> Result<ComplexEigen> {
    let n = m.nrows();
    if m.ncols() != n || n == 0 {
        return Err(FyError::Eigen(format!(
            "matrix must be square and non-empty, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let mc = m.map(|v| C64::new(v, 0.0));
    let schur = nalgebra::linalg::Schur::try_new(mc.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| FyError::Eigen("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        col /= C64::new(nrm, 0.0);
    }
    let values: Vec<C64> = t.diagonal().iter().copied().collect();
    let mnorm = m.amax().max(1.0);
    for (k, &lam) in values.iter().enumerate() {
        let v = vectors.column(k);
        let r = &mc * v - v * lam;
        let res = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if res > 1e-10 * mnorm {
            return Err(FyError::Eigen(format!(
                "eigenpair {k} residual {res:e}; perturb the grid"
            )));
        }
    }
    let lu = vectors.clone().lu();
    let inverse = lu.try_inverse().ok_or_else(|| {
        FyError::Eigen("eigenvector matrix singular (defective matrix); perturb the grid".into())
    })?;
    let cond = inverse.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !cond.is_finite() || cond > 1e12 {
        return Err(FyError::Eigen(format!(
            "eigenvector basis ill-conditioned ({cond:e}); perturb the grid"
        )));
    }
    Ok(ComplexEigen {
        values,
        vectors,
        inverse,
    })
}
