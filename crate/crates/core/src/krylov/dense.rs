use nalgebra::{DMatrix, DVector};

use crate::error::{FyError, Result};

/// Largest system accepted by [`dense_reference_solve`].
pub const DENSE_LIMIT: usize = 5000;

/// LU with partial pivoting, for small reference problems.
pub fn dense_reference_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(FyError::DimensionMismatch {
            context: "dense solve",
            expected: n,
            got: b.len(),
        });
    }
    if n > DENSE_LIMIT {
        return Err(FyError::InvalidArgument(format!(
            "dense solve limited to {DENSE_LIMIT} unknowns, got {n}"
        )));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let dmax = u.diagonal().amax();
    let dmin = u
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(dmin > n as f64 * f64::EPSILON * dmax) {
        return Err(FyError::Singular(format!("pivot ratio {:e}", dmin / dmax)));
    }
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| FyError::Singular("LU solve failed".into()))?;
    Ok(x.as_slice().to_vec())
}
