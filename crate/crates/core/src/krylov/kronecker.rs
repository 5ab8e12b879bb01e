use nalgebra::DMatrix;

use super::eigen::{complex_eigen, C64};
use super::operator::LinearOperator;
use crate::error::{FyError, Result};

/// One axis of a Kronecker-sum operator: interpolation matrix `N` and
/// stiffness matrix `L` (both square, rows = collocation points).
#[derive(Debug, Clone)]
pub struct AxisFactor {
    pub n: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl AxisFactor {
    pub fn dim(&self) -> usize {
        self.n.nrows()
    }
}

#[derive(Debug, Clone)]
struct AxisInverse {
    u: DMatrix<C64>,
    d: Vec<C64>,
    /// `U⁻¹ N⁻¹`
    w: DMatrix<C64>,
}

/// Exact inverse of `L = Σ_q N ⊗ … ⊗ L_q ⊗ … ⊗ N`, one independent block
/// per amplitude, through `N_q⁻¹L_q = U_q D_q U_q⁻¹`:
/// `L⁻¹ = (⊗U_q)(Σ_q D_q)⁻¹(⊗U_q⁻¹N_q⁻¹)`.
#[derive(Debug, Clone)]
pub struct KroneckerPreconditioner {
    dims: Vec<usize>,
    blocks: Vec<Vec<AxisInverse>>,
}

/// Factorizes every axis of every amplitude block. All blocks must share
/// the same axis dimensions.
pub fn build_precond(blocks: &[Vec<AxisFactor>]) -> Result<KroneckerPreconditioner> {
    let first = blocks
        .first()
        .ok_or_else(|| FyError::InvalidArgument("no amplitude blocks".into()))?;
    let dims: Vec<usize> = first.iter().map(AxisFactor::dim).collect();
    if dims.is_empty() || dims.len() > 3 {
        return Err(FyError::InvalidArgument(format!(
            "rank {} not in 1..=3",
            dims.len()
        )));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        let bd: Vec<usize> = block.iter().map(AxisFactor::dim).collect();
        if bd != dims {
            return Err(FyError::DimensionMismatch {
                context: "preconditioner block",
                expected: dims.len(),
                got: bd.len(),
            });
        }
        let axes = block.iter().map(factorize).collect::<Result<Vec<_>>>()?;
        out.push(axes);
    }
    Ok(KroneckerPreconditioner { dims, blocks: out })
}

fn factorize(f: &AxisFactor) -> Result<AxisInverse> {
    let n = f.dim();
    if f.n.ncols() != n || f.l.nrows() != n || f.l.ncols() != n {
        return Err(FyError::DimensionMismatch {
            context: "axis factor",
            expected: n,
            got: f.l.nrows(),
        });
    }
    let n_inv =
        f.n.clone()
            .try_inverse()
            .ok_or_else(|| FyError::Singular("axis interpolation matrix N is singular".into()))?;
    let m = &n_inv * &f.l;
    let eig = complex_eigen(&m)?;
    let scale = m.amax().max(1.0);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()));
    let rec = &eig.vectors * diag * &eig.inverse;
    let err = rec
        .iter()
        .zip(m.iter())
        .map(|(a, &b)| (a - C64::new(b, 0.0)).norm())
        .fold(0.0, f64::max);
    if err > 1e-10 * scale {
        return Err(FyError::Eigen(format!(
            "axis reconstruction error {err:e}; perturb the grid"
        )));
    }
    let w = &eig.inverse * n_inv.map(|v| C64::new(v, 0.0));
    Ok(AxisInverse {
        u: eig.vectors,
        d: eig.values,
        w,
    })
}

impl KroneckerPreconditioner {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_amp(&self) -> usize {
        self.blocks.len()
    }

    fn block_len(&self) -> usize {
        self.dims.iter().product()
    }

    fn apply_block(&self, axes: &[AxisInverse], x: &[f64], y: &mut [f64]) {
        let mut c: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        for (a, ax) in axes.iter().enumerate() {
            c = mode_product(&c, &self.dims, a, &ax.w);
        }
        let mut idx = vec![0usize; self.dims.len()];
        for v in c.iter_mut() {
            let s: C64 = idx.iter().zip(axes).map(|(&i, ax)| ax.d[i]).sum();
            *v /= s;
            increment(&mut idx, &self.dims);
        }
        for (a, ax) in axes.iter().enumerate() {
            c = mode_product(&c, &self.dims, a, &ax.u);
        }
        for (yi, ci) in y.iter_mut().zip(&c) {
            *yi = ci.re;
        }
    }
}

impl LinearOperator for KroneckerPreconditioner {
    fn dim(&self) -> usize {
        self.blocks.len() * self.block_len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.block_len();
        for (a, axes) in self.blocks.iter().enumerate() {
            self.apply_block(axes, &x[a * n..(a + 1) * n], &mut y[a * n..(a + 1) * n]);
        }
    }
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return;
        }
        idx[a] = 0;
    }
}

/// Multiplies a row-major tensor by `mat` along `axis`.
fn mode_product<T>(x: &[T], dims: &[usize], axis: usize, mat: &DMatrix<T>) -> Vec<T>
where
    T: nalgebra::ComplexField + Copy,
{
    let n = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![T::zero(); x.len()];
    for o in 0..outer {
        let base = o * n * inner;
        for i in 0..n {
            let dst = &mut out[base + i * inner..base + (i + 1) * inner];
            for k in 0..n {
                let m = mat[(i, k)];
                let src = &x[base + k * inner..base + (k + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += m * s;
                }
            }
        }
    }
    out
}

/// Multiplies a row-major real tensor by `mat` along one axis.
pub fn mode_apply(x: &[f64], dims: &[usize], axis: usize, mat: &DMatrix<f64>) -> Vec<f64> {
    mode_product(x, dims, axis, mat)
}

/// `(A_0 ⊗ A_1 ⊗ …) x` for a row-major tensor `x`.
pub fn kron_apply(mats: &[&DMatrix<f64>], x: &[f64]) -> Vec<f64> {
    let dims: Vec<usize> = mats.iter().map(|m| m.nrows()).collect();
    let mut c = x.to_vec();
    for (a, m) in mats.iter().enumerate() {
        c = mode_product(&c, &dims, a, m);
    }
    c
}
