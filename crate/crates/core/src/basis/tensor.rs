use super::axis::{AxisBasis, Local};
use super::spline::SplineBasis;
use crate::error::{FyError, Result};

/// A one-dimensional basis with local support.
pub trait Basis1D {
    fn dim(&self) -> usize;
    /// Non-zero functions at `q`, `None` outside the grid.
    fn window(&self, q: f64, d: u8) -> Option<Local>;
    fn q_max(&self) -> f64;
}

impl Basis1D for SplineBasis {
    fn dim(&self) -> usize {
        self.len()
    }

    fn window(&self, q: f64, d: u8) -> Option<Local> {
        self.local(q, d).map(|raw| Local {
            start: 2 * raw.interval,
            len: 4,
            vals: raw.vals,
        })
    }

    fn q_max(&self) -> f64 {
        self.grid().q_max()
    }
}

impl Basis1D for AxisBasis {
    fn dim(&self) -> usize {
        AxisBasis::dim(self)
    }

    fn window(&self, q: f64, d: u8) -> Option<Local> {
        self.local(q, d)
    }

    fn q_max(&self) -> f64 {
        self.grid().q_max()
    }
}

/// Coefficients of `n_amp` tensor-product expansions over two or three
/// axes, stored amplitude-major then row-major (`[α][i][j]` or `[α][i][j][k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCoefficients {
    dims: Vec<usize>,
    n_amp: usize,
    data: Vec<f64>,
}

impl TensorCoefficients {
    pub fn zeros(dims: &[usize], n_amp: usize) -> Result<Self> {
        Self::check_shape(dims, n_amp)?;
        let len = n_amp * dims.iter().product::<usize>();
        Ok(TensorCoefficients {
            dims: dims.to_vec(),
            n_amp,
            data: vec![0.0; len],
        })
    }

    pub fn from_vec(dims: &[usize], n_amp: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_shape(dims, n_amp)?;
        let len = n_amp * dims.iter().product::<usize>();
        if data.len() != len {
            return Err(FyError::DimensionMismatch {
                context: "tensor coefficients",
                expected: len,
                got: data.len(),
            });
        }
        Ok(TensorCoefficients {
            dims: dims.to_vec(),
            n_amp,
            data,
        })
    }

    fn check_shape(dims: &[usize], n_amp: usize) -> Result<()> {
        if !(2..=3).contains(&dims.len()) {
            return Err(FyError::InvalidArgument(format!(
                "tensor rank {} not in 2..=3",
                dims.len()
            )));
        }
        if n_amp == 0 || dims.contains(&0) {
            return Err(FyError::InvalidArgument("empty tensor dimension".into()));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_amp(&self) -> usize {
        self.n_amp
    }

    /// Length of one amplitude block.
    pub fn block_len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, alpha: usize) -> &[f64] {
        let n = self.block_len();
        &self.data[alpha * n..(alpha + 1) * n]
    }

    /// Flat index of `c_{α, idx}`.
    pub fn index(&self, alpha: usize, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(alpha, |acc, (&i, &n)| acc * n + i)
    }
}

/// Evaluates `Σ c_{α,ij(k)} Π_axis B^{(d)}(point)` for one amplitude.
pub fn tensor_eval<B: Basis1D>(
    coeffs: &TensorCoefficients,
    bases: &[&B],
    alpha: usize,
    point: &[f64],
    d: &[u8],
) -> Result<f64> {
    let rank = coeffs.rank();
    if bases.len() != rank || point.len() != rank || d.len() != rank {
        return Err(FyError::DimensionMismatch {
            context: "tensor_eval axes",
            expected: rank,
            got: bases.len().min(point.len()).min(d.len()),
        });
    }
    for (b, &n) in bases.iter().zip(coeffs.dims()) {
        if b.dim() != n {
            return Err(FyError::DimensionMismatch {
                context: "tensor_eval basis",
                expected: n,
                got: b.dim(),
            });
        }
    }
    if alpha >= coeffs.n_amp() {
        return Err(FyError::InvalidArgument(format!(
            "amplitude {alpha} out of range"
        )));
    }
    if let Some(&bad) = d.iter().find(|&&o| o > 2) {
        return Err(FyError::InvalidArgument(format!(
            "derivative order {bad} > 2"
        )));
    }
    let mut wins = Vec::with_capacity(rank);
    for (b, &q) in bases.iter().zip(point) {
        let win = b.window(q, d[wins.len()]).ok_or(FyError::OutsideGrid {
            point: q,
            max: b.q_max(),
        })?;
        wins.push(win);
    }
    let block = coeffs.block(alpha);
    let dims = coeffs.dims();
    let mut sum = 0.0;
    if rank == 2 {
        let (wx, wy) = (&wins[0], &wins[1]);
        for a in 0..wx.len {
            let row = (wx.start + a) * dims[1];
            let inner: f64 = (0..wy.len)
                .map(|b| wy.vals[b] * block[row + wy.start + b])
                .sum();
            sum += wx.vals[a] * inner;
        }
    } else {
        let (wx, wy, wz) = (&wins[0], &wins[1], &wins[2]);
        for a in 0..wx.len {
            let mut acc_y = 0.0;
            for b in 0..wy.len {
                let row = ((wx.start + a) * dims[1] + wy.start + b) * dims[2];
                let inner: f64 = (0..wz.len)
                    .map(|c| wz.vals[c] * block[row + wz.start + c])
                    .sum();
                acc_y += wy.vals[b] * inner;
            }
            sum += wx.vals[a] * acc_y;
        }
    }
    Ok(sum)
}
