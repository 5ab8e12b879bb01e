use nalgebra::DMatrix;

use super::grid::Grid1D;
use super::spline::{SplineBasis, SplineLocal};
use crate::error::{FyError, Result};

/// Condition imposed at the outer end `q_n` of an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterBoundary {
    /// `φ(q_n) = 0`.
    Dirichlet,
    /// `value·φ(q_n) + slope·φ'(q_n) = 0`.
    Robin { value: f64, slope: f64 },
}

/// Window of non-zero reduced basis functions at a point:
/// functions `start .. start + len` with values `vals[..len]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Local {
    pub start: usize,
    pub len: usize,
    pub vals: [f64; 4],
}

impl Local {
    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        (0..self.len)
            .map(|a| self.vals[a] * coeffs[self.start + a])
            .sum()
    }
}

/// Boundary-adapted Hermite basis of one radial axis.
///
/// The value spline at the origin is dropped (components vanish linearly at
/// 0) and the two splines of the last node are merged into a single function
/// obeying the outer condition. This leaves `2n` functions, matched by two
/// Gauss collocation points per interval.
///
/// Reduced index `k < 2n - 1` is spline `S_{k+1}`; `k = 2n - 1` is the tail
/// `tail[0]·S_{2n} + tail[1]·S_{2n+1}`.
#[derive(Debug, Clone)]
pub struct AxisBasis {
    spline: SplineBasis,
    outer: OuterBoundary,
    tail: [f64; 2],
    colloc: Vec<f64>,
    colloc_local: [Vec<Local>; 3],
}

impl AxisBasis {
    pub fn new(grid: Grid1D, outer: OuterBoundary) -> Result<Self> {
        let tail = match outer {
            OuterBoundary::Dirichlet => [0.0, 1.0],
            OuterBoundary::Robin { value, slope } => {
                if !(value.is_finite() && slope.is_finite()) || (value == 0.0 && slope == 0.0) {
                    return Err(FyError::InvalidArgument(format!(
                        "Robin coefficients ({value}, {slope}) are degenerate"
                    )));
                }
                [slope, -value]
            }
        };
        let g = 0.5 / 3f64.sqrt();
        let colloc: Vec<f64> = grid
            .nodes()
            .windows(2)
            .flat_map(|w| {
                let (mid, h) = (0.5 * (w[0] + w[1]), w[1] - w[0]);
                [mid - g * h, mid + g * h]
            })
            .collect();
        let spline = SplineBasis::new(grid);
        let mut axis = AxisBasis {
            spline,
            outer,
            tail,
            colloc,
            colloc_local: [Vec::new(), Vec::new(), Vec::new()],
        };
        for d in 0..3u8 {
            let locals = axis
                .colloc
                .iter()
                .map(|&q| axis.local(q, d).expect("collocation point inside grid"))
                .collect();
            axis.colloc_local[d as usize] = locals;
        }
        Ok(axis)
    }

    pub fn grid(&self) -> &Grid1D {
        self.spline.grid()
    }

    pub fn spline(&self) -> &SplineBasis {
        &self.spline
    }

    pub fn outer(&self) -> OuterBoundary {
        self.outer
    }

    pub fn tail(&self) -> [f64; 2] {
        self.tail
    }

    /// Number of reduced basis functions (`2n`).
    pub fn dim(&self) -> usize {
        2 * self.grid().intervals()
    }

    pub fn q_max(&self) -> f64 {
        self.grid().q_max()
    }

    /// Collocation points, two Gauss points per interval, ascending.
    pub fn collocation_points(&self) -> &[f64] {
        &self.colloc
    }

    /// Basis window at collocation point `i`, differentiated `d` times.
    pub fn colloc_local(&self, i: usize, d: u8) -> &Local {
        &self.colloc_local[d as usize][i]
    }

    /// Maps raw Hermite values of one interval onto the reduced basis.
    pub fn reduce(&self, raw: &SplineLocal) -> Local {
        let n = self.grid().intervals();
        let j = raw.interval;
        let v = raw.vals;
        if j == 0 {
            // S_0 is dropped
            Local {
                start: 0,
                len: 3,
                vals: [v[1], v[2], v[3], 0.0],
            }
        } else if j == n - 1 {
            let t = self.tail[0] * v[2] + self.tail[1] * v[3];
            Local {
                start: 2 * j - 1,
                len: 3,
                vals: [v[0], v[1], t, 0.0],
            }
        } else {
            Local {
                start: 2 * j - 1,
                len: 4,
                vals: v,
            }
        }
    }

    /// Reduced basis window at `q`; `None` outside the grid.
    pub fn local(&self, q: f64, d: u8) -> Option<Local> {
        self.spline.local(q, d).map(|raw| self.reduce(&raw))
    }

    /// Window of `B_k(q)/q`. Below `1e-6·q_1` the ratio is replaced by its
    /// limit `B_k'(0)`, all reduced functions vanishing at the origin.
    pub fn local_over_q(&self, q: f64) -> Option<Local> {
        self.raw_over_q(q).map(|raw| self.reduce(&raw))
    }

    /// Raw Hermite window of `S_i(q)/q` with the same small-argument guard.
    pub fn raw_over_q(&self, q: f64) -> Option<SplineLocal> {
        if q < 0.0 {
            return None;
        }
        if q < 1e-6 * self.grid().nodes()[1] {
            return self.spline.local(0.0, 1);
        }
        Some(self.spline.local(q, 0)?.scaled(1.0 / q))
    }

    /// Expansion `Σ_k c_k B_k^{(d)}(q)`, zero outside the grid.
    pub fn eval(&self, coeffs: &[f64], q: f64, d: u8) -> f64 {
        self.local(q, d).map_or(0.0, |loc| loc.dot(coeffs))
    }

    /// Single reduced function `B_k^{(d)}(q)` from the global spline
    /// definition (no windowing).
    pub fn value(&self, k: usize, q: f64, d: u8) -> Result<f64> {
        let dim = self.dim();
        if k >= dim {
            return Err(FyError::InvalidArgument(format!(
                "reduced index {k} out of range 0..{dim}"
            )));
        }
        let sv = |i| super::spline::spline_value(&self.spline, i, q, d);
        if k < dim - 1 {
            sv(k + 1)
        } else {
            Ok(self.tail[0] * sv(dim)? + self.tail[1] * sv(dim + 1)?)
        }
    }

    /// Dense collocation matrix `M_{ik} = B_k^{(d)}(x̄_i)`.
    pub fn matrix(&self, d: u8) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, loc) in self.colloc_local[d as usize].iter().enumerate() {
            for a in 0..loc.len {
                m[(i, loc.start + a)] = loc.vals[a];
            }
        }
        m
    }

    /// Hermite interpolation of a function given its value and slope.
    /// The function is assumed to satisfy the boundary conditions; its value
    /// at the origin is ignored.
    pub fn interpolate<F, G>(&self, f: F, df: G) -> Vec<f64>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let nodes = self.grid().nodes();
        let n = self.grid().intervals();
        let mut c = vec![0.0; self.dim()];
        for (k, ck) in c.iter_mut().enumerate().take(2 * n - 1) {
            let s = k + 1;
            let q = nodes[s / 2];
            *ck = if s % 2 == 0 { f(q) } else { df(q) };
        }
        let q = nodes[n];
        c[2 * n - 1] = if self.tail[0].abs() >= self.tail[1].abs() {
            f(q) / self.tail[0]
        } else {
            df(q) / self.tail[1]
        };
        c
    }

    /// Overlap matrix `G_{kl} = ∫ B_k B_l dq` (exact Gauss rule per interval).
    pub fn gram(&self) -> DMatrix<f64> {
        let rule = super::quadrature::gauss_legendre(4).expect("order 4");
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for w in self.grid().nodes().windows(2) {
            let (a, b) = (w[0], w[1]);
            for (t, wt) in rule.iter() {
                let q = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let loc = self.local(q, 0).expect("inside grid");
                let s = 0.5 * (b - a) * wt;
                for p in 0..loc.len {
                    for r in 0..loc.len {
                        g[(loc.start + p, loc.start + r)] += s * loc.vals[p] * loc.vals[r];
                    }
                }
            }
        }
        g
    }

    /// Full Hermite coefficients (`2(n+1)` entries) of a reduced expansion.
    pub fn to_hermite(&self, coeffs: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut full = vec![0.0; dim + 2];
        full[1..dim].copy_from_slice(&coeffs[..dim - 1]);
        full[dim] = self.tail[0] * coeffs[dim - 1];
        full[dim + 1] = self.tail[1] * coeffs[dim - 1];
        full
    }
}
