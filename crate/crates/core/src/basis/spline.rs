use super::grid::Grid1D;
use crate::error::{FyError, Result};

/// Cubic Hermite spline basis on a [`Grid1D`].
///
/// Node `q_j` carries two functions: `S_{2j}` (unit value, zero slope) and
/// `S_{2j+1}` (zero value, unit slope). Both are supported on
/// `[q_{j-1}, q_{j+1}]` and are C¹ across interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    grid: Grid1D,
}

/// Non-zero basis values inside one interval: entries are `S_{2j} … S_{2j+3}`
/// for interval `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineLocal {
    pub interval: usize,
    pub vals: [f64; 4],
}

impl SplineLocal {
    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.vals {
            *v *= factor;
        }
        self
    }
}

impl SplineBasis {
    pub fn new(grid: Grid1D) -> Self {
        SplineBasis { grid }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Number of basis functions, `2(n + 1)`.
    pub fn len(&self) -> usize {
        2 * self.grid.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The four basis functions that can be non-zero at `q`, differentiated
    /// `d` times. `None` if `q` lies outside the grid.
    pub fn local(&self, q: f64, d: u8) -> Option<SplineLocal> {
        let j = self.grid.locate(q)?;
        let nodes = self.grid.nodes();
        let (a, b) = (nodes[j], nodes[j + 1]);
        Some(SplineLocal {
            interval: j,
            vals: hermite_on_interval(a, b, q, d),
        })
    }

    /// Expansion `Σ_i c_i S_i^{(d)}(q)`; zero outside the grid.
    pub fn eval(&self, coeffs: &[f64], q: f64, d: u8) -> f64 {
        match self.local(q, d) {
            Some(loc) => {
                let s = 2 * loc.interval;
                (0..4).map(|a| loc.vals[a] * coeffs[s + a]).sum()
            }
            None => 0.0,
        }
    }
}

/// Cubic Hermite shape functions on `[a, b]` at `q`: value/slope at `a`,
/// value/slope at `b`, differentiated `d` times.
pub(crate) fn hermite_on_interval(a: f64, b: f64, q: f64, d: u8) -> [f64; 4] {
    let h = b - a;
    let t = (q - a) / h;
    let t2 = t * t;
    match d {
        0 => {
            let t3 = t2 * t;
            [
                2.0 * t3 - 3.0 * t2 + 1.0,
                h * (t3 - 2.0 * t2 + t),
                -2.0 * t3 + 3.0 * t2,
                h * (t3 - t2),
            ]
        }
        1 => [
            (6.0 * t2 - 6.0 * t) / h,
            3.0 * t2 - 4.0 * t + 1.0,
            (-6.0 * t2 + 6.0 * t) / h,
            3.0 * t2 - 2.0 * t,
        ],
        2 => [
            (12.0 * t - 6.0) / (h * h),
            (6.0 * t - 4.0) / h,
            (-12.0 * t + 6.0) / (h * h),
            (6.0 * t - 2.0) / h,
        ],
        _ => [0.0; 4],
    }
}

/// Value of `S_i^{(d)}(q)`.
///
/// At an interior node the second derivative is taken from the interval on
/// the right (first and zeroth derivatives are continuous there).
pub fn spline_value(basis: &SplineBasis, i: usize, q: f64, d: u8) -> Result<f64> {
    if i >= basis.len() {
        return Err(FyError::InvalidArgument(format!(
            "basis index {i} out of range 0..{}",
            basis.len()
        )));
    }
    if d > 2 {
        return Err(FyError::InvalidArgument(format!(
            "derivative order {d} > 2"
        )));
    }
    let loc = basis.local(q, d).ok_or(FyError::OutsideGrid {
        point: q,
        max: basis.grid().q_max(),
    })?;
    let s = 2 * loc.interval;
    Ok(if (s..s + 4).contains(&i) {
        loc.vals[i - s]
    } else {
        0.0
    })
}
