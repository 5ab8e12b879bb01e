//! Four identical bosons in the S-wave: the 3 + 1 component `φ₁` and the
//! 2 + 2 component `φ₂`, functions of three Jacobi radii `(x, y, z)`.

mod operator;
mod solve;

pub use operator::Operator4;
pub use solve::{solve_bound4, three_body_threshold, BoundState4};

use crate::basis::{gauss_legendre, Grid1D, QuadratureRule};
use crate::error::{FyError, Result};
use crate::twobody::PotentialSpec;

/// Rotated radii entering the coupling terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maps4Result {
    pub x_p: f64,
    pub y_p1: f64,
    pub y_pp1: f64,
    pub z_pp1: f64,
    pub y_pp2: f64,
    pub z_pp2: f64,
    pub y_hat1: f64,
    pub z_hat1: f64,
}

pub fn maps4(x: f64, y: f64, z: f64, u: f64, v: f64) -> Result<Maps4Result> {
    if !(u.abs() <= 1.0 && v.abs() <= 1.0) {
        return Err(FyError::InvalidArgument(format!(
            "cosines ({u}, {v}) outside [-1, 1]"
        )));
    }
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "negative radius ({x}, {y}, {z})"
        )));
    }
    let (x_p, y_p1) = crate::fy3::map3_raw(x, y, u);
    let (y_pp1, z_pp1) = map_k(y_p1, z, v);
    let (y_pp2, z_pp2) = map_h(y_p1, z, v);
    let (y_hat1, z_hat1) = map_h(x, z, v);
    Ok(Maps4Result {
        x_p,
        y_p1,
        y_pp1,
        z_pp1,
        y_pp2,
        z_pp2,
        y_hat1,
        z_hat1,
    })
}

/// `(y″₁, z″₁)`: `⅑y² + ⁸⁄₉z² + (4√2/9)yzv`, `⁸⁄₉y² + ⅑z² − (4√2/9)yzv`.
pub(crate) fn map_k(y: f64, z: f64, v: f64) -> (f64, f64) {
    let c = 4.0 * 2f64.sqrt() / 9.0 * y * z * v;
    let a = y * y / 9.0 + 8.0 * z * z / 9.0 + c;
    let b = 8.0 * y * y / 9.0 + z * z / 9.0 - c;
    (a.max(0.0).sqrt(), b.max(0.0).sqrt())
}

/// `⅓y² + ⅔z² − (2√2/3)yzv`, `⅔y² + ⅓z² + (2√2/3)yzv`.
pub(crate) fn map_h(y: f64, z: f64, v: f64) -> (f64, f64) {
    let c = 2.0 * 2f64.sqrt() / 3.0 * y * z * v;
    let a = y * y / 3.0 + 2.0 * z * z / 3.0 - c;
    let b = 2.0 * y * y / 3.0 + z * z / 3.0 + c;
    (a.max(0.0).sqrt(), b.max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub struct Problem4 {
    pub potential: PotentialSpec,
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub grid_z: Grid1D,
    pub quad_u: QuadratureRule,
    pub quad_v: QuadratureRule,
    /// Energy guess (shift of the inverse iteration).
    pub lambda0: f64,
    /// Lowest breakup threshold `E₃`. When absent it is computed on the x
    /// and y grids.
    pub threshold: Option<f64>,
}

impl Problem4 {
    pub fn new(
        potential: PotentialSpec,
        grids: [Grid1D; 3],
        quad_orders: [usize; 2],
        lambda0: f64,
    ) -> Result<Self> {
        let [grid_x, grid_y, grid_z] = grids;
        Ok(Problem4 {
            potential,
            grid_x,
            grid_y,
            grid_z,
            quad_u: gauss_legendre(quad_orders[0])?,
            quad_v: gauss_legendre(quad_orders[1])?,
            lambda0,
            threshold: None,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self
    }
}
