//! Radial discretisation: grids, cubic Hermite splines, boundary-adapted axis
//! bases, Gauss–Legendre rules and tensor-product expansions.

mod axis;
mod grid;
mod quadrature;
mod spline;
mod tensor;

pub use axis::{AxisBasis, Local, OuterBoundary};
pub use grid::{make_grid, Grid1D, GridMapping};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use spline::{spline_value, SplineBasis, SplineLocal};
pub use tensor::{tensor_eval, Basis1D, TensorCoefficients};
