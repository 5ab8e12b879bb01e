//! Three identical particles in the S-wave: Faddeev components `φ_α(x, y)`
//! obeying
//!
//! `(E + ∂²_x + ∂²_y − v_α(x)) φ_α = v_α(x) Σ_β c_αβ ½∫_{−1}^{1} du (xy/x′y′) φ_β(x′, y′)`
//!
//! with `(x′, y′)` the Jacobi pair of a neighbouring particle partition.

mod operator;
mod solve;

pub use operator::Operator3;
pub use solve::{
    residual3, solve_bound3, solve_elastic3, BoundState3, ElasticResult3, Residual, SolveResult3,
};

use crate::basis::{gauss_legendre, Grid1D, QuadratureRule};
use crate::error::{FyError, Result};
use crate::twobody::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Three bosons, total L = 0.
    Boson,
    /// Three spin-½ fermions, J = 3/2.
    Fermion32,
    /// Three spin-½ fermions, J = 1/2 (two amplitudes).
    Fermion12,
}

impl SystemKind {
    pub fn n_amp(self) -> usize {
        match self {
            SystemKind::Fermion12 => 2,
            _ => 1,
        }
    }

    /// Row-major `n_a × n_a` coupling matrix.
    pub fn coupling(self) -> Vec<f64> {
        match self {
            SystemKind::Boson => vec![2.0],
            SystemKind::Fermion32 => vec![-1.0],
            SystemKind::Fermion12 => vec![0.5, 1.5, 1.5, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SWaveSystem3 {
    kind: SystemKind,
    coupling: Vec<f64>,
    potentials: Vec<PotentialSpec>,
}

impl SWaveSystem3 {
    /// Splits `potential` by amplitude assignment.
    pub fn new(kind: SystemKind, potential: &PotentialSpec) -> Self {
        let potentials = (0..kind.n_amp()).map(|a| potential.restricted(a)).collect();
        SWaveSystem3 {
            kind,
            coupling: kind.coupling(),
            potentials,
        }
    }

    /// Replaces the coupling matrix (row-major, `n_a × n_a`).
    pub fn with_coupling(mut self, coupling: Vec<f64>) -> Result<Self> {
        let n = self.n_amp();
        if coupling.len() != n * n {
            return Err(FyError::DimensionMismatch {
                context: "coupling matrix",
                expected: n * n,
                got: coupling.len(),
            });
        }
        self.coupling = coupling;
        Ok(self)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn n_amp(&self) -> usize {
        self.kind.n_amp()
    }

    pub fn coupling(&self, alpha: usize, beta: usize) -> f64 {
        self.coupling[alpha * self.n_amp() + beta]
    }

    pub fn coupling_matrix(&self) -> &[f64] {
        &self.coupling
    }

    pub fn potential(&self, alpha: usize) -> &PotentialSpec {
        &self.potentials[alpha]
    }
}

/// Jacobi coordinates of the rotated partition,
/// `x′² = ¼x² + ¾y² − (√3/2)xyu`, `y′² = ¾x² + ¼y² + (√3/2)xyu`.
pub fn map3(x: f64, y: f64, u: f64) -> Result<(f64, f64)> {
    if !(u.abs() <= 1.0) {
        return Err(FyError::InvalidArgument(format!(
            "cosine {u} outside [-1, 1]"
        )));
    }
    if !(x >= 0.0 && y >= 0.0) {
        return Err(FyError::InvalidArgument(format!(
            "negative radius ({x}, {y})"
        )));
    }
    Ok(map3_raw(x, y, u))
}

pub(crate) fn map3_raw(x: f64, y: f64, u: f64) -> (f64, f64) {
    let c = 0.75f64.sqrt() * x * y * u;
    let xp2 = 0.25 * x * x + 0.75 * y * y - c;
    let yp2 = 0.75 * x * x + 0.25 * y * y + c;
    (xp2.max(0.0).sqrt(), yp2.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode3 {
    Bound,
    /// 1 + (2) scattering at total energy `energy`; `channel` is the
    /// amplitude carrying the bound pair.
    Elastic {
        energy: f64,
        channel: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Problem3 {
    pub system: SWaveSystem3,
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub quad: QuadratureRule,
    pub mode: Mode3,
}

impl Problem3 {
    pub fn bound(
        system: SWaveSystem3,
        grid_x: Grid1D,
        grid_y: Grid1D,
        quad_order: usize,
    ) -> Result<Self> {
        Ok(Problem3 {
            system,
            grid_x,
            grid_y,
            quad: gauss_legendre(quad_order)?,
            mode: Mode3::Bound,
        })
    }

    pub fn elastic(
        system: SWaveSystem3,
        grid_x: Grid1D,
        grid_y: Grid1D,
        quad_order: usize,
        energy: f64,
        channel: usize,
    ) -> Result<Self> {
        if channel >= system.n_amp() {
            return Err(FyError::InvalidArgument(format!(
                "channel {channel} out of range"
            )));
        }
        Ok(Problem3 {
            system,
            grid_x,
            grid_y,
            quad: gauss_legendre(quad_order)?,
            mode: Mode3::Elastic { energy, channel },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn map3_examples() {
        let (a, b) = map3(1.0, 1.0, 0.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let y = 0.7;
        let (a, _) = map3(3f64.sqrt() * y, y, 1.0).unwrap();
        assert!(a < 1e-7);
        assert!(map3(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn coupling_matrices() {
        let s = SWaveSystem3::new(SystemKind::Fermion12, &PotentialSpec::zero());
        assert_eq!(s.coupling(0, 1), s.coupling(1, 0));
        assert_eq!(s.coupling(0, 0), 0.5);
        assert_eq!(SystemKind::Boson.coupling(), vec![2.0]);
        assert_eq!(SystemKind::Fermion32.coupling(), vec![-1.0]);
    }

    proptest! {
        #[test]
        fn map3_is_orthogonal(x in 0.0f64..50.0, y in 0.0f64..50.0, u in -1.0f64..1.0) {
            let (a, b) = map3(x, y, u).unwrap();
            let r2 = x * x + y * y;
            prop_assert!((a * a + b * b - r2).abs() <= 1e-12 * r2.max(1e-300));
        }
    }
}
