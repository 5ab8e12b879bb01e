use crate::error::{FyError, Result};

/// Distribution of the radial nodes on `[0, q_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMapping {
    Uniform,
    /// Interval widths grow as `w, w r, w r², …`.
    Geometric {
        ratio: f64,
    },
    /// `q_i = s·tan(θ_i)` with `θ` uniform on `[0, atan(q_max/s)]`.
    Tangent {
        scale: f64,
    },
}

impl Default for GridMapping {
    fn default() -> Self {
        GridMapping::Geometric { ratio: 1.1 }
    }
}

/// Radial grid `0 = q_0 < q_1 < … < q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    mapping: Option<GridMapping>,
}

/// Builds a grid with `n` intervals (`n + 1` nodes) on `[0, q_max]`.
pub fn make_grid(n: usize, q_max: f64, mapping: GridMapping) -> Result<Grid1D> {
    if n < 2 {
        return Err(FyError::InvalidGrid(format!(
            "need at least 2 intervals, got {n}"
        )));
    }
    if !(q_max > 0.0 && q_max.is_finite()) {
        return Err(FyError::InvalidGrid(format!(
            "q_max must be positive, got {q_max}"
        )));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    match mapping {
        GridMapping::Uniform => {
            let h = q_max / n as f64;
            nodes.extend((0..=n).map(|i| i as f64 * h));
        }
        GridMapping::Geometric { ratio } => {
            if !(ratio > 1.0 && ratio.is_finite()) {
                return Err(FyError::InvalidGrid(format!(
                    "geometric ratio must be > 1, got {ratio}"
                )));
            }
            let w = q_max * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
            let mut q = 0.0;
            let mut width = w;
            nodes.push(0.0);
            for _ in 0..n {
                q += width;
                width *= ratio;
                nodes.push(q);
            }
        }
        GridMapping::Tangent { scale } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(FyError::InvalidGrid(format!(
                    "tangent scale must be positive, got {scale}"
                )));
            }
            let theta_max = (q_max / scale).atan();
            nodes.extend((0..=n).map(|i| scale * (theta_max * i as f64 / n as f64).tan()));
        }
    }
    // pin the end points against roundoff
    nodes[0] = 0.0;
    nodes[n] = q_max;
    let grid = Grid1D {
        nodes,
        mapping: Some(mapping),
    };
    grid.check()?;
    Ok(grid)
}

impl Grid1D {
    /// Grid from explicit nodes; they must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let grid = Grid1D {
            nodes,
            mapping: None,
        };
        grid.check()?;
        Ok(grid)
    }

    fn check(&self) -> Result<()> {
        if self.nodes.len() < 3 {
            return Err(FyError::InvalidGrid(format!(
                "need at least 3 nodes, got {}",
                self.nodes.len()
            )));
        }
        if self.nodes[0] != 0.0 {
            return Err(FyError::InvalidGrid(format!(
                "first node must be 0, got {}",
                self.nodes[0]
            )));
        }
        if let Some(w) = self
            .nodes
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(FyError::InvalidGrid(format!(
                "nodes must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of intervals `n`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn q_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn mapping(&self) -> Option<GridMapping> {
        self.mapping
    }

    /// Interval `j` with `q ∈ [q_j, q_{j+1})`; the last node belongs to the
    /// last interval. `None` outside `[0, q_max]`.
    pub fn locate(&self, q: f64) -> Option<usize> {
        let n = self.intervals();
        if !(q >= 0.0 && q <= self.q_max()) {
            return None;
        }
        // first node strictly greater than q
        let upper = self.nodes.partition_point(|&node| node <= q);
        Some(upper.saturating_sub(1).min(n - 1))
    }
}
