use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{map3_raw, Mode3, Problem3};
use crate::basis::{AxisBasis, Local, OuterBoundary};
use crate::error::{FyError, Result};
use crate::krylov::{kron_apply, AxisFactor};
use crate::twobody::{potential_eval, solve_pair_ground, PairSolution, PotentialSpec};

#[derive(Debug, Clone, Copy)]
struct KernelEntry {
    wx: Local,
    wy: [Local; 2],
    weight: f64,
}

/// Collocation form of the three-body equations, applied matrix-free.
///
/// Unknowns are ordered `[α][i][j]` over the reduced x and y bases; rows are
/// ordered the same way over collocation points.
#[derive(Debug, Clone)]
pub struct Operator3 {
    n_amp: usize,
    coupling: Vec<f64>,
    bx: AxisBasis,
    by: Vec<AxisBasis>,
    potentials: Vec<PotentialSpec>,
    vx: Vec<Vec<f64>>,
    quad: Vec<(f64, f64)>,
    kernel: Vec<Option<KernelEntry>>,
    elastic: Option<Elastic>,
}

#[derive(Debug, Clone)]
struct Elastic {
    energy: f64,
    channel: usize,
    p: f64,
    pair: PairSolution,
}

impl Operator3 {
    pub fn new(problem: &Problem3) -> Result<Self> {
        let sys = &problem.system;
        let n_amp = sys.n_amp();
        let bx = AxisBasis::new(problem.grid_x.clone(), OuterBoundary::Dirichlet)?;
        let y_max = problem.grid_y.q_max();
        let elastic = match problem.mode {
            Mode3::Bound => None,
            Mode3::Elastic { energy, channel } => {
                let pair = solve_pair_ground(sys.potential(channel), channel, &problem.grid_x)?;
                let p2 = energy - pair.energy;
                if !(p2 > 0.0) || !(energy < 0.0) {
                    return Err(FyError::InvalidArgument(format!(
                        "elastic energy {energy} must lie between the pair level {} and 0",
                        pair.energy
                    )));
                }
                let p = p2.sqrt();
                let cos = (p * y_max).cos();
                if cos.abs() <= 0.1 {
                    return Err(FyError::MatchingNode { cos });
                }
                Some(Elastic {
                    energy,
                    channel,
                    p,
                    pair,
                })
            }
        };
        let by = (0..n_amp)
            .map(|a| {
                let outer = match &elastic {
                    Some(el) if el.channel == a => OuterBoundary::Robin {
                        value: el.p * (el.p * y_max).sin(),
                        slope: (el.p * y_max).cos(),
                    },
                    _ => OuterBoundary::Dirichlet,
                };
                AxisBasis::new(problem.grid_y.clone(), outer)
            })
            .collect::<Result<Vec<_>>>()?;
        let vx = (0..n_amp)
            .map(|a| {
                bx.collocation_points()
                    .iter()
                    .map(|&x| potential_eval(sys.potential(a), 0, x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let quad: Vec<(f64, f64)> = problem.quad.iter().collect();
        let mut op = Operator3 {
            n_amp,
            coupling: sys.coupling_matrix().to_vec(),
            bx,
            by,
            potentials: (0..n_amp).map(|a| sys.potential(a).clone()).collect(),
            vx,
            quad,
            kernel: Vec::new(),
            elastic,
        };
        let xs = op.bx.collocation_points().to_vec();
        let ys = op.by[0].collocation_points().to_vec();
        let nq = op.quad.len();
        let mut kernel = vec![None; xs.len() * ys.len() * nq];
        kernel
            .par_chunks_mut(ys.len() * nq)
            .zip(xs.par_iter())
            .for_each(|(row, &x)| {
                for (j, &y) in ys.iter().enumerate() {
                    for (k, &(u, w)) in op.quad.iter().enumerate() {
                        row[j * nq + k] = op.kernel_entry(x, y, u, w);
                    }
                }
            });
        op.kernel = kernel;
        Ok(op)
    }

    fn kernel_entry(&self, x: f64, y: f64, u: f64, w: f64) -> Option<KernelEntry> {
        let (xp, yp) = map3_raw(x, y, u);
        let wx = self.bx.local_over_q(xp)?;
        let raw = self.by[0].raw_over_q(yp)?;
        let mut wy = [self.by[0].reduce(&raw); 2];
        if self.n_amp > 1 {
            wy[1] = self.by[1].reduce(&raw);
        }
        Some(KernelEntry {
            wx,
            wy,
            weight: 0.5 * w * x * y,
        })
    }

    pub fn n_amp(&self) -> usize {
        self.n_amp
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.bx.dim(), self.by[0].dim()]
    }

    pub fn block_len(&self) -> usize {
        self.bx.dim() * self.by[0].dim()
    }

    pub fn len(&self) -> usize {
        self.n_amp * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn basis_x(&self) -> &AxisBasis {
        &self.bx
    }

    pub fn basis_y(&self, alpha: usize) -> &AxisBasis {
        &self.by[alpha]
    }

    pub fn coupling(&self, alpha: usize, beta: usize) -> f64 {
        self.coupling[alpha * self.n_amp + beta]
    }

    /// `v_α` at the x collocation points.
    pub fn potential_x(&self, alpha: usize) -> &[f64] {
        &self.vx[alpha]
    }

    pub fn quadrature(&self) -> &[(f64, f64)] {
        &self.quad
    }

    /// Pair state and channel momentum in elastic mode.
    pub fn channel(&self) -> Option<(&PairSolution, f64, usize)> {
        self.elastic.as_ref().map(|e| (&e.pair, e.p, e.channel))
    }

    pub fn elastic_energy(&self) -> Option<f64> {
        self.elastic.as_ref().map(|e| e.energy)
    }

    fn check(&self, c: &[f64], out: &[f64]) {
        assert_eq!(c.len(), self.len(), "coefficient length");
        assert_eq!(out.len(), self.len(), "output length");
    }

    /// `(E + ∂²_x + ∂²_y − v_α)φ_α` at every collocation point.
    pub fn apply_l(&self, energy: f64, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let [nx, ny] = self.dims();
        for a in 0..self.n_amp {
            let blk = &c[a * nx * ny..(a + 1) * nx * ny];
            let (t0, t2) = self.y_pass(a, blk);
            let o = &mut out[a * nx * ny..(a + 1) * nx * ny];
            for i in 0..nx {
                let w0 = self.bx.colloc_local(i, 0);
                let w2 = self.bx.colloc_local(i, 2);
                let shift = energy - self.vx[a][i];
                for j in 0..ny {
                    let mut s = 0.0;
                    for p in 0..w0.len {
                        let r = (w0.start + p) * ny + j;
                        s += w0.vals[p] * (shift * t0[r] + t2[r]);
                    }
                    for p in 0..w2.len {
                        s += w2.vals[p] * t0[(w2.start + p) * ny + j];
                    }
                    o[i * ny + j] = s;
                }
            }
        }
    }

    /// `φ` (`t0`) and `∂²_yφ` (`t2`) at y collocation points, x still in
    /// coefficient space.
    fn y_pass(&self, a: usize, blk: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let [nx, ny] = self.dims();
        let mut t0 = vec![0.0; nx * ny];
        let mut t2 = vec![0.0; nx * ny];
        for i in 0..nx {
            let row = &blk[i * ny..(i + 1) * ny];
            for j in 0..ny {
                t0[i * ny + j] = self.by[a].colloc_local(j, 0).dot(row);
                t2[i * ny + j] = self.by[a].colloc_local(j, 2).dot(row);
            }
        }
        (t0, t2)
    }

    /// `φ` at every collocation point (`N_x ⊗ N_y` per amplitude).
    pub fn apply_mass(&self, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let [nx, ny] = self.dims();
        for a in 0..self.n_amp {
            let blk = &c[a * nx * ny..(a + 1) * nx * ny];
            let (t0, _) = self.y_pass(a, blk);
            for i in 0..nx {
                let w = self.bx.colloc_local(i, 0);
                for j in 0..ny {
                    let s: f64 = (0..w.len)
                        .map(|p| w.vals[p] * t0[(w.start + p) * ny + j])
                        .sum();
                    out[a * nx * ny + i * ny + j] = s;
                }
            }
        }
    }

    /// Right-hand side coupling term at every collocation point.
    pub fn apply_r(&self, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let [nx, ny] = self.dims();
        let nb = nx * ny;
        let nq = self.quad.len();
        let n_amp = self.n_amp;
        let mut f = vec![0.0; n_amp * nb];
        // f[i][j][β] interleaved per row for parallel ownership
        let mut rows = vec![0.0; nb * n_amp];
        rows.par_chunks_mut(ny * n_amp)
            .enumerate()
            .for_each(|(i, row)| {
                for j in 0..ny {
                    for k in 0..nq {
                        let Some(e) = &self.kernel[(i * ny + j) * nq + k] else {
                            continue;
                        };
                        for b in 0..n_amp {
                            let blk = &c[b * nb..(b + 1) * nb];
                            let wy = &e.wy[b];
                            let mut s = 0.0;
                            for p in 0..e.wx.len {
                                let r = &blk[(e.wx.start + p) * ny + wy.start..];
                                let inner: f64 = (0..wy.len).map(|q| wy.vals[q] * r[q]).sum();
                                s += e.wx.vals[p] * inner;
                            }
                            row[j * n_amp + b] += e.weight * s;
                        }
                    }
                }
            });
        for i in 0..nx {
            for j in 0..ny {
                for b in 0..n_amp {
                    f[b * nb + i * ny + j] = rows[(i * ny + j) * n_amp + b];
                }
            }
        }
        self.combine(&f, out);
    }

    /// `out_α = v_α(x̄) Σ_β c_αβ f_β`.
    fn combine(&self, f: &[f64], out: &mut [f64]) {
        let [nx, ny] = self.dims();
        let nb = nx * ny;
        for a in 0..self.n_amp {
            for i in 0..nx {
                let v = self.vx[a][i];
                for j in 0..ny {
                    let idx = i * ny + j;
                    let s: f64 = (0..self.n_amp)
                        .map(|b| self.coupling(a, b) * f[b * nb + idx])
                        .sum();
                    out[a * nb + idx] = if v == 0.0 { 0.0 } else { v * s };
                }
            }
        }
    }

    /// `R[u(x) sin(p y)]` placed in the channel amplitude; zero in bound mode.
    pub fn driving(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let Some(el) = &self.elastic else { return out };
        let [nx, ny] = self.dims();
        let nb = nx * ny;
        let xs = self.bx.collocation_points();
        let ys = self.by[0].collocation_points();
        let mut f = vec![0.0; self.n_amp * nb];
        let fc = &mut f[el.channel * nb..(el.channel + 1) * nb];
        fc.par_chunks_mut(ny)
            .zip(xs.par_iter())
            .for_each(|(row, &x)| {
                for (j, &y) in ys.iter().enumerate() {
                    row[j] = self.driving_kernel(el, x, y);
                }
            });
        self.combine(&f, &mut out);
        out
    }

    fn driving_kernel(&self, el: &Elastic, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        for &(u, w) in &self.quad {
            let (xp, yp) = map3_raw(x, y, u);
            let Some(wx) = self.bx.local_over_q(xp) else {
                continue;
            };
            let u_over = wx.dot(el.pair.reduced_coeffs());
            let guard = 1e-6 * self.by[0].grid().nodes()[1];
            let sin_over = if yp < guard {
                el.p
            } else {
                (el.p * yp).sin() / yp
            };
            s += 0.5 * w * x * y * u_over * sin_over;
        }
        s
    }

    /// Per-amplitude axis factors of `L(E)` for the Kronecker preconditioner.
    pub fn axis_factors(&self, energy: f64) -> Vec<Vec<AxisFactor>> {
        let nm = self.bx.matrix(0);
        let d2 = self.bx.matrix(2);
        (0..self.n_amp)
            .map(|a| {
                let lx = DMatrix::from_fn(nm.nrows(), nm.ncols(), |i, k| {
                    d2[(i, k)] + (energy - self.vx[a][i]) * nm[(i, k)]
                });
                vec![
                    AxisFactor {
                        n: nm.clone(),
                        l: lx,
                    },
                    AxisFactor {
                        n: self.by[a].matrix(0),
                        l: self.by[a].matrix(2),
                    },
                ]
            })
            .collect()
    }

    /// `Σ_α ∫∫ φ_α² dx dy`.
    pub fn norm_sq(&self, c: &[f64]) -> f64 {
        let gx = self.bx.gram();
        let nb = self.block_len();
        (0..self.n_amp)
            .map(|a| {
                let gy = self.by[a].gram();
                let blk = &c[a * nb..(a + 1) * nb];
                let g = kron_apply(&[&gx, &gy], blk);
                g.iter().zip(blk).map(|(p, q)| p * q).sum::<f64>()
            })
            .sum()
    }

    fn v_at(&self, alpha: usize, x: f64) -> Result<f64> {
        potential_eval(&self.potentials[alpha], 0, x)
    }

    fn outside(&self, x: f64, y: f64) -> Result<()> {
        for (q, b) in [(x, &self.bx), (y, &self.by[0])] {
            if !(0.0..=b.q_max()).contains(&q) {
                return Err(FyError::OutsideGrid {
                    point: q,
                    max: b.q_max(),
                });
            }
        }
        Ok(())
    }

    /// `(E + Δ − v_α)φ_α` at an arbitrary point with `x > 0`.
    pub fn l_at(&self, energy: f64, c: &[f64], alpha: usize, x: f64, y: f64) -> Result<f64> {
        self.outside(x, y)?;
        let [nx, ny] = self.dims();
        let blk = &c[alpha * nx * ny..(alpha + 1) * nx * ny];
        let by = &self.by[alpha];
        let ev = |dx: u8, dy: u8| -> f64 {
            let wx = self.bx.local(x, dx).expect("inside");
            let wy = by.local(y, dy).expect("inside");
            (0..wx.len)
                .map(|p| wx.vals[p] * wy.dot(&blk[(wx.start + p) * ny..(wx.start + p + 1) * ny]))
                .sum()
        };
        Ok((energy - self.v_at(alpha, x)?) * ev(0, 0) + ev(2, 0) + ev(0, 2))
    }

    /// Coupling term for amplitude `alpha` at an arbitrary point.
    pub fn r_at(&self, c: &[f64], alpha: usize, x: f64, y: f64) -> Result<f64> {
        self.outside(x, y)?;
        let v = self.v_at(alpha, x)?;
        let [nx, ny] = self.dims();
        let nb = nx * ny;
        let mut f = vec![0.0; self.n_amp];
        for &(u, w) in &self.quad {
            let Some(e) = self.kernel_entry(x, y, u, w) else {
                continue;
            };
            for (b, fb) in f.iter_mut().enumerate() {
                let blk = &c[b * nb..(b + 1) * nb];
                let s: f64 = (0..e.wx.len)
                    .map(|p| {
                        e.wx.vals[p]
                            * e.wy[b].dot(&blk[(e.wx.start + p) * ny..(e.wx.start + p + 1) * ny])
                    })
                    .sum();
                *fb += e.weight * s;
            }
        }
        Ok(v * (0..self.n_amp)
            .map(|b| self.coupling(alpha, b) * f[b])
            .sum::<f64>())
    }

    /// Driving term for amplitude `alpha` at an arbitrary point.
    pub fn driving_at(&self, alpha: usize, x: f64, y: f64) -> Result<f64> {
        self.outside(x, y)?;
        let Some(el) = &self.elastic else {
            return Ok(0.0);
        };
        Ok(self.v_at(alpha, x)? * self.coupling(alpha, el.channel) * self.driving_kernel(el, x, y))
    }
}
