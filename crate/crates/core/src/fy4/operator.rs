use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{map_h, map_k, Problem4};
use crate::basis::{AxisBasis, Local, OuterBoundary};
use crate::error::{FyError, Result};
use crate::fy3::map3_raw;
use crate::krylov::{kron_apply, mode_apply, AxisFactor};
use crate::twobody::{potential_eval, PotentialSpec};

#[derive(Debug, Clone, Copy)]
struct EntryA {
    wx: Local,
    wy: Local,
    y_p1: f64,
    /// `w_u x y`
    weight: f64,
}

#[derive(Debug, Clone, Copy)]
struct EntryD {
    wy: Local,
    wz: Local,
    /// `w_v x z`
    weight: f64,
}

/// Collocation form of the coupled four-boson equations, applied
/// matrix-free. Unknowns are ordered `[α][i][j][k]`, `α = 0` for `φ₁`
/// and `α = 1` for `φ₂`.
#[derive(Debug, Clone)]
pub struct Operator4 {
    b: [AxisBasis; 3],
    potential: PotentialSpec,
    vx: Vec<f64>,
    qu: Vec<(f64, f64)>,
    qv: Vec<(f64, f64)>,
    tab_a: Vec<Option<EntryA>>,
    tab_d: Vec<Option<EntryD>>,
    /// `(x-basis window at ȳ_j, y-basis window at x̄_i)` per `(i, j)`.
    swap: Vec<(Option<Local>, Option<Local>)>,
}

impl Operator4 {
    pub fn new(problem: &Problem4) -> Result<Self> {
        let b = [
            AxisBasis::new(problem.grid_x.clone(), OuterBoundary::Dirichlet)?,
            AxisBasis::new(problem.grid_y.clone(), OuterBoundary::Dirichlet)?,
            AxisBasis::new(problem.grid_z.clone(), OuterBoundary::Dirichlet)?,
        ];
        let vx = b[0]
            .collocation_points()
            .iter()
            .map(|&x| potential_eval(&problem.potential, 0, x))
            .collect::<Result<Vec<_>>>()?;
        let mut op = Operator4 {
            b,
            potential: problem.potential.clone(),
            vx,
            qu: problem.quad_u.iter().collect(),
            qv: problem.quad_v.iter().collect(),
            tab_a: Vec::new(),
            tab_d: Vec::new(),
            swap: Vec::new(),
        };
        let xs = op.b[0].collocation_points();
        let ys = op.b[1].collocation_points();
        let zs = op.b[2].collocation_points();
        let mut tab_a = Vec::with_capacity(xs.len() * ys.len() * op.qu.len());
        let mut swap = Vec::with_capacity(xs.len() * ys.len());
        for &x in xs {
            for &y in ys {
                tab_a.extend(op.qu.iter().map(|&(u, w)| op.entry_a(x, y, u, w)));
                swap.push(op.swap_entry(x, y));
            }
        }
        let mut tab_d = Vec::with_capacity(xs.len() * zs.len() * op.qv.len());
        for &x in xs {
            for &z in zs {
                tab_d.extend(op.qv.iter().map(|&(v, w)| op.entry_d(x, z, v, w)));
            }
        }
        op.tab_a = tab_a;
        op.tab_d = tab_d;
        op.swap = swap;
        Ok(op)
    }

    fn entry_a(&self, x: f64, y: f64, u: f64, w: f64) -> Option<EntryA> {
        let (xp, yp) = map3_raw(x, y, u);
        Some(EntryA {
            wx: self.b[0].local_over_q(xp)?,
            wy: self.b[1].local_over_q(yp)?,
            y_p1: yp,
            weight: w * x * y,
        })
    }

    fn entry_d(&self, x: f64, z: f64, v: f64, w: f64) -> Option<EntryD> {
        let (yh, zh) = map_h(x, z, v);
        Some(EntryD {
            wy: self.b[1].local_over_q(yh)?,
            wz: self.b[2].local_over_q(zh)?,
            weight: w * x * z,
        })
    }

    fn swap_entry(&self, x: f64, y: f64) -> (Option<Local>, Option<Local>) {
        (self.b[0].local(y, 0), self.b[1].local(x, 0))
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.b[0].dim(), self.b[1].dim(), self.b[2].dim()]
    }

    pub fn block_len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn len(&self) -> usize {
        2 * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn basis(&self, axis: usize) -> &AxisBasis {
        &self.b[axis]
    }

    pub fn potential_x(&self) -> &[f64] {
        &self.vx
    }

    pub fn quadrature_u(&self) -> &[(f64, f64)] {
        &self.qu
    }

    pub fn quadrature_v(&self) -> &[(f64, f64)] {
        &self.qv
    }

    fn check(&self, c: &[f64], out: &[f64]) {
        assert_eq!(c.len(), self.len(), "coefficient length");
        assert_eq!(out.len(), self.len(), "output length");
    }

    /// `(E + Δ − v(x))φ_α` at every collocation point.
    pub fn apply_l(&self, energy: f64, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let dims = self.dims();
        let nb = self.block_len();
        let nx = self.b[0].matrix(0);
        let d2x = self.b[0].matrix(2);
        let lx = DMatrix::from_fn(dims[0], dims[0], |i, k| {
            d2x[(i, k)] + (energy - self.vx[i]) * nx[(i, k)]
        });
        let (ny, d2y) = (self.b[1].matrix(0), self.b[1].matrix(2));
        let (nz, d2z) = (self.b[2].matrix(0), self.b[2].matrix(2));
        for a in 0..2 {
            let blk = &c[a * nb..(a + 1) * nb];
            let z0 = mode_apply(blk, &dims, 2, &nz);
            let z2 = mode_apply(blk, &dims, 2, &d2z);
            let u = mode_apply(&z0, &dims, 1, &ny);
            let mut w = mode_apply(&z0, &dims, 1, &d2y);
            let w2 = mode_apply(&z2, &dims, 1, &ny);
            w.iter_mut().zip(&w2).for_each(|(p, q)| *p += q);
            let r1 = mode_apply(&u, &dims, 0, &lx);
            let r2 = mode_apply(&w, &dims, 0, &nx);
            for (o, (p, q)) in out[a * nb..(a + 1) * nb].iter_mut().zip(r1.iter().zip(&r2)) {
                *o = p + q;
            }
        }
    }

    /// `φ_α` at every collocation point.
    pub fn apply_mass(&self, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let nb = self.block_len();
        let m = [
            self.b[0].matrix(0),
            self.b[1].matrix(0),
            self.b[2].matrix(0),
        ];
        for a in 0..2 {
            let r = kron_apply(&[&m[0], &m[1], &m[2]], &c[a * nb..(a + 1) * nb]);
            out[a * nb..(a + 1) * nb].copy_from_slice(&r);
        }
    }

    /// Right-hand sides of both equations at every collocation point.
    pub fn apply_r(&self, c: &[f64], out: &mut [f64]) {
        self.check(c, out);
        let [nx, ny, nz] = self.dims();
        let nb = self.block_len();
        let slabs: Vec<Vec<f64>> = (0..nx).into_par_iter().map(|i| self.row_r(c, i)).collect();
        for (i, slab) in slabs.iter().enumerate() {
            let plane = ny * nz;
            out[i * plane..(i + 1) * plane].copy_from_slice(&slab[..plane]);
            out[nb + i * plane..nb + (i + 1) * plane].copy_from_slice(&slab[plane..]);
        }
    }

    /// Both amplitudes' rows at x collocation index `i`, `[α][j][k]`.
    fn row_r(&self, c: &[f64], i: usize) -> Vec<f64> {
        let [_, ny, nz] = self.dims();
        let plane = ny * nz;
        let nb = self.block_len();
        let mut out = vec![0.0; 2 * plane];
        let v = self.vx[i];
        if v == 0.0 {
            return out;
        }
        let (c1, c2) = (&c[..nb], &c[nb..]);
        let x = self.b[0].collocation_points()[i];
        let zs = self.b[2].collocation_points();
        let nq = self.qu.len();
        let mut g1 = vec![0.0; plane];
        let mut g2 = vec![0.0; plane];
        for j in 0..ny {
            let y = self.b[1].collocation_points()[j];
            for q in 0..nq {
                let Some(e) = &self.tab_a[(i * ny + j) * nq + q] else {
                    continue;
                };
                contract_x(c1, &e.wx, plane, &mut g1);
                contract_x(c2, &e.wx, plane, &mut g2);
                let wu = self.qu[q].1;
                for (k, &z) in zs.iter().enumerate() {
                    let wz = self.b[2].colloc_local(k, 0);
                    let mut s = e.weight * eval_yz(&g1, nz, &e.wy, wz);
                    let mut dbl = 0.0;
                    for &(vv, wv) in &self.qv {
                        let (y1, z1) = map_k(e.y_p1, z, vv);
                        if let (Some(a), Some(b)) =
                            (self.b[1].local_over_q(y1), self.b[2].local_over_q(z1))
                        {
                            dbl += wv * eval_yz(&g1, nz, &a, &b);
                        }
                        let (y2, z2) = map_h(e.y_p1, z, vv);
                        if let (Some(a), Some(b)) =
                            (self.b[1].local_over_q(y2), self.b[2].local_over_q(z2))
                        {
                            dbl += wv * eval_yz(&g2, nz, &a, &b);
                        }
                    }
                    s += 0.5 * wu * x * y * z * dbl;
                    out[j * nz + k] += s;
                }
            }
        }
        // H-type rows
        let nv = self.qv.len();
        for j in 0..ny {
            let (Some(wxs), wys) = &self.swap[i * ny + j] else {
                continue;
            };
            for k in 0..nz {
                let wz = self.b[2].colloc_local(k, 0);
                let mut s = wys
                    .as_ref()
                    .map_or(0.0, |wys| eval_xyz(c2, ny, nz, wxs, wys, wz));
                for q in 0..nv {
                    if let Some(d) = &self.tab_d[(i * nz + k) * nv + q] {
                        s += d.weight * eval_xyz(c1, ny, nz, wxs, &d.wy, &d.wz);
                    }
                }
                out[plane + j * nz + k] = s;
            }
        }
        out.iter_mut().for_each(|o| *o *= v);
        out
    }

    /// Per-amplitude axis factors of `L(E)`.
    pub fn axis_factors(&self, energy: f64) -> Vec<Vec<AxisFactor>> {
        let nx = self.b[0].matrix(0);
        let d2x = self.b[0].matrix(2);
        let lx = DMatrix::from_fn(nx.nrows(), nx.ncols(), |i, k| {
            d2x[(i, k)] + (energy - self.vx[i]) * nx[(i, k)]
        });
        let fx = AxisFactor { n: nx, l: lx };
        let fy = AxisFactor {
            n: self.b[1].matrix(0),
            l: self.b[1].matrix(2),
        };
        let fz = AxisFactor {
            n: self.b[2].matrix(0),
            l: self.b[2].matrix(2),
        };
        vec![vec![fx.clone(), fy.clone(), fz.clone()], vec![fx, fy, fz]]
    }

    /// `Σ_α ∫∫∫ φ_α²`.
    pub fn norm_sq(&self, c: &[f64]) -> f64 {
        let g = [self.b[0].gram(), self.b[1].gram(), self.b[2].gram()];
        let nb = self.block_len();
        (0..2)
            .map(|a| {
                let blk = &c[a * nb..(a + 1) * nb];
                let r = kron_apply(&[&g[0], &g[1], &g[2]], blk);
                r.iter().zip(blk).map(|(p, q)| p * q).sum::<f64>()
            })
            .sum()
    }

    /// `φ_α(x, y, z)` at an arbitrary point; zero outside the grids.
    pub fn eval(&self, c: &[f64], alpha: usize, x: f64, y: f64, z: f64) -> f64 {
        let [_, ny, nz] = self.dims();
        let nb = self.block_len();
        match (
            self.b[0].local(x, 0),
            self.b[1].local(y, 0),
            self.b[2].local(z, 0),
        ) {
            (Some(a), Some(b), Some(d)) => {
                eval_xyz(&c[alpha * nb..(alpha + 1) * nb], ny, nz, &a, &b, &d)
            }
            _ => 0.0,
        }
    }

    /// `v(x)` for arbitrary `x`.
    pub fn potential(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(FyError::InvalidArgument(format!("negative radius {x}")));
        }
        potential_eval(&self.potential, 0, x)
    }
}

fn contract_x(c: &[f64], wx: &Local, plane: usize, g: &mut [f64]) {
    g.iter_mut().for_each(|v| *v = 0.0);
    for p in 0..wx.len {
        let w = wx.vals[p];
        let src = &c[(wx.start + p) * plane..(wx.start + p + 1) * plane];
        for (d, s) in g.iter_mut().zip(src) {
            *d += w * s;
        }
    }
}

fn eval_yz(g: &[f64], nz: usize, wy: &Local, wz: &Local) -> f64 {
    let mut s = 0.0;
    for q in 0..wy.len {
        let row = &g[(wy.start + q) * nz + wz.start..];
        let inner: f64 = (0..wz.len).map(|r| wz.vals[r] * row[r]).sum();
        s += wy.vals[q] * inner;
    }
    s
}

fn eval_xyz(c: &[f64], ny: usize, nz: usize, wx: &Local, wy: &Local, wz: &Local) -> f64 {
    let mut s = 0.0;
    for p in 0..wx.len {
        let g = &c[(wx.start + p) * ny * nz..(wx.start + p + 1) * ny * nz];
        s += wx.vals[p] * eval_yz(g, nz, wy, wz);
    }
    s
}
