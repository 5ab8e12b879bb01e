#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop)]

pub mod numerov {
    /// Ground-state energy of `−u'' + v u = E u`, `u(0) = u(x_max) = 0`, by
    /// Numerov shooting on a uniform mesh of `steps` intervals and bisection.
    pub fn ground_state<V: Fn(f64) -> f64>(v: V, x_max: f64, steps: usize) -> f64 {
        let h = x_max / steps as f64;
        let vs: Vec<f64> = (0..=steps).map(|i| v(i as f64 * h)).collect();
        let shoot = |e: f64| -> (usize, f64) {
            let c = h * h / 12.0;
            let w = |i: usize| 1.0 + c * (e - vs[i]);
            let (mut u0, mut u1) = (0.0, h);
            let mut nodes = 0;
            for i in 1..steps {
                let u2 = (2.0 * u1 * (1.0 - 5.0 * c * (e - vs[i])) - u0 * w(i - 1)) / w(i + 1);
                if i + 1 < steps && u2 * u1 < 0.0 {
                    nodes += 1;
                }
                u0 = u1;
                u1 = u2;
                if u1.abs() > 1e250 {
                    u0 *= 1e-250;
                    u1 *= 1e-250;
                }
            }
            (nodes, u1)
        };
        let mut lo = vs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (nodes, end) = shoot(mid);
            if nodes == 0 && end > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Stochastic variational upper bounds for `N` identical bosons with
/// `H = Σ_k −∇²_{ξ_k} + Σ_{i<j} V(r_ij) P^{s}_{ij}` (pair potential acting in
/// relative S-waves only), using symmetrized correlated Gaussians
/// `exp(−ξᵀAξ)` in mass-scaled Jacobi coordinates.
pub mod variational {
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub struct Bosons {
        n: usize,
        v0: f64,
        mu: f64,
        /// Jacobi-space images of all particle permutations.
        perms: Vec<DMatrix<f64>>,
        /// Reference Jacobi matrix, rows `r_1 − r_0`, …
        jac: DMatrix<f64>,
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// K-type Jacobi rows `√(2(k+1)/(k+2))·(r_{k+1} − mean(r_0..r_k))`.
    pub fn jacobi_k(n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n - 1, n);
        for k in 0..n - 1 {
            let c = (2.0 * (k + 1) as f64 / (k + 2) as f64).sqrt();
            j[(k, k + 1)] = c;
            for i in 0..=k {
                j[(k, i)] = -c / (k + 1) as f64;
            }
        }
        j
    }

    /// Four-body H-type rows `r_1 − r_0`, `r_3 − r_2`, `√2(R_23 − R_01)`.
    pub fn jacobi_h() -> DMatrix<f64> {
        let s = 2f64.sqrt() / 2.0;
        DMatrix::from_row_slice(
            3,
            4,
            &[-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, -s, -s, s, s],
        )
    }

    fn perm_matrix(p: &[usize]) -> DMatrix<f64> {
        let n = p.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &pi) in p.iter().enumerate() {
            m[(i, pi)] = 1.0;
        }
        m
    }

    impl Bosons {
        /// Gaussian pair potential `v0·exp(−μ r²)`.
        pub fn new(n: usize, v0: f64, mu: f64) -> Self {
            let jac = jacobi_k(n);
            let perms = permutations(n)
                .iter()
                .map(|p| &jac * perm_matrix(p) * jac.transpose() / 2.0)
                .collect();
            Bosons {
                n,
                v0,
                mu,
                perms,
                jac,
            }
        }

        fn dim(&self) -> usize {
            self.n - 1
        }

        /// `A = Tᵀ diag(1/b²) T` in the Jacobi set `rows·Π`.
        pub fn gaussian(
            &self,
            rows: &DMatrix<f64>,
            perm: &[usize],
            widths: &[f64],
        ) -> DMatrix<f64> {
            let t = rows * perm_matrix(perm) * self.jac.transpose() / 2.0;
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                widths.len(),
                widths.iter().map(|b| 1.0 / (b * b)),
            ));
            t.transpose() * d * t
        }

        fn raw(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
            let c = a + b;
            let det = c.determinant();
            let ovl = (PI.powi(self.dim() as i32) / det).powf(1.5);
            let cinv = c.try_inverse().expect("positive definite");
            let kin = 6.0 * (a * b * cinv).trace() * ovl;
            (ovl, kin)
        }

        /// `⟨A| v(|ξ_1|) P^{s} |B⟩`.
        pub fn projected_potential(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
            let m = self.dim() - 1;
            let c = a + b;
            let k = c.view((1, 1), (m, m)).into_owned();
            let kinv = k.clone().try_inverse().expect("positive definite");
            let alpha = a.view((1, 0), (m, 1)).into_owned();
            let beta = b.view((1, 0), (m, 1)).into_owned();
            let s = a[(0, 0)] + b[(0, 0)]
                - (alpha.transpose() * &kinv * &alpha)[0]
                - (beta.transpose() * &kinv * &beta)[0];
            let g = (alpha.transpose() * &kinv * &beta)[0];
            let kappa = s + self.mu;
            let eps = 2.0 * g / kappa;
            let radial = if eps.abs() < 1e-4 {
                kappa.powf(-1.5) * (1.0 + 5.0 * eps * eps / 8.0)
            } else {
                ((kappa - 2.0 * g).powf(-0.5) - (kappa + 2.0 * g).powf(-0.5)) / (2.0 * g)
            };
            self.v0 * 2.0 * PI * (PI.powi(m as i32) / k.determinant()).powf(1.5) * PI.sqrt() / 2.0
                * radial
        }

        /// Symmetrized overlap, Hamiltonian.
        pub fn element(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
            let pairs = (self.n * (self.n - 1) / 2) as f64;
            let bq: Vec<DMatrix<f64>> = self.perms.iter().map(|t| t.transpose() * b * t).collect();
            let (mut s, mut h) = (0.0, 0.0);
            for q in &bq {
                let (o, k) = self.raw(a, q);
                s += o;
                h += k;
            }
            let nf = self.perms.len() as f64;
            let (s, mut h) = (s * nf, h * nf);
            for t in &self.perms {
                let ap = t.transpose() * a * t;
                for q in &bq {
                    h += pairs * self.projected_potential(&ap, q);
                }
            }
            (s, h)
        }

        /// Lowest generalized eigenvalue; `None` if the overlap is too
        /// ill-conditioned.
        pub fn lowest(s: &DMatrix<f64>, h: &DMatrix<f64>) -> Option<f64> {
            let n = s.nrows();
            let d = DVector::from_iterator(n, (0..n).map(|i| 1.0 / s[(i, i)].sqrt()));
            let sd = DMatrix::from_fn(n, n, |i, j| s[(i, j)] * d[i] * d[j]);
            let hd = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * d[i] * d[j]);
            let se = sd.clone().symmetric_eigen();
            let min = se.eigenvalues.min();
            if min < 1e-11 * se.eigenvalues.max() {
                return None;
            }
            let chol = sd.cholesky()?;
            let linv = chol.l().try_inverse()?;
            let m = &linv * hd * linv.transpose();
            let m = (&m + m.transpose()) / 2.0;
            Some(m.symmetric_eigen().eigenvalues.min())
        }

        /// Greedy stochastic selection of `size` Gaussians, `trials`
        /// candidates per step. Widths log-uniform in `[b_min, b_max]`.
        pub fn svm(&self, size: usize, trials: usize, b_min: f64, b_max: f64, seed: u64) -> f64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sets: Vec<DMatrix<f64>> = if self.n == 4 {
                vec![jacobi_k(4), jacobi_h()]
            } else {
                vec![jacobi_k(self.n)]
            };
            let all = permutations(self.n);
            let mut basis: Vec<DMatrix<f64>> = Vec::new();
            let mut s = DMatrix::zeros(0, 0);
            let mut h = DMatrix::zeros(0, 0);
            let mut best = f64::INFINITY;
            let (lmin, lmax) = (b_min.ln(), b_max.ln());
            while basis.len() < size {
                let mut pick: Option<(f64, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> = None;
                for _ in 0..trials {
                    let rows = &sets[rng.random_range(0..sets.len())];
                    let perm = &all[rng.random_range(0..all.len())];
                    let widths: Vec<f64> = (0..self.dim())
                        .map(|_| rng.random_range(lmin..lmax).exp())
                        .collect();
                    let a = self.gaussian(rows, perm, &widths);
                    let k = basis.len();
                    let mut s2 = s.clone().resize(k + 1, k + 1, 0.0);
                    let mut h2 = h.clone().resize(k + 1, k + 1, 0.0);
                    for (i, b) in basis.iter().enumerate() {
                        let (o, e) = self.element(b, &a);
                        s2[(i, k)] = o;
                        s2[(k, i)] = o;
                        h2[(i, k)] = e;
                        h2[(k, i)] = e;
                    }
                    let (o, e) = self.element(&a, &a);
                    s2[(k, k)] = o;
                    h2[(k, k)] = e;
                    if let Some(ev) = Self::lowest(&s2, &h2) {
                        if pick.as_ref().is_none_or(|p| ev < p.0) {
                            pick = Some((ev, a, s2, h2));
                        }
                    }
                }
                let (ev, a, s2, h2) = pick.expect("no admissible candidate");
                basis.push(a);
                s = s2;
                h = h2;
                best = ev;
            }
            best
        }
    }
}

/// Dense assembly of the collocation operators straight from the global
/// basis functions, one matrix entry at a time.
pub mod dense {
    use fysolve_core::basis::{gauss_legendre, AxisBasis, Grid1D, OuterBoundary};
    use nalgebra::DMatrix;

    /// `B_k(q)`, zero outside the grid.
    pub fn b(basis: &AxisBasis, k: usize, q: f64, d: u8) -> f64 {
        basis.value(k, q, d).unwrap_or(0.0)
    }

    /// `B_k(q)/q` with the `q → 0` limit.
    pub fn b_over_q(basis: &AxisBasis, k: usize, q: f64) -> f64 {
        if q < 1e-9 {
            b(basis, k, 0.0, 1)
        } else {
            b(basis, k, q, 0) / q
        }
    }

    fn map3(x: f64, y: f64, u: f64) -> (f64, f64) {
        let s3 = 3f64.sqrt();
        let xp = (0.25 * x * x + 0.75 * y * y - 0.5 * s3 * x * y * u)
            .max(0.0)
            .sqrt();
        let yp = (0.75 * x * x + 0.25 * y * y + 0.5 * s3 * x * y * u)
            .max(0.0)
            .sqrt();
        (xp, yp)
    }

    /// `(L(E), R)` for a bound-mode three-body problem with `n_amp`
    /// amplitudes, potentials `v[α](x)` and coupling `c[α][β]`.
    pub fn assemble3(
        gx: &Grid1D,
        gy: &Grid1D,
        quad: usize,
        energy: f64,
        v: &[Box<dyn Fn(f64) -> f64>],
        c: &[Vec<f64>],
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let bx = AxisBasis::new(gx.clone(), OuterBoundary::Dirichlet).unwrap();
        let by = AxisBasis::new(gy.clone(), OuterBoundary::Dirichlet).unwrap();
        let (nx, ny) = (bx.dim(), by.dim());
        let na = v.len();
        let nb = nx * ny;
        let n = na * nb;
        let rule = gauss_legendre(quad).unwrap();
        let mut l = DMatrix::zeros(n, n);
        let mut r = DMatrix::zeros(n, n);
        for a in 0..na {
            for (i, &x) in bx.collocation_points().iter().enumerate() {
                let vx = v[a](x);
                for (j, &y) in by.collocation_points().iter().enumerate() {
                    let row = a * nb + i * ny + j;
                    for ip in 0..nx {
                        for jp in 0..ny {
                            let col = a * nb + ip * ny + jp;
                            l[(row, col)] = (energy - vx) * b(&bx, ip, x, 0) * b(&by, jp, y, 0)
                                + b(&bx, ip, x, 2) * b(&by, jp, y, 0)
                                + b(&bx, ip, x, 0) * b(&by, jp, y, 2);
                        }
                    }
                    for (u, w) in rule.iter() {
                        let (xp, yp) = map3(x, y, u);
                        let weight = 0.5 * w * x * y * vx;
                        for bt in 0..na {
                            let cab = c[a][bt];
                            if cab == 0.0 {
                                continue;
                            }
                            for ip in 0..nx {
                                let fx = b_over_q(&bx, ip, xp);
                                if fx == 0.0 {
                                    continue;
                                }
                                for jp in 0..ny {
                                    r[(row, bt * nb + ip * ny + jp)] +=
                                        cab * weight * fx * b_over_q(&by, jp, yp);
                                }
                            }
                        }
                    }
                }
            }
        }
        (l, r)
    }

    fn sq(v: f64) -> f64 {
        v.max(0.0).sqrt()
    }

    /// `(L(E), R)` for the two-amplitude four-boson system, written out
    /// from the coupled equations term by term.
    pub fn assemble4(
        grids: [&Grid1D; 3],
        quad: [usize; 2],
        energy: f64,
        v: &dyn Fn(f64) -> f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let bs: Vec<AxisBasis> = grids
            .iter()
            .map(|g| AxisBasis::new((*g).clone(), OuterBoundary::Dirichlet).unwrap())
            .collect();
        let d = [bs[0].dim(), bs[1].dim(), bs[2].dim()];
        let nb = d[0] * d[1] * d[2];
        let idx = |a: usize, i: usize, j: usize, k: usize| a * nb + (i * d[1] + j) * d[2] + k;
        let ru = gauss_legendre(quad[0]).unwrap();
        let rv = gauss_legendre(quad[1]).unwrap();
        let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
        let mut l = DMatrix::zeros(2 * nb, 2 * nb);
        let mut r = DMatrix::zeros(2 * nb, 2 * nb);
        // `coef · φ_a(p)/(p₀p₁p₂)`-style contributions, `over` marks which
        // arguments are divided out.
        let add = |r: &mut DMatrix<f64>,
                   row: usize,
                   a: usize,
                   p: [f64; 3],
                   over: [bool; 3],
                   coef: f64| {
            let f = |axis: usize, k: usize| {
                if over[axis] {
                    b_over_q(&bs[axis], k, p[axis])
                } else {
                    b(&bs[axis], k, p[axis], 0)
                }
            };
            for i in 0..d[0] {
                let fi = f(0, i);
                if fi == 0.0 {
                    continue;
                }
                for j in 0..d[1] {
                    let fj = f(1, j);
                    if fj == 0.0 {
                        continue;
                    }
                    for k in 0..d[2] {
                        r[(row, idx(a, i, j, k))] += coef * fi * fj * f(2, k);
                    }
                }
            }
        };
        for (i, &x) in bs[0].collocation_points().iter().enumerate() {
            let vx = v(x);
            for (j, &y) in bs[1].collocation_points().iter().enumerate() {
                for (k, &z) in bs[2].collocation_points().iter().enumerate() {
                    for a in 0..2 {
                        let row = idx(a, i, j, k);
                        for ip in 0..d[0] {
                            for jp in 0..d[1] {
                                for kp in 0..d[2] {
                                    let (x0, x2) = (b(&bs[0], ip, x, 0), b(&bs[0], ip, x, 2));
                                    let (y0, y2) = (b(&bs[1], jp, y, 0), b(&bs[1], jp, y, 2));
                                    let (z0, z2) = (b(&bs[2], kp, z, 0), b(&bs[2], kp, z, 2));
                                    l[(row, idx(a, ip, jp, kp))] = (energy - vx) * x0 * y0 * z0
                                        + x2 * y0 * z0
                                        + x0 * y2 * z0
                                        + x0 * y0 * z2;
                                }
                            }
                        }
                    }
                    // first equation
                    let row = idx(0, i, j, k);
                    for (u, wu) in ru.iter() {
                        let xp = sq(0.25 * x * x + 0.75 * y * y - 0.5 * s3 * x * y * u);
                        let y1 = sq(0.75 * x * x + 0.25 * y * y + 0.5 * s3 * x * y * u);
                        add(
                            &mut r,
                            row,
                            0,
                            [xp, y1, z],
                            [true, true, false],
                            vx * wu * x * y,
                        );
                        for (vv, wv) in rv.iter() {
                            let ypp1 = sq(y1 * y1 / 9.0
                                + 8.0 * z * z / 9.0
                                + 4.0 * s2 * y1 * z * vv / 9.0);
                            let zpp1 =
                                sq(8.0 * y1 * y1 / 9.0 + z * z / 9.0
                                    - 4.0 * s2 * y1 * z * vv / 9.0);
                            let ypp2 =
                                sq(y1 * y1 / 3.0 + 2.0 * z * z / 3.0
                                    - 2.0 * s2 * y1 * z * vv / 3.0);
                            let zpp2 = sq(2.0 * y1 * y1 / 3.0
                                + z * z / 3.0
                                + 2.0 * s2 * y1 * z * vv / 3.0);
                            let coef = 0.5 * vx * wu * wv * x * y * z;
                            add(&mut r, row, 0, [xp, ypp1, zpp1], [true; 3], coef);
                            add(&mut r, row, 1, [xp, ypp2, zpp2], [true; 3], coef);
                        }
                    }
                    // second equation
                    let row = idx(1, i, j, k);
                    add(&mut r, row, 1, [y, x, z], [false; 3], vx);
                    for (vv, wv) in rv.iter() {
                        let yh = sq(x * x / 3.0 + 2.0 * z * z / 3.0 - 2.0 * s2 * x * z * vv / 3.0);
                        let zh = sq(2.0 * x * x / 3.0 + z * z / 3.0 + 2.0 * s2 * x * z * vv / 3.0);
                        add(
                            &mut r,
                            row,
                            0,
                            [y, yh, zh],
                            [false, true, true],
                            vx * wv * x * z,
                        );
                    }
                }
            }
        }
        (l, r)
    }
}
