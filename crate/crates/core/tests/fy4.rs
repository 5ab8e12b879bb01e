mod common;

use common::dense::assemble4;
use fysolve_core::basis::{make_grid, Grid1D, GridMapping};
use fysolve_core::fy4::*;
use fysolve_core::krylov::{build_precond, LinearOperator};
use fysolve_core::twobody::PotentialSpec;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize, max: f64, ratio: f64) -> Grid1D {
    make_grid(n, max, GridMapping::Geometric { ratio }).unwrap()
}

fn small_problem(pot: PotentialSpec) -> Problem4 {
    let g = [grid(3, 6.0, 1.3), grid(3, 7.0, 1.2), grid(3, 8.0, 1.4)];
    Problem4::new(pot, g, [6, 5], -5.0)
        .unwrap()
        .with_threshold(-1.4)
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn matches_dense_assembly() {
    let p = small_problem(PotentialSpec::gaussian(-4.0, 1.0).unwrap());
    let op = Operator4::new(&p).unwrap();
    let energy = -4.2;
    let (l, r) = assemble4([&p.grid_x, &p.grid_y, &p.grid_z], [6, 5], energy, &|x| {
        -4.0 * (-x * x).exp()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let x = random_vec(op.len(), &mut rng);
        let (mut lx, mut rx) = (vec![0.0; op.len()], vec![0.0; op.len()]);
        op.apply_l(energy, &x, &mut lx);
        op.apply_r(&x, &mut rx);
        let xv = DVector::from_vec(x);
        let (dl, dr) = (&l * &xv, &r * &xv);
        let el = (&dl - DVector::from_vec(lx)).amax() / dl.amax().max(1.0);
        let er = (&dr - DVector::from_vec(rx)).amax() / dr.amax().max(1.0);
        assert!(el < 1e-10 && er < 1e-10, "L error {el:e}, R error {er:e}");
    }
}

#[test]
fn zero_input_and_zero_potential() {
    let p = small_problem(PotentialSpec::gaussian(-4.0, 1.0).unwrap());
    let op = Operator4::new(&p).unwrap();
    let mut out = vec![1.0; op.len()];
    op.apply_r(&vec![0.0; op.len()], &mut out);
    assert!(out.iter().all(|&v| v == 0.0));
    op.apply_l(-3.0, &vec![0.0; op.len()], &mut out);
    assert!(out.iter().all(|&v| v == 0.0));

    let p = small_problem(PotentialSpec::zero());
    let op = Operator4::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    op.apply_r(&random_vec(op.len(), &mut rng), &mut out);
    assert!(out.iter().all(|&v| v == 0.0));
}

#[test]
fn swapped_argument_term_for_symmetric_amplitude() {
    let g = grid(4, 7.0, 1.3);
    let p = Problem4::new(
        PotentialSpec::gaussian(-2.0, 50.0).unwrap(),
        [g.clone(), g.clone(), grid(3, 6.0, 1.2)],
        [4, 4],
        -5.0,
    )
    .unwrap()
    .with_threshold(-1.0);
    let op = Operator4::new(&p).unwrap();
    let [nx, ny, nz] = op.dims();
    assert_eq!(nx, ny);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_vec(nx * nx, &mut rng);
    let b = random_vec(nz, &mut rng);
    let nb = op.block_len();
    let mut c = vec![0.0; op.len()];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                c[nb + (i * ny + j) * nz + k] = (a[i * nx + j] + a[j * nx + i]) * b[k];
            }
        }
    }
    let (mut r, mut m) = (vec![0.0; op.len()], vec![0.0; op.len()]);
    op.apply_r(&c, &mut r);
    op.apply_mass(&c, &mut m);
    for i in 0..nx {
        let v = op.potential_x()[i];
        for jk in 0..ny * nz {
            let idx = nb + i * ny * nz + jk;
            assert!(
                (r[idx] - v * m[idx]).abs() < 1e-12 * (1.0 + m[idx].abs()),
                "row {idx}"
            );
        }
    }
}

#[test]
fn preconditioner_inverts_the_uncoupled_operator() {
    let p = small_problem(PotentialSpec::gaussian(-4.0, 1.0).unwrap());
    let op = Operator4::new(&p).unwrap();
    let pre = build_precond(&op.axis_factors(-4.5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = random_vec(op.len(), &mut rng);
    let y = pre.apply_vec(&b);
    let mut ly = vec![0.0; op.len()];
    op.apply_l(-4.5, &y, &mut ly);
    let err = ly
        .iter()
        .zip(&b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-7, "{err:e}");
}

#[test]
fn guess_above_threshold_is_rejected() {
    let mut p = small_problem(PotentialSpec::gaussian(-4.0, 1.0).unwrap());
    p.lambda0 = -1.0;
    assert!(solve_bound4(&p, &Default::default()).is_err());
}

#[test]
fn coarse_bound_state_is_normalized_and_below_threshold() {
    let g = grid(6, 8.0, 1.4);
    let p = Problem4::new(
        PotentialSpec::gaussian(-4.0, 1.0).unwrap(),
        [g.clone(), g.clone(), g],
        [8, 8],
        -5.0,
    )
    .unwrap()
    .with_threshold(-1.4);
    let b = solve_bound4(&p, &Default::default()).unwrap();
    assert!(b.energy < -4.0 && b.energy > -5.0, "{}", b.energy);
    let op = Operator4::new(&p).unwrap();
    assert!((op.norm_sq(b.coeffs.data()) - 1.0).abs() < 1e-12);
}
