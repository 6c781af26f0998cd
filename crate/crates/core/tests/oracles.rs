use frozenrb_core::freezing::phase_condition_solve;
use frozenrb_core::operators::{burgers_op, shift_op};
use frozenrb_core::reduction::{ei_greedy, pod_with_eigenvalues};
use frozenrb_core::{BurgersParams, Field, GridSpec, ReducedBasis};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> GridSpec {
    GridSpec::new(8, 4, 2.0, 1.0).unwrap()
}

fn random_fields(count: usize, seed: u64) -> Vec<Field> {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Field::from_values(g, (0..g.len()).map(|_| rng.random::<f64>() - 0.3).collect()).unwrap())
        .collect()
}

#[test]
fn pod_truncation_error_is_singular_value_tail() {
    let snaps = random_fields(10, 1);
    let g = grid();
    let w = g.cell_area().sqrt();
    let a = DMatrix::from_fn(g.len(), snaps.len(), |i, k| w * snaps[k][i]);
    let mut sigma2: Vec<f64> = a.svd(false, false).singular_values.iter().map(|s| s * s).collect();
    sigma2.sort_by(|x, y| y.total_cmp(x));
    for n in 1..10 {
        let pod = pod_with_eigenvalues(&snaps, n).unwrap();
        let rb = ReducedBasis::new(g, pod.modes).unwrap();
        let err: f64 =
            snaps.iter().map(|s| s.distance(&rb.lift(&rb.project(s).unwrap()).unwrap()).unwrap().powi(2)).sum();
        let tail: f64 = sigma2[n..].iter().sum();
        assert!((err - tail).abs() <= 1e-10 * sigma2[0], "n = {n}: {err} vs {tail}");
        for (l, s) in pod.eigenvalues.iter().zip(&sigma2) {
            assert!((l - s).abs() <= 1e-10 * sigma2[0]);
        }
    }
}

#[test]
fn projection_satisfies_pythagoras() {
    let fields = random_fields(6, 2);
    let rb = ReducedBasis::new(grid(), pod_with_eigenvalues(&fields[..4], 4).unwrap().modes).unwrap();
    for v in &fields {
        let p = rb.lift(&rb.project(v).unwrap()).unwrap();
        let r = v.sub(&p).unwrap();
        assert!((r.norm().powi(2) + p.norm().powi(2) - v.norm().powi(2)).abs() < 1e-10);
    }
}

#[test]
fn ei_matches_direct_interpolation_solve() {
    let snaps = random_fields(20, 3);
    let ei = ei_greedy(&snaps, 10, 0.0).unwrap();
    assert_eq!(ei.len(), 10);
    let q = ei.points();
    let b = DMatrix::from_fn(10, 10, |j, m| ei.basis()[m][q[j]]);
    let lu = b.lu();
    let bound = ei.greedy_errors()[10];
    for s in &snaps {
        let rhs = DVector::from_iterator(10, q.iter().map(|&i| s[i]));
        let coef = lu.solve(&rhs).unwrap();
        let mut direct = Field::zeros(grid());
        for (c, xi) in coef.iter().zip(ei.basis()) {
            direct.axpy(*c, xi).unwrap();
        }
        let interp = ei.interpolate(s).unwrap();
        assert!(direct.distance(&interp).unwrap() < 1e-12);
        assert!(s.sub(&interp).unwrap().sup_norm() <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn phase_condition_is_least_squares_velocity() {
    let g = GridSpec::new(24, 12, 2.0, 1.0).unwrap();
    let v = Field::project(g, |x, y| {
        0.5 + 0.3 * (std::f64::consts::PI * x).sin() * (2.0 * std::f64::consts::PI * y).cos() + 0.1 * (4.0 * y).sin()
    })
    .unwrap();
    for mu in [1.0, 1.3, 2.0] {
        let p = BurgersParams::diagonal(mu).unwrap();
        let l = burgers_op(&v, &p);
        let s = [shift_op(&v, 0), shift_op(&v, 1)];
        // min_𝔤 ‖𝕃v + 𝔤₁𝕊₁v + 𝔤₂𝕊₂v‖: the same normal equations, solved by SVD.
        let a = DMatrix::from_fn(g.len(), 2, |i, r| s[r][i]);
        let rhs = DVector::from_iterator(g.len(), l.values().iter().map(|x| -x));
        let oracle = a.svd(true, true).solve(&rhs, 1e-14).unwrap();
        let alg = phase_condition_solve(&v, &p).alg;
        for r in 0..2 {
            assert!((alg.0[r] - oracle[r]).abs() <= 1e-10 * (1.0 + oracle[r].abs()), "mu = {mu}");
        }
    }
}
