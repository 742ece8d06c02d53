use std::f64::consts::TAU;

use proptest::prelude::*;
use sgdg::project::{
    coeffs_dg, mcerr_coeffs, plane_wave, project_1d, reconstruct_dg, sample_points, tensor_construct, DEFAULT_SEED,
};
use sgdg::{mcerr, project, reconstruct, v2d, ProjectOptions, Space};

#[test]
fn tensor_construct_matches_projection() {
    let space = Space::sparse(3, 3, 3).unwrap();
    let f1 = |x: f64| (TAU * x).sin() + x;
    let f2 = |x: f64| (3.0 * x).exp();
    let f3 = |x: f64| 1.0 / (1.0 + x * x);
    let a = project_1d(f1, 3, 3).unwrap();
    let b = project_1d(f2, 3, 3).unwrap();
    let c = project_1d(f3, 3, 3).unwrap();
    let t = tensor_construct(&space, &[&a.values, &b.values, &c.values]).unwrap();
    let p = project(
        &space,
        &|x: &[f64]| f1(x[0]) * f2(x[1]) * f3(x[2]),
        &ProjectOptions::default(),
    )
    .unwrap();
    for (u, v) in t.values.iter().zip(&p.values) {
        assert!((u - v).abs() < 1e-11, "{u} vs {v}");
    }
}

#[test]
fn plane_wave_matches_projection() {
    let space = Space::sparse(3, 3, 3).unwrap();
    let (amp, phase, m) = (1.3, 0.4, [1i64, -2, 0]);
    let w = plane_wave(&space, &m, amp, phase).unwrap();
    let f = |x: &[f64]| amp * (TAU * (x[0] - 2.0 * x[1]) + phase).cos();
    let p = project(&space, &f, &ProjectOptions::default()).unwrap();
    for (u, v) in w.values.iter().zip(&p.values) {
        assert!((u - v).abs() < 1e-11);
    }
}

#[test]
fn dict_and_vector_reconstruct_alike() {
    let space = Space::sparse(2, 2, 3).unwrap();
    let f = |x: &[f64]| x[0] * x[1] + (TAU * x[1]).cos();
    let d = coeffs_dg(&space, &f, &ProjectOptions::default()).unwrap();
    let v = project(&space, &f, &ProjectOptions::default()).unwrap();
    assert_eq!(v2d(&v).unwrap(), d);
    for x in sample_points(2, 20, 3) {
        assert_eq!(reconstruct_dg(&d, &x).unwrap(), reconstruct(&v, &x).unwrap());
    }
}

#[test]
fn sparse_error_decreases_with_level() {
    let f = |x: &[f64]| (TAU * x[0]).cos() * (TAU * x[1]).sin();
    let mut prev = f64::INFINITY;
    for n in 1..=5 {
        let space = Space::sparse(2, 3, n).unwrap();
        let c = project(&space, &f, &ProjectOptions::default()).unwrap();
        let e = mcerr_coeffs(&f, &c, 1000, DEFAULT_SEED).unwrap();
        assert!(e < prev, "n={n}: {e} !< {prev}");
        prev = e;
    }
    assert!(prev < 1e-3);
}

#[test]
fn full_space_beats_sparse_space() {
    let f = |x: &[f64]| (TAU * (x[0] + x[1])).sin();
    let sparse = project(&Space::sparse(2, 2, 4).unwrap(), &f, &ProjectOptions::default()).unwrap();
    let full = project(&Space::full(2, 2, 4).unwrap(), &f, &ProjectOptions::default()).unwrap();
    let es = mcerr_coeffs(&f, &sparse, 1000, 1).unwrap();
    let ef = mcerr_coeffs(&f, &full, 1000, 1).unwrap();
    assert!(ef < es);
}

#[test]
fn projection_is_idempotent() {
    for space in [
        Space::sparse(2, 3, 3).unwrap(),
        Space::full(2, 2, 2).unwrap(),
        Space::sparse(3, 2, 3).unwrap(),
    ] {
        let f = |x: &[f64]| (TAU * x[0]).sin() * (1.0 + x[1] * x[1]).ln() + x.iter().product::<f64>();
        let c = project(&space, &f, &ProjectOptions::default()).unwrap();
        let g = |x: &[f64]| reconstruct(&c, x).unwrap();
        let again = project(&space, &g, &ProjectOptions::default()).unwrap();
        for (u, v) in c.values.iter().zip(&again.values) {
            assert!((u - v).abs() < 1e-9, "{space:?}: {u} vs {v}");
        }
    }
}

#[test]
fn coarse_coefficients_converge() {
    // the level-0 mean of a smooth function must keep improving with n
    let f = |x: &[f64]| (TAU * x[0]).cos() * (TAU * x[1]).cos() + 0.1;
    for n in 2..=6 {
        let c = project(&Space::sparse(2, 5, n).unwrap(), &f, &ProjectOptions::default()).unwrap();
        assert!((c.values[0] - 0.1).abs() < 1e-13, "n={n}: {}", c.values[0]);
    }
}

#[test]
fn mcerr_of_constants() {
    let e = mcerr(&|_: &[f64]| 1.0, &|_: &[f64]| 3.5, 4, 100, 9);
    assert!((e - 2.5).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mcerr_is_symmetric_and_seeded(seed in any::<u64>(), dim in 1usize..6) {
        let f = |x: &[f64]| x.iter().sum::<f64>().sin();
        let g = |x: &[f64]| x[0] * x[0];
        let a = mcerr(&f, &g, dim, 64, seed);
        let b = mcerr(&g, &f, dim, 64, seed);
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, mcerr(&f, &g, dim, 64, seed));
        prop_assert_eq!(mcerr(&f, &f, dim, 64, seed), 0.0);
    }

    #[test]
    fn sample_points_are_in_the_cube(seed in any::<u64>(), dim in 1usize..8) {
        for p in sample_points(dim, 50, seed) {
            prop_assert_eq!(p.len(), dim);
            prop_assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn projection_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let space = Space::sparse(2, 2, 2).unwrap();
        let o = ProjectOptions::default();
        let f = |x: &[f64]| (x[0] * 3.0).sin();
        let g = |x: &[f64]| x[1].exp();
        let pf = project(&space, &f, &o).unwrap();
        let pg = project(&space, &g, &o).unwrap();
        let h = move |x: &[f64]| a * f(x) + b * g(x);
        let ph = project(&space, &h, &o).unwrap();
        for i in 0..ph.len() {
            prop_assert!((ph.values[i] - a * pf.values[i] - b * pg.values[i]).abs() < 1e-12);
        }
    }
}
