use std::f64::consts::TAU;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sgdg::{build_basis, d_matrix, laplacian_matrix, project, OperatorOptions, ProjectOptions, Space};
use sgdg_bench::wave_coefficients;

fn laplacian_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplacian_matvec");
    for (dim, k, n) in [(3, 3, 4), (3, 3, 6), (5, 5, 2)] {
        let space = Space::sparse(dim, k, n).unwrap();
        let lap = laplacian_matrix(&space, &OperatorOptions::default()).unwrap();
        let x = wave_coefficients(&space);
        let mut y = vec![0.0; x.len()];
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("D{dim}k{k}n{n}")),
            &x.values,
            |b, x| b.iter(|| lap.matvec_into(black_box(x), &mut y)),
        );
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for (dim, k, n) in [(3, 3, 5), (5, 3, 3)] {
        let space = Space::sparse(dim, k, n).unwrap();
        let opts = OperatorOptions::default();
        group.bench_function(format!("d_matrix/D{dim}k{k}n{n}"), |b| {
            b.iter(|| d_matrix(black_box(&space), 1, &opts).unwrap())
        });
        group.bench_function(format!("laplacian/D{dim}k{k}n{n}"), |b| {
            b.iter(|| laplacian_matrix(black_box(&space), &opts).unwrap())
        });
    }
    group.bench_function("basis/k5n6", |b| b.iter(|| build_basis(5, black_box(6)).unwrap()));
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    group.sample_size(10);
    let space = Space::sparse(3, 3, 4).unwrap();
    let f = |x: &[f64]| (TAU * (x[0] + 2.0 * x[1] - x[2]) + 0.4).cos();
    group.bench_function("quadrature/D3k3n4", |b| {
        b.iter(|| project(&space, &f, &ProjectOptions::default()).unwrap())
    });
    let space = Space::sparse(5, 5, 3).unwrap();
    group.bench_function("tensor/D5k5n3", |b| b.iter(|| wave_coefficients(black_box(&space))));
    group.finish();
}

criterion_group!(benches, laplacian_matvec, assembly, projection);
criterion_main!(benches);
