use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wgcloak::asymptotics::{compute_asymptotic_data, one_resonator_limit, two_resonator_limit};
use wgcloak::design::fit_circle;
use wgcloak::{generate_mesh, scattering_matrix, Complex64, Geometry, Point, SolverParams};
use wgcloak_bench::{triangle, triangle_with_resonator};

fn meshing(c: &mut Criterion) {
    let mut g = c.benchmark_group("mesh");
    g.sample_size(10);
    let tri = triangle();
    g.bench_function("triangle h=0.05", |b| b.iter(|| generate_mesh(black_box(&tri), 0.05, 3.5).unwrap()));
    let res = triangle_with_resonator(0.01);
    g.bench_function("triangle + resonator eps=0.01", |b| b.iter(|| generate_mesh(black_box(&res), 0.05, res.d + 2.0).unwrap()));
    g.finish();
}

fn solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let params = SolverParams::default();
    let bare = Geometry::bare_strip(1.0);
    g.bench_function("bare strip h=0.05", |b| b.iter(|| scattering_matrix(black_box(&bare), &params).unwrap()));
    let res = triangle_with_resonator(0.01);
    g.bench_function("triangle + resonator eps=0.01", |b| b.iter(|| scattering_matrix(black_box(&res), &params).unwrap()));
    let tri = triangle();
    let junctions = [Point::new(-2.5, 1.0), Point::new(2.0, 1.0)];
    g.bench_function("asymptotic data, two junctions", |b| b.iter(|| compute_asymptotic_data(black_box(&tri), &junctions, &params).unwrap()));
    g.finish();
}

fn formulas(c: &mut Criterion) {
    let one = Complex64::new(1.0, 0.0);
    let r = Complex64::new(0.3, 0.2);
    let t = Complex64::new(0.5, -0.6);
    c.bench_function("one-resonator limit", |b| b.iter(|| one_resonator_limit(black_box(r), t, one, t, 0.7).unwrap()));
    let e = Complex64::from_polar(1.0, 0.8 * PI * 2.96875);
    c.bench_function("two-resonator limit", |b| {
        b.iter(|| two_resonator_limit(black_box(r), t, [one, e], [t, e.conj()], 0.5 * Complex64::i() * e, [0.4, -0.2]).unwrap())
    });
    let pts: Vec<Complex64> = (0..41).map(|k| Complex64::new(-0.5, 0.0) + 0.5 * Complex64::from_polar(1.0, 0.15 * k as f64)).collect();
    c.bench_function("circle fit, 41 points", |b| b.iter(|| fit_circle(black_box(&pts)).unwrap()));
}

criterion_group!(benches, meshing, solves, formulas);
criterion_main!(benches);
