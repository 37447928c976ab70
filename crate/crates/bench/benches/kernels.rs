use std::hint::black_box;

use cgl_bench::{bound_state, periodic};
use cgl_core::continuation::continue_branch;
use cgl_core::evolve::step_strang;
use cgl_core::experiments::orbital_distance;
use cgl_core::lyapunov::v_functional;
use cgl_core::{construct_bound_state, Complex64, Frame, Grid1D};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construct_bound_state");
    for n in [1024, 4096] {
        let g = periodic(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| construct_bound_state(0.3, 1.0, 0.0, 2.0, black_box(g.clone())).unwrap())
        });
    }
    group.finish();
}

fn strang(c: &mut Criterion) {
    let mut group = c.benchmark_group("strang_step");
    for n in [512, 2048] {
        let bs = bound_state(n);
        let params = bs.trig_params();
        group.bench_with_input(BenchmarkId::from_parameter(n), &bs.phi, |b, phi| {
            b.iter(|| step_strang(black_box(phi), 1e-3, &params, Frame::Rotating).unwrap())
        });
    }
    let g = Grid1D::dirichlet(std::f64::consts::PI, 64).unwrap();
    let u = cgl_core::Field::from_real_fn(g, |x| 0.5 * x.sin());
    let params = cgl_core::TrigParams::new(0.2, 2.5, -0.5, 2.0);
    group.bench_function("dirichlet_64", |b| {
        b.iter(|| step_strang(black_box(&u), 1e-3, &params, Frame::Lab).unwrap())
    });
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let bs = bound_state(2048);
    let u = bs.phi.translated(1.3).unwrap().scale(Complex64::from_polar(1.01, 0.4));
    c.bench_function("orbital_distance/2048", |b| b.iter(|| orbital_distance(black_box(&u), &bs.phi)));
    c.bench_function("v_functional/2048", |b| b.iter(|| v_functional(black_box(&u), 1.0, 1.0, -0.5, 2.0)));
}

fn continuation(c: &mut Criterion) {
    let g = Grid1D::dirichlet(std::f64::consts::PI, 64).unwrap();
    c.bench_function("continue_branch/64x10", |b| {
        b.iter(|| continue_branch(&g, 1, 0.3, 0.2, 2.0, black_box(0.1), 10).unwrap())
    });
}

criterion_group!(benches, construction, strang, diagnostics, continuation);
criterion_main!(benches);
