use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rvlab_bench::peaked_space;
use rvlab_core::classification::{classify_variation, LambdaGrid, Location};
use rvlab_core::doubling::doubling_select;
use rvlab_core::elliptic_radial::{shoot, ShootOptions};
use rvlab_core::estimates::{bump, gs_inequality_check, CubeGrid};
use rvlab_core::nonlinearity::parse;
use rvlab_core::ode_blowup::{blowup_time, verify_rate, RateWindow};
use rvlab_core::parabolic_fd::{simulate, BoundaryCondition, Geometry, SimulationOptions};

fn expression(c: &mut Criterion) {
    let f = parse("pow(s,2)*log(2+s)").unwrap();
    c.bench_function("eval s^2 log(2+s)", |b| b.iter(|| f.eval(black_box(3.7)).unwrap()));
    c.bench_function("ln_eval at ln s = 1e6", |b| b.iter(|| f.ln_eval(black_box(1e6)).unwrap()));
}

fn ode(c: &mut Criterion) {
    let f = parse("s^2*log(2+s)").unwrap();
    c.bench_function("blowup time", |b| b.iter(|| blowup_time(&f, black_box(1.0), 1e-13).unwrap()));
    let g = parse("s^3").unwrap();
    c.bench_function("rate scan 8 decades", |b| b.iter(|| verify_rate(&g, 1.0, RateWindow::Remaining { hi: 0.25, lo: 0.5e-8 }).unwrap()));
}

fn classification(c: &mut Criterion) {
    let f = parse("s^2*log(2+s)").unwrap();
    let grid = LambdaGrid::deep(Location::Infinity);
    c.bench_function("regular variation index", |b| b.iter(|| classify_variation(&f, &grid).unwrap()));
}

fn radial(c: &mut Criterion) {
    let f = parse("s^3").unwrap();
    let opts = ShootOptions::default();
    c.bench_function("shoot cubic n=3", |b| b.iter(|| shoot(&f, 3, black_box(1.0), &opts).unwrap()));
    let at = parse("s^5").unwrap();
    c.bench_function("shoot Aubin-Talenti to r=1e3", |b| b.iter(|| shoot(&at, 3, black_box(1.0), &opts).unwrap()));
}

fn doubling(c: &mut Criterion) {
    let (space, m) = peaked_space(200, 3);
    let y = (0..200).min_by(|&a, &b| m.get(a).unwrap().total_cmp(&m.get(b).unwrap())).unwrap();
    c.bench_function("doubling N=200", |b| b.iter(|| doubling_select(&space, &m, 0.5, black_box(y)).unwrap()));
}

fn parabolic(c: &mut Criterion) {
    let f = parse("s^2").unwrap();
    let g = Geometry::Interval { a: 0.0, b: 1.0 };
    let opts = SimulationOptions { intervals: 64, ..SimulationOptions::default() };
    let u0: Vec<f64> = g.nodes(64).iter().map(|x| 40.0 * (PI * x).sin()).collect();
    let mut group = c.benchmark_group("parabolic");
    group.sample_size(10);
    group.bench_function("dirichlet blow-up h=1/64", |b| b.iter(|| simulate(&f, g, BoundaryCondition::Dirichlet0, &u0, &opts).unwrap()));
    group.finish();
}

fn integral_inequality(c: &mut Criterion) {
    let grid = CubeGrid::new(2, -1.0, 1.0, 128).unwrap();
    let v = grid.sample(|x| 2.0 + (PI * x[0]).sin() * (PI * x[1]).cos());
    let phi = grid.sample(bump(&[0.0, 0.0], 0.8));
    c.bench_function("integral inequality 2d h=1/64", |b| b.iter(|| gs_inequality_check(&v, &phi, black_box(0.5), 1.0, &grid).unwrap()));
}

criterion_group!(benches, expression, ode, classification, radial, doubling, parabolic, integral_inequality);
criterion_main!(benches);
