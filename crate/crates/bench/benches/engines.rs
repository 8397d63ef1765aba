use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use shearlab::criterion::{default_grid, DEFAULT_DELTAS, DEFAULT_XI_CUTOFF};
use shearlab::{
    count_shell, criterion_report, mc_cov, padic_covariance_series, spectral_cov_product_flow,
    spectral_cov_transvection, BaseProfile, CoefficientLaw, FlowSpec, FourierObservable, FrequencyVector,
    PAdicCharacterObservable, PAdicInteger, QuadSpec, ShellQuery,
};

fn single(n: usize, xi: Vec<i64>) -> FourierObservable {
    FourierObservable::new(n, xi.len())
        .with_term(FrequencyVector(xi), BaseProfile::Constant(Complex64::new(1.0, 0.0)))
        .unwrap()
}

fn spectral(c: &mut Criterion) {
    let (gauss, _) = FourierObservable::from_law(CoefficientLaw::Gaussian { scale: 1.0 }, 12).unwrap();
    c.bench_function("transvection sum, cutoff 12, n = 100", |b| {
        b.iter(|| spectral_cov_transvection(black_box(&gauss), &gauss, 100).unwrap())
    });
    let quad = QuadSpec::default();
    let geo2 = FlowSpec::TorusGeodesic(2);
    let f2 = single(1, vec![1, 0]);
    c.bench_function("circle geodesic quadrature, t = 500", |b| {
        b.iter(|| spectral_cov_product_flow(&geo2, &f2, &f2, black_box(500.0), &quad).unwrap())
    });
    let geo3 = FlowSpec::TorusGeodesic(3);
    let f3 = single(2, vec![1, 0, 0]);
    c.bench_function("sphere geodesic quadrature, t = 100", |b| {
        b.iter(|| spectral_cov_product_flow(&geo3, &f3, &f3, black_box(100.0), &quad).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let f = single(1, vec![1, 1]);
    c.bench_function("billiard Monte Carlo, 10^4 samples", |b| {
        b.iter(|| mc_cov(&FlowSpec::DiskBilliard, &f, &f, black_box(3.0), 10_000, 1).unwrap())
    });
    let p = 5;
    let flow = FlowSpec::padic(p, 16, vec![PAdicInteger::from_u128(p, 16, 5 * 7).unwrap()]).unwrap();
    let obs = PAdicCharacterObservable::new(p, 1, 1).unwrap();
    c.bench_function("p-adic covariance, 25 steps, 10^4 samples", |b| {
        b.iter(|| padic_covariance_series(&flow, &obs, black_box(25), 10_000, 2).unwrap())
    });
}

fn criterion_check(c: &mut Criterion) {
    let billiard = FlowSpec::DiskBilliard;
    let flow = billiard.compatible().unwrap();
    let grid = default_grid(&flow.manifold);
    c.bench_function("billiard criterion report", |b| {
        b.iter(|| criterion_report(&flow.manifold, &flow.velocity, DEFAULT_XI_CUTOFF, &DEFAULT_DELTAS, grid).unwrap())
    });
}

fn lattice(c: &mut Criterion) {
    let plane = ShellQuery::new(vec![0.0, 0.0], 2000.0, 0.25).unwrap();
    c.bench_function("shell count, n = 2, r = 2000", |b| b.iter(|| count_shell(black_box(&plane)).unwrap()));
    let space = ShellQuery::new(vec![0.0, 0.0, 0.0], 500.0, 0.1).unwrap();
    c.bench_function("shell count, n = 3, r = 500", |b| b.iter(|| count_shell(black_box(&space)).unwrap()));
}

criterion_group! {
    name = engines;
    config = Criterion::default().sample_size(10);
    targets = spectral, monte_carlo, criterion_check, lattice
}
criterion_main!(engines);
