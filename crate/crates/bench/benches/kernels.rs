use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hardyrp::hankel::{certify_positive, default_anchors, gram_from_measure};
use hardyrp::kernels_appendix::{approx_identity, halfmass};
use hardyrp::numerics::integrate_line;
use hardyrp::pick::{degree_winding, multiplicity_winding, DEFAULT_RADIUS};
use hardyrp::symbols::{h_nu, out_eval, outer_example};
use hardyrp::{BoundaryMeasure, QuadratureConfig, RationalPickFunction};
use num_complex::Complex64;

fn quadrature(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    c.bench_function("integrate_line log|x|/(1+x^2)", |b| {
        b.iter(|| integrate_line(|x| Complex64::new(x.abs().ln() / (1.0 + x * x), 0.0), black_box(&[0.0]), &cfg).unwrap())
    });
}

fn outer(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let (k, _) = outer_example('e').unwrap();
    let z = Complex64::new(0.7, 0.4);
    c.bench_function("out_eval example e", |b| b.iter(|| out_eval(Complex64::new(1.0, 0.0), &k, black_box(z), &cfg).unwrap()));
    let nu = BoundaryMeasure::atomic(vec![(0.5, 1.0), (2.0, 0.5)]).unwrap();
    c.bench_function("h_nu two atoms", |b| b.iter(|| h_nu(&nu, black_box(1.3), &cfg).unwrap()));
}

fn pick(c: &mut Criterion) {
    let f = RationalPickFunction::worked_example();
    let i = Complex64::new(0.0, 1.0);
    c.bench_function("multiplicity_winding worked example", |b| b.iter(|| multiplicity_winding(&f, black_box(i), DEFAULT_RADIUS).unwrap()));
    c.bench_function("degree_winding worked example", |b| b.iter(|| degree_winding(&f, black_box(i), DEFAULT_RADIUS).unwrap()));
}

fn hankel(c: &mut Criterion) {
    let mu = BoundaryMeasure::atomic(vec![(1.0, 1.0), (2.0, 1.0)]).unwrap();
    let anchors = default_anchors();
    c.bench_function("gram_from_measure + certify (12 anchors)", |b| {
        b.iter(|| certify_positive(&gram_from_measure(black_box(&mu), &anchors).unwrap()).unwrap())
    });
}

fn appendix(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    c.bench_function("halfmass closed form", |b| b.iter(|| halfmass(black_box(1.0), black_box(1e4)).unwrap()));
    c.bench_function("approx_identity n=1e4", |b| {
        b.iter(|| approx_identity(|x| Complex64::new(x * x / (1.0 + x * x), 0.0), 2.0, black_box(1e4), &cfg).unwrap())
    });
}

criterion_group!(benches, quadrature, outer, pick, hankel, appendix);
criterion_main!(benches);
