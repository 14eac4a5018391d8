use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use staticgeo_bench::{log_graph_potential, schwarzschild_pair, spiral_points};
use staticgeo_core::curvature::{curvature_at, Backend};
use staticgeo_core::global_identities::{integral_identity_check, QuadratureSpec};
use staticgeo_core::static_potentials::static_residual;
use staticgeo_core::zero_set_geometry::{extract_zero_graph, gauss_bonnet_limit, GraphGrid};
use staticgeo_core::{MetricField, SphereRule};

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature_at");
    let pts = spiral_points(64);
    for (name, metric) in [
        ("schwarzschild", MetricField::schwarzschild(1.0)),
        ("anisotropic", MetricField::anisotropic(1.0, 1.0)),
    ] {
        for (label, backend) in [("dual", Backend::DualNumber), ("fd", Backend::finite_difference())] {
            group.bench_with_input(BenchmarkId::new(name, label), &metric, |b, m| {
                b.iter(|| {
                    for p in &pts {
                        black_box(curvature_at(m, p, backend).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn static_check(c: &mut Criterion) {
    let (metric, n) = schwarzschild_pair(2.0);
    let pts = spiral_points(64);
    c.bench_function("static_residual/schwarzschild_64", |b| {
        b.iter(|| {
            for p in &pts {
                black_box(static_residual(&n, &metric, p).unwrap());
            }
        })
    });
}

fn zero_set(c: &mut Criterion) {
    let f = log_graph_potential();
    let metric = MetricField::schwarzschild(2.0);
    let radii = vec![50.0, 100.0, 200.0];
    let grid = GraphGrid::new(radii.clone(), 64).unwrap();
    let mut group = c.benchmark_group("zero_set");
    group.sample_size(20);
    group.bench_function("extract_graph_3x64", |b| {
        b.iter(|| black_box(extract_zero_graph(&f, &metric, (10.0, 400.0), &grid).unwrap()))
    });
    let surface = extract_zero_graph(&f, &metric, (10.0, 400.0), &grid).unwrap();
    group.bench_function("gauss_bonnet_3x64", |b| {
        b.iter(|| black_box(gauss_bonnet_limit(&surface, &radii).unwrap()))
    });
    group.finish();
}

fn integral(c: &mut Criterion) {
    let (metric, n) = schwarzschild_pair(1.0);
    let quad = QuadratureSpec {
        n_radial: 16,
        sphere: SphereRule::new(8, 16),
        budget: 1_000_000,
    };
    let mut group = c.benchmark_group("integral_identity");
    group.sample_size(10);
    group.bench_function("schwarzschild_16x8x16", |b| {
        b.iter(|| black_box(integral_identity_check(&n, &metric, (2.0, 40.0), &quad).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, curvature, static_check, zero_set, integral);
criterion_main!(benches);
