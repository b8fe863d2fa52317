use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quasiloc_core::averaging::{build_mesh_kernel, regularized_green, sphere_average, EuclideanKernelSpec, KernelProfile};
use quasiloc_core::gluing::{glued_series, GluingContext, GluingScenario};
use quasiloc_core::green::{GreenBundle, SplitGreen};
use quasiloc_core::perturbation::{wick_pairings, Coupling, InteractionSpec, PerturbationOptions};
use quasiloc_core::presets::preset;
use quasiloc_core::quadrature::QuadratureOptions;
use quasiloc_core::{OperatorMatrix, OperatorSpec};

fn green(c: &mut Criterion) {
    let mut group = c.benchmark_group("green");
    for name in ["grid5", "grid9"] {
        let (mesh, cut) = preset(name).unwrap();
        let spec = OperatorSpec::with_mass_squared(0.1);
        let op = OperatorMatrix::assemble(&mesh, &spec).unwrap();
        group.bench_with_input(BenchmarkId::new("bundle", name), &op, |b, op| {
            b.iter(|| GreenBundle::new(black_box(op)).unwrap())
        });
        group.bench_function(BenchmarkId::new("split", name), |b| {
            b.iter(|| SplitGreen::new(black_box(&mesh), &spec, &cut).unwrap())
        });
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("mesh-kernel");
    let (mesh, cut) = preset("grid9").unwrap();
    let g = GreenBundle::new(&OperatorMatrix::assemble(&mesh, &OperatorSpec::with_mass_squared(0.1)).unwrap())
        .unwrap()
        .green_full();
    for profile in [KernelProfile::Uniform, KernelProfile::Cone] {
        group.bench_function(BenchmarkId::new("build", profile.name()), |b| {
            b.iter(|| build_mesh_kernel(black_box(&mesh), 1.0, &profile, Some(&cut)).unwrap())
        });
    }
    let k = build_mesh_kernel(&mesh, 1.0, &KernelProfile::Uniform, Some(&cut)).unwrap();
    group.bench_function("regularized-green", |b| b.iter(|| regularized_green(&k, &k, black_box(&g)).unwrap()));
    group.finish();
}

fn averaging(c: &mut Criterion) {
    let mut group = c.benchmark_group("sphere-average");
    let opts = QuadratureOptions::default();
    for alphas in [vec![1.0], vec![0.5, 0.5]] {
        let spec = EuclideanKernelSpec::spheres(3, &alphas);
        group.bench_function(BenchmarkId::from_parameter(alphas.len()), |b| {
            b.iter(|| sphere_average(3, black_box(&[0.3, 0.0, 0.0]), 2.0, &spec, opts).unwrap())
        });
    }
    group.finish();
}

fn perturbation(c: &mut Criterion) {
    let mut group = c.benchmark_group("perturbation");
    group.bench_function("wick-3x4", |b| b.iter(|| wick_pairings(black_box(&[4, 4, 4]), 12).unwrap()));
    let (mesh, cut) = preset("grid5").unwrap();
    let eta = (0..mesh.node_count()).map(|v| if mesh.is_boundary(v) { 0.5 } else { 0.0 }).collect();
    let scenario = GluingScenario {
        label: "grid5".into(),
        mesh,
        cut,
        operator: OperatorSpec::with_mass_squared(0.1),
        interaction: InteractionSpec::constant(3, 0.3).with(4, Coupling::Constant(0.15)),
        kernel: KernelProfile::Cone,
        lambda: 1.2,
        eta,
        options: PerturbationOptions { max_half_order: 3, ..Default::default() },
    };
    let ctx = GluingContext::new(&scenario).unwrap();
    group.bench_function("glued-series-grid5", |b| b.iter(|| glued_series(black_box(&ctx)).unwrap()));
    group.finish();
}

criterion_group!(benches, green, kernels, averaging, perturbation);
criterion_main!(benches);
