use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nkspin::homogeneous::build_nk_geometry;
use nkspin::opcalc::{laplacian, twisted_dirac, BundleSpec, Mode, SectionSpace};
use nkspin::par;
use nkspin::rarita::solve_rarita;
use nkspin::su3_model::model;

fn assembly(c: &mut Criterion) {
    let g = build_nk_geometry(model()).unwrap();
    let mode = Mode::new(2, 1);
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for (label, on) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::new("twisted_dirac", label), &on, |b, &on| {
            par::set_enabled(on);
            let s = SectionSpace::new(&g, BundleSpec::SpinorTangent, mode);
            b.iter(|| twisted_dirac(&s, true));
        });
        group.bench_with_input(BenchmarkId::new("forms_laplacian", label), &on, |b, &on| {
            par::set_enabled(on);
            let s = SectionSpace::new(&g, BundleSpec::Forms, mode);
            b.iter(|| laplacian(&s, false));
        });
        group.bench_with_input(BenchmarkId::new("solve_rarita", label), &on, |b, &on| {
            par::set_enabled(on);
            b.iter(|| solve_rarita(&g, mode, 1e-8));
        });
    }
    par::set_enabled(true);
    group.finish();
}

criterion_group!(benches, assembly);
criterion_main!(benches);
