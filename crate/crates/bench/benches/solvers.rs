use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use soav::solvers::{admm_solve, soav_lp_solve};
use soav::{AffineProjector, Preset, SolverOptions};
use soav_bench::gaussian_instance;

fn prox(c: &mut Criterion) {
    let obj = Preset::X5.objective_alphabet(0.3).unwrap().objective();
    let points: Vec<f64> = (0..1024).map(|i| -3.0 + 6.0 * i as f64 / 1023.0).collect();
    c.bench_function("prox_x5_1024", |b| b.iter(|| points.iter().map(|&v| obj.prox_unchecked(0.7, black_box(v))).sum::<f64>()));
}

fn projector(c: &mut Criterion) {
    let mut group = c.benchmark_group("projector_build");
    for (m, n) in [(15, 30), (64, 128), (100, 200)] {
        let inst = gaussian_instance(Preset::X3, 0.5, m, n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{m}x{n}")), &inst, |b, inst| {
            b.iter(|| AffineProjector::new(&inst.phi, &inst.y).unwrap())
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("soav_x3");
    group.sample_size(10);
    for (m, n) in [(15, 30), (64, 128)] {
        let inst = gaussian_instance(Preset::X3, 0.5, m, n, 2);
        let obj = inst.alphabet.objective();
        group.bench_with_input(BenchmarkId::new("simplex", n), &inst, |b, inst| {
            b.iter(|| soav_lp_solve(&obj, &inst.phi, &inst.y, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("splitting", n), &inst, |b, inst| {
            b.iter(|| admm_solve(&obj, &inst.phi, &inst.y, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, prox, projector, solvers);
criterion_main!(benches);
