use agrobio::calibration::Sobol;
use agrobio::{initialize_population, run_replica, RandomStream, ScenarioConfig, ScenarioKind, Simulation};
use agrobio_bench::{census_like_histogram, desk_params};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn initialisation(c: &mut Criterion) {
    let p = desk_params();
    let h = census_like_histogram();
    c.bench_function("initialise 30k farms", |b| {
        b.iter(|| initialize_population(&p, &h, &mut RandomStream::new(black_box(7))).unwrap())
    });
}

fn yearly_step(c: &mut Criterion) {
    let p = desk_params();
    let h = census_like_histogram();
    for kind in [ScenarioKind::Baseline, ScenarioKind::Combined] {
        let scenario = ScenarioConfig::of_kind(kind);
        c.bench_function(&format!("step year, {}", kind.name()), |b| {
            b.iter_batched(
                || Simulation::new(&p, &scenario, &h, 3).unwrap(),
                |mut sim| sim.step_year().unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
}

fn full_replica(c: &mut Criterion) {
    let p = desk_params();
    let h = census_like_histogram();
    let scenario = ScenarioConfig::of_kind(ScenarioKind::Baseline);
    let mut g = c.benchmark_group("replica");
    g.sample_size(10);
    g.bench_function("baseline 1990-2075", |b| {
        b.iter(|| run_replica(&p, &scenario, &h, black_box(1)).unwrap())
    });
    g.finish();
}

fn sobol(c: &mut Criterion) {
    c.bench_function("sobol 4096 x 7", |b| b.iter(|| Sobol::points(black_box(7), 4096).unwrap()));
}

criterion_group!(benches, initialisation, yearly_step, full_replica, sobol);
criterion_main!(benches);
