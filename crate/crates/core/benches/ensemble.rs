use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sebm::config::ModelConfig;
use sebm::dynamics::Model;
use sebm::exec::Execution;
use sebm::noise::generate_ensemble;
use sebm::picard::{simulate, solve_picard, PicardOptions};

fn desk() -> ModelConfig {
    ModelConfig::from_json_str(include_str!("../../../configs/desk.json")).unwrap()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_noise(c: &mut Criterion) {
    let m = Model::new(&desk()).unwrap();
    let cfg = m.noise_config().unwrap();
    let mut g = c.benchmark_group("noise");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 64), |b| b.iter(|| generate_ensemble(black_box(&cfg), 64, exec)));
    }
    g.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let m = Model::new(&desk()).unwrap();
    let noise = generate_ensemble(&m.noise_config().unwrap(), 64, Execution::Parallel);
    let mut g = c.benchmark_group("simulate");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| simulate(&m, black_box(m.initial_state()), &noise, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_picard(c: &mut Criterion) {
    let m = Model::new(&desk()).unwrap();
    let noise = generate_ensemble(&m.noise_config().unwrap(), 64, Execution::Parallel);
    let mut g = c.benchmark_group("picard");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = PicardOptions { tol: 1e-3, max_iter: 25, exec, check_majorant: false };
        g.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| solve_picard(&m, black_box(m.initial_state()), &noise, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_noise, bench_simulate, bench_picard);
criterion_main!(benches);
