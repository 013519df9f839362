//! Numerical-oracle throughput: direct forward/backward/update steps, the
//! ceiling the interpreted sheet path is compared against.

use criterion::{criterion_group, criterion_main, Criterion};
use gridbp::oracle;
use gridbp_bench::{wide_records, wide_spec};

fn bench_sgd_step(c: &mut Criterion) {
    let spec = wide_spec();
    let records = wide_records();
    let sim = oracle::simulate_vbp_final(&spec, &records, 1).unwrap().unwrap();
    let mut weights = sim.w_b;
    let (inp, targ) = records[0].clone();
    c.bench_function("oracle_sgd_step_9x50x30x1", |b| {
        b.iter(|| {
            weights = oracle::sgd_step(&weights, &spec.activations, &spec.etas, &inp, &targ)
                .unwrap();
        })
    });
}

fn bench_replay_pass(c: &mut Criterion) {
    let spec = wide_spec();
    let records = wide_records();
    c.bench_function("oracle_replay_100_passes", |b| {
        b.iter(|| {
            std::hint::black_box(
                oracle::simulate_vbp_final(&spec, &records, 100).unwrap().unwrap(),
            );
        })
    });
}

criterion_group!(benches, bench_sgd_step, bench_replay_pass);
criterion_main!(benches);
