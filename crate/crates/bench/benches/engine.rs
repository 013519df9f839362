//! Calculation-engine throughput: one full training pass over the sheet,
//! for a small logic net and a wide regression net.

use criterion::{criterion_group, criterion_main, Criterion};
use gridbp::builder;
use gridbp_bench::{logic_records, logic_spec, wide_records, wide_spec};

fn bench_logic_pass(c: &mut Criterion) {
    let records = logic_records();
    let (mut wb, layout) = builder::build_workbook(&logic_spec(), &records, None).unwrap();
    builder::init_run(&mut wb, &layout).unwrap();
    c.bench_function("train_pass_2x2x2x2", |b| {
        b.iter(|| builder::train_run(&mut wb, &layout, 1).unwrap())
    });
}

fn bench_wide_pass(c: &mut Criterion) {
    let records = wide_records();
    let (mut wb, layout) = builder::build_workbook(&wide_spec(), &records, None).unwrap();
    builder::init_run(&mut wb, &layout).unwrap();
    c.bench_function("train_pass_9x50x30x1", |b| {
        b.iter(|| builder::train_run(&mut wb, &layout, 1).unwrap())
    });
}

criterion_group!(benches, bench_logic_pass, bench_wide_pass);
criterion_main!(benches);
