use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gradedjet::check::{Runner, Suite};

fn batch(c: &mut Criterion) {
    let suites = [Suite::Diffop, Suite::Jets];
    let mut g = c.benchmark_group("check_batch");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| black_box(Runner::new(black_box(1), 64).run(&suites, "batch")))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(
                Runner::new(black_box(1), 64)
                    .sequential()
                    .run(&suites, "batch"),
            )
        })
    });
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
