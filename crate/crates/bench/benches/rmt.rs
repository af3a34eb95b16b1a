use criterion::{criterion_group, criterion_main, Criterion};
use qgvac::rmt::{mc_energy_stats, sample_eigenphases, variance_closed, EnsembleKind};
use std::hint::black_box;

fn rmt(c: &mut Criterion) {
    for kind in EnsembleKind::ALL {
        c.bench_function(&format!("sample/{kind}/B=4"), |b| {
            let mut i = 0;
            b.iter(|| {
                i += 1;
                sample_eigenphases(kind, 4, 1, black_box(i)).unwrap()
            })
        });
    }
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("cue/B=4/10k", |b| {
        b.iter(|| mc_energy_stats(EnsembleKind::Cue, 4, 1.0, 10_000, black_box(7)).unwrap())
    });
    g.finish();
    c.bench_function("closed/coe/B=100", |b| {
        b.iter(|| variance_closed(EnsembleKind::Coe, black_box(100), 1.0).unwrap())
    });
}

criterion_group!(benches, rmt);
criterion_main!(benches);
