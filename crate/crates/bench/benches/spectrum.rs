use criterion::{criterion_group, criterion_main, Criterion};
use qgvac::images::reconstruct_traces;
use qgvac::{bond_scattering_matrix, find_spectrum, make_star};
use std::hint::black_box;

fn spectrum(c: &mut Criterion) {
    let star = make_star(3, &[1.0, 2f64.sqrt(), std::f64::consts::PI / 3.0]).unwrap();
    let s = bond_scattering_matrix(&star).unwrap();
    let l = star.lengths();
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(20);
    for k_max in [50.0, 200.0] {
        g.bench_function(format!("star3/kmax={k_max}"), |b| {
            b.iter(|| find_spectrum(black_box(&s), &l, k_max).unwrap())
        });
    }
    g.finish();
    c.bench_function("images/star3/n=40", |b| {
        b.iter(|| reconstruct_traces(black_box(&s), &l, &[0.5, 1.0, 2.0], 40).unwrap())
    });
}

criterion_group!(benches, spectrum);
criterion_main!(benches);
