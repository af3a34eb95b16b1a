mod common;

use proptest::prelude::*;
use qgvac::images::{
    bounce_lemma_residual, bounce_partial_sums, compare_traces, free_kernel, kernel_integral,
    random_interior_path, reconstruct_trace, write_trace_csv,
};
use qgvac::rmt::sample_rng;
use qgvac::{
    bond_scattering_matrix, find_spectrum, make_ring, make_star, make_star_with, VertexCondition,
};
use std::f64::consts::PI;

#[test]
fn kernel_normalisation() {
    // The free kernel t / (pi (t^2 + x^2)) integrates to 1 over the line.
    let t = 0.7;
    assert!((2.0 * kernel_integral(t, 0.0, f64::INFINITY) - 1.0).abs() < 1e-15);
    let h = 1e-4;
    let numeric =
        (kernel_integral(t, 0.3, 0.3 + h) / h - free_kernel(t, 0.3 + h / 2.0).unwrap()).abs();
    assert!(numeric < 1e-7);
    assert!(free_kernel(-1.0, 0.0).is_err());
}

#[test]
fn interval_trace_from_images() {
    // T(t) = 1 / (1 - exp(-pi t)) exactly.
    let g = make_star(1, &[1.0]).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    for t in [0.3, 1.0, 4.0] {
        let r = reconstruct_trace(&s, &g.lengths(), t, 4000).unwrap();
        let exact = 1.0 / (1.0 - (-PI * t).exp());
        assert!((r.value - exact).abs() <= r.truncation_bound, "t={t}");
        assert!((r.weyl - 1.0 / (PI * t)).abs() < 1e-15);
        assert!((r.bounce - 0.5).abs() < 1e-15);
    }
}

#[test]
fn circle_trace_from_images() {
    // Circle of length 2 pi: T(t) = coth(t/2), no bounce term.
    let g = make_ring(1, 2.0 * PI).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    for t in [0.5, 2.0] {
        let r = reconstruct_trace(&s, &g.lengths(), t, 4000).unwrap();
        let exact = 1.0 / (t / 2.0).tanh();
        assert_eq!(r.bounce, 0.0);
        assert!((r.value - exact).abs() <= r.truncation_bound, "t={t}");
    }
}

#[test]
fn long_time_limit_counts_zero_modes() {
    // Kirchhoff star: one zero mode, so T(t) -> 1 rather than tr(SJ)/4 = 1/2;
    // the periodic orbits supply the other half.
    let g = make_star(3, &[1.0; 3]).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    let sp = find_spectrum(&s, &g.lengths(), 10.0).unwrap();
    let rows = compare_traces(&sp, &s, &g.lengths(), &[60.0], 20_000).unwrap();
    assert!((rows[0].spectral - 1.0).abs() < 1e-12);
    assert!(rows[0].abs_diff <= rows[0].bound);
}

#[test]
fn star_reconstruction_within_bounds() {
    let g = make_star(3, &[1.0, 2f64.sqrt(), PI / 3.0]).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    let ts = [0.5, 1.0, 2.0];
    let sp = find_spectrum(&s, &g.lengths(), 80.0).unwrap();
    let rows = compare_traces(&sp, &s, &g.lengths(), &ts, 60).unwrap();
    for r in &rows {
        assert!(r.abs_diff <= r.bound, "{r:?}");
    }
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &rows).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
}

#[test]
fn bounce_series_tends_to_quarter_trace() {
    let g = make_star(4, &[1.0; 4]).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    let series = bounce_partial_sums(&s, &g.lengths(), 0.8, 20_000).unwrap();
    assert!((series.limit - 0.5).abs() < 1e-14);
    let last = *series.partial_sums.last().unwrap();
    assert!((last - series.limit).abs() <= series.remainder_bound);
    assert!((last - series.limit).abs() < 1e-4);
}

#[test]
fn lemma_fails_without_j_symmetry() {
    let g = make_star_with(3, &[1.0; 3], VertexCondition::Dft).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    let mut rng = sample_rng(5, 0);
    let worst = (0..200)
        .map(|_| bounce_lemma_residual(&s, &random_interior_path(&s, 4, &mut rng)).unwrap())
        .fold(0.0, f64::max);
    assert!(worst > 0.1);
    assert!(bounce_lemma_residual(&s, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lemma_holds_on_kirchhoff_graphs(g in common::kirchhoff_graph(6), seed in 0u64..1000) {
        let s = bond_scattering_matrix(&g).unwrap();
        let mut rng = sample_rng(seed, 0);
        for len in 1..8 {
            let w = random_interior_path(&s, len, &mut rng);
            prop_assert!(bounce_lemma_residual(&s, &w).unwrap() < 1e-12);
        }
    }
}

#[test]
fn bounce_limit_is_t_independent() {
    let g = make_star(3, &[1.0, 2f64.sqrt(), PI / 3.0]).unwrap();
    let s = bond_scattering_matrix(&g).unwrap();
    let a = bounce_partial_sums(&s, &g.lengths(), 0.4, 5).unwrap();
    let b = bounce_partial_sums(&s, &g.lengths(), 1.2, 5).unwrap();
    assert_eq!(a.limit, b.limit);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn bounce_remainder_is_bounded(g in common::kirchhoff_graph(5), t in 0.2f64..3.0) {
        let equal = g.with_lengths(&vec![1.0; g.num_bonds()]).unwrap();
        let s = bond_scattering_matrix(&equal).unwrap();
        let series = bounce_partial_sums(&s, &equal.lengths(), t, 3000).unwrap();
        let last = *series.partial_sums.last().unwrap();
        prop_assert!((last - series.limit).abs() <= series.remainder_bound);
    }
}
