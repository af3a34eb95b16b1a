use qgvac::casimir::energy_equal_bernoulli;
use qgvac::linalg::unitarity_defect;
use qgvac::rmt::sample_rng;
use qgvac::rmt::{
    form_factor, large_b_variance, mc_energy_stats, mc_trace_moments, random_j_symmetric,
    sample_eigenphases, variance_closed, variance_closed_printed, variance_from_form_factor,
    write_stats_jsonl, EnsembleKind,
};
use qgvac::scattering::is_j_symmetric;
use std::f64::consts::PI;

const ZETA3: f64 = 1.202_056_903_159_594_3;

#[test]
fn names_round_trip() {
    for k in EnsembleKind::ALL {
        assert_eq!(k.to_string().parse::<EnsembleKind>().unwrap(), k);
    }
    assert!("gue".parse::<EnsembleKind>().is_err());
}

#[test]
fn eigenphase_samples() {
    for k in EnsembleKind::ALL {
        for b in [1, 3] {
            let s = sample_eigenphases(k, b, 1, 0).unwrap();
            assert_eq!(s.thetas.len(), 2 * b);
            assert!(s.thetas.iter().all(|&t| t > 0.0 && t <= 2.0 * PI));
        }
    }
    // CSE phases come in Kramers pairs.
    let s = sample_eigenphases(EnsembleKind::Cse, 3, 9, 4).unwrap();
    let mut th = s.thetas.clone();
    th.sort_by(f64::total_cmp);
    for p in th.chunks(2) {
        assert!((p[0] - p[1]).abs() < 1e-9);
    }
    assert!(sample_eigenphases(EnsembleKind::Cue, 0, 1, 0).is_err());
}

#[test]
fn samples_are_reproducible() {
    let a = mc_energy_stats(EnsembleKind::Coe, 2, 1.0, 2000, 42).unwrap();
    let b = mc_energy_stats(EnsembleKind::Coe, 2, 1.0, 2000, 42).unwrap();
    let c = mc_energy_stats(EnsembleKind::Coe, 2, 1.0, 2000, 43).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.variance.to_bits(), b.variance.to_bits());
    assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    assert!(mc_energy_stats(EnsembleKind::Coe, 2, 1.0, 10, 42).is_err());
}

#[test]
fn random_j_symmetric_matrices() {
    let mut rng = sample_rng(3, 0);
    for b in 1..=4 {
        let s = random_j_symmetric(b, &mut rng);
        assert!(unitarity_defect(&s) < 1e-12);
        assert!(is_j_symmetric(&s));
    }
}

/// Monte Carlo form factors against the closed expressions.
#[test]
fn form_factors_match_sampling() {
    let powers = [1, 2, 3, 5, 8, 12];
    for kind in [
        EnsembleKind::Coe,
        EnsembleKind::Cue,
        EnsembleKind::Cse,
        EnsembleKind::CseLifted,
    ] {
        let moments = mc_trace_moments(kind, 3, &powers, 20_000, 17).unwrap();
        for m in moments {
            let want = form_factor(kind, m.n as usize, 3).unwrap();
            let z = (m.form_factor - want) / m.form_factor_stderr;
            assert!(
                z.abs() < 4.0,
                "{kind} n={}: {} vs {want}",
                m.n,
                m.form_factor
            );
        }
    }
}

#[test]
fn form_factor_shapes() {
    for b in 1..=5 {
        let dim = 2 * b;
        assert_eq!(
            form_factor(EnsembleKind::Poisson, 7, b).unwrap(),
            dim as f64
        );
        assert_eq!(form_factor(EnsembleKind::Cue, dim, b).unwrap(), dim as f64);
        // COE starts at 2n/(1 + ...) below the CUE doubling, CSE saturates at 4B.
        assert!(form_factor(EnsembleKind::Coe, 1, b).unwrap() > 1.0);
        assert_eq!(
            form_factor(EnsembleKind::Cse, dim + 3, b).unwrap(),
            4.0 * b as f64
        );
        let far = form_factor(EnsembleKind::Coe, 50_000, b).unwrap();
        assert!((far - dim as f64).abs() < 1e-6);
    }
}

#[test]
fn closed_forms_match_series() {
    for kind in EnsembleKind::ALL {
        for b in 1..=6 {
            let closed = variance_closed(kind, b, 1.3).unwrap();
            let series = variance_from_form_factor(kind, b, 1.3, 4000).unwrap();
            assert!((closed - series).abs() < 1e-13 * closed, "{kind} B={b}");
        }
    }
}

#[test]
fn coe_from_independent_sum() {
    // K(n) = 2n - n sum_{m=1}^{n} 1/(m + B - 1/2) for n <= 2B, direct tail beyond.
    let b = 3usize;
    let bf = b as f64;
    let mut total = 0.0;
    for n in 1..=200_000usize {
        let nf = n as f64;
        let k = if n <= 2 * b {
            2.0 * nf - nf * (1..=n).map(|m| 1.0 / (m as f64 + bf - 0.5)).sum::<f64>()
        } else {
            2.0 * 2.0 * bf
                - nf * (1..=2 * b)
                    .map(|m| 1.0 / (m as f64 + nf - bf - 0.5))
                    .sum::<f64>()
        };
        total += k / nf.powi(4);
    }
    let want = total / (8.0 * PI * PI);
    assert!((variance_closed(EnsembleKind::Coe, b, 1.0).unwrap() - want).abs() < 1e-12);
}

#[test]
fn poisson_variance() {
    // 2B zeta(4) / (8 pi^2) = B pi^2 / 360.
    for b in 1..=5 {
        let v = variance_closed(EnsembleKind::Poisson, b, 1.0).unwrap();
        assert!((v - b as f64 * PI * PI / 360.0).abs() < 1e-15);
    }
}

#[test]
fn printed_convention_is_four_times_larger() {
    for kind in EnsembleKind::ALL {
        let a = variance_closed(kind, 3, 1.0).unwrap();
        let p = variance_closed_printed(kind, 3, 1.0).unwrap();
        assert!((p - 4.0 * a).abs() < 1e-15);
    }
}

#[test]
fn large_b_limits() {
    let cue = ZETA3 / (8.0 * PI * PI);
    assert!((large_b_variance(EnsembleKind::Cue, 1.0) - cue).abs() < 1e-16);
    let b = 2000;
    for (kind, factor) in [
        (EnsembleKind::Cue, 1.0),
        (EnsembleKind::Coe, 2.0),
        (EnsembleKind::Cse, 2.0),
        (EnsembleKind::CseLifted, 0.5),
    ] {
        let v = variance_closed(kind, b, 1.0).unwrap();
        assert!((v / (factor * cue) - 1.0).abs() < 1e-3, "{kind}: {v}");
    }
    assert!(large_b_variance(EnsembleKind::Poisson, 1.0).is_infinite());
}

#[test]
fn ordering_at_b4() {
    let v = |k| variance_closed(k, 4, 1.0).unwrap();
    assert!(v(EnsembleKind::Coe) > v(EnsembleKind::Cue));
    assert!(v(EnsembleKind::Cue) > v(EnsembleKind::CseLifted));
}

#[test]
fn lifted_cse_sampling() {
    let st = mc_energy_stats(EnsembleKind::CseLifted, 2, 1.0, 20_000, 5).unwrap();
    assert!(((st.variance - st.closed_form) / st.variance_stderr).abs() < 3.5);
    assert!((st.mean / st.mean_stderr).abs() < 3.5);
}

#[test]
fn energy_is_scale_covariant() {
    let s = sample_eigenphases(EnsembleKind::Cue, 3, 1, 1).unwrap();
    let e1 = energy_equal_bernoulli(&s.thetas, 1.0).unwrap();
    let e2 = energy_equal_bernoulli(&s.thetas, 2.0).unwrap();
    assert!((e1 - 2.0 * e2).abs() < 1e-15);
}

#[test]
fn jsonl_fields() {
    let st = mc_energy_stats(EnsembleKind::Cue, 2, 1.0, 1000, 1).unwrap();
    let mut buf = Vec::new();
    write_stats_jsonl(&mut buf, &[st.clone(), st]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(v["kind"], "cue");
    assert_eq!(v["B"], 2);
    assert_eq!(v["samples"], 1000);
}
