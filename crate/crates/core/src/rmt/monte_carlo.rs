use super::{sample_eigenphases_with, sample_rng, trace_power, variance_closed, EnsembleKind};
use crate::casimir::energy_equal_bernoulli;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sum::{ComplexNeumaier, Neumaier};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Smallest sample count accepted by the Monte Carlo routines.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct EnergyStats {
    pub kind: EnsembleKind,
    #[serde(rename = "B")]
    pub num_bonds: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub closed_form: f64,
    pub samples: usize,
    pub seed: u64,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::arg(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

/// Mean and variance of the equal-length energy over the ensemble.
///
/// Sample `i` uses its own random stream; energies are collected in sample
/// order and summed sequentially, so the result depends only on the seed.
pub fn mc_energy_stats(
    kind: EnsembleKind,
    num_bonds: usize,
    length: f64,
    samples: usize,
    seed: u64,
) -> Result<EnergyStats> {
    check_samples(samples)?;
    let closed_form = variance_closed(kind, num_bonds, length)?;
    let energies: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let th = sample_eigenphases_with(kind, num_bonds, &mut rng);
            energy_equal_bernoulli(&th, length)
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let mean = energies.iter().copied().collect::<Neumaier>().value() / n;
    let mut m2 = Neumaier::new();
    let mut m4 = Neumaier::new();
    for &e in &energies {
        let d = e - mean;
        m2.add(d * d);
        m4.add(d.powi(4));
    }
    let (m2, m4) = (m2.value() / n, m4.value() / n);
    let variance = m2 * n / (n - 1.0);
    Ok(EnergyStats {
        kind,
        num_bonds,
        length,
        mean,
        mean_stderr: (variance / n).sqrt(),
        variance,
        variance_stderr: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        closed_form,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceMoment {
    pub n: i64,
    /// `<tr S^n>`
    pub mean: [f64; 2],
    pub mean_stderr: f64,
    /// `<|tr S^n|^2>`
    pub form_factor: f64,
    pub form_factor_stderr: f64,
}

/// Sample averages of `tr S^n` and `|tr S^n|^2` for each requested `n`.
pub fn mc_trace_moments(
    kind: EnsembleKind,
    num_bonds: usize,
    powers: &[i64],
    samples: usize,
    seed: u64,
) -> Result<Vec<TraceMoment>> {
    check_samples(samples)?;
    let traces: Vec<Vec<C64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let th = sample_eigenphases_with(kind, num_bonds, &mut rng);
            powers.iter().map(|&p| trace_power(&th, p)).collect()
        })
        .collect();
    let nf = samples as f64;
    Ok(powers
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut mean = ComplexNeumaier::new();
            let mut ff = Neumaier::new();
            for tr in &traces {
                mean.add(tr[j]);
                ff.add(tr[j].norm_sqr());
            }
            let mean = mean.value() / nf;
            let ff = ff.value() / nf;
            let mut var_ff = Neumaier::new();
            for tr in &traces {
                var_ff.add((tr[j].norm_sqr() - ff).powi(2));
            }
            TraceMoment {
                n: p,
                mean: [mean.re, mean.im],
                mean_stderr: ((ff - mean.norm_sqr()).max(0.0) / nf).sqrt(),
                form_factor: ff,
                form_factor_stderr: (var_ff.value() / (nf * (nf - 1.0))).sqrt(),
            }
        })
        .collect())
}

/// One JSON object per line.
pub fn write_stats_jsonl<W: Write + ?Sized>(
    w: &mut W,
    stats: &[EnergyStats],
) -> std::io::Result<()> {
    for s in stats {
        serde_json::to_writer(&mut *w, s)?;
        writeln!(w)?;
    }
    Ok(())
}
