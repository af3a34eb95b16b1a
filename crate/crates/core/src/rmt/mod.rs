//! Random-matrix models of the vacuum energy: eigenphase samplers for the
//! circular ensembles, their form factors, closed-form variances and Monte
//! Carlo estimates.

mod form_factor;
mod monte_carlo;

pub use form_factor::{
    default_cutoff, form_factor, large_b_variance, variance_closed, variance_closed_printed,
    variance_from_form_factor,
};
pub use monte_carlo::{
    mc_energy_stats, mc_trace_moments, write_stats_jsonl, EnergyStats, TraceMoment,
};

use crate::error::{Error, Result};
use crate::linalg::{c, unitary_eigenphases, CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::Serialize;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// Independent uniform phases.
    Poisson,
    /// Orthogonal: `U^T U` with Haar `U`.
    Coe,
    /// Haar measure on U(2B).
    Cue,
    /// Symplectic, Kramers pairs kept: each phase appears twice.
    Cse,
    /// Symplectic with the Kramers degeneracy lifted: a CSE matrix of
    /// size 4B, keeping one phase of each pair.
    CseLifted,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 5] = [
        EnsembleKind::Poisson,
        EnsembleKind::Coe,
        EnsembleKind::Cue,
        EnsembleKind::Cse,
        EnsembleKind::CseLifted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Poisson => "poisson",
            EnsembleKind::Coe => "coe",
            EnsembleKind::Cue => "cue",
            EnsembleKind::Cse => "cse",
            EnsembleKind::CseLifted => "cse-lifted",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown ensemble `{s}` (expected poisson, coe, cue, cse or cse-lifted)"
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSample {
    pub kind: EnsembleKind,
    pub num_bonds: usize,
    /// `2B` eigenphases in (0, 2pi], ascending.
    pub thetas: Vec<f64>,
}

/// Generator for sample `index` of a run seeded with `seed`. Every sample
/// owns a stream, so results do not depend on how samples are split
/// between threads.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= ph);
    }
    q
}

/// `Z = I_m (x) [[0, 1], [-1, 0]]`
fn symplectic_unit(m: usize) -> CMatrix {
    let mut z = CMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        z[(2 * i, 2 * i + 1)] = c(1.0);
        z[(2 * i + 1, 2 * i)] = c(-1.0);
    }
    z
}

/// Self-dual unitary `Z U^T Z^T U` of size `2m`.
pub fn cse_matrix<R: Rng>(m: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(2 * m, rng);
    let z = symplectic_unit(m);
    &z * u.transpose() * z.transpose() * u
}

/// Group ascending phases into adjacent pairs (possibly wrapping through
/// 0) and return the circular mean of each pair.
pub fn kramers_pairs(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    assert!(
        n.is_multiple_of(2),
        "Kramers pairing needs an even number of phases"
    );
    let gap = |a: f64, b: f64| {
        let d = (b - a).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let spread = |offset: usize| {
        (0..n / 2)
            .map(|p| {
                gap(
                    sorted[(2 * p + offset) % n],
                    sorted[(2 * p + 1 + offset) % n],
                )
            })
            .fold(0.0, f64::max)
    };
    let offset = if n > 2 && spread(1) < spread(0) { 1 } else { 0 };
    let mut out: Vec<f64> = (0..n / 2)
        .map(|p| {
            let a = sorted[(2 * p + offset) % n];
            let b = sorted[(2 * p + 1 + offset) % n];
            let d = (b - a + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
            crate::linalg::wrap_phase(a + 0.5 * d)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn into_upper_half_open(mut thetas: Vec<f64>) -> Vec<f64> {
    for t in &mut thetas {
        if *t <= 0.0 {
            *t += TAU;
        }
    }
    thetas.sort_by(f64::total_cmp);
    thetas
}

/// `2B` eigenphases of one matrix drawn from the ensemble.
pub fn sample_eigenphases_with<R: Rng>(
    kind: EnsembleKind,
    num_bonds: usize,
    rng: &mut R,
) -> Vec<f64> {
    let n = 2 * num_bonds;
    let phases = match kind {
        EnsembleKind::Poisson => {
            let u = Uniform::new(0.0, TAU).expect("valid range");
            (0..n).map(|_| rng.sample(u)).collect()
        }
        EnsembleKind::Cue => unitary_eigenphases(&haar_unitary(n, rng)),
        EnsembleKind::Coe => {
            let u = haar_unitary(n, rng);
            unitary_eigenphases(&(u.transpose() * u))
        }
        EnsembleKind::Cse => {
            let pairs = kramers_pairs(&unitary_eigenphases(&cse_matrix(num_bonds, rng)));
            pairs.iter().flat_map(|&p| [p, p]).collect()
        }
        EnsembleKind::CseLifted => kramers_pairs(&unitary_eigenphases(&cse_matrix(n, rng))),
    };
    into_upper_half_open(phases)
}

pub fn sample_eigenphases(
    kind: EnsembleKind,
    num_bonds: usize,
    seed: u64,
    index: u64,
) -> Result<EnsembleSample> {
    if num_bonds == 0 {
        return Err(Error::arg("B must be at least 1"));
    }
    let mut rng = sample_rng(seed, index);
    Ok(EnsembleSample {
        kind,
        num_bonds,
        thetas: sample_eigenphases_with(kind, num_bonds, &mut rng),
    })
}

/// A Haar-random J-symmetric unitary of size `2B`: `W diag(+-1) W^dagger J`
/// with Haar `W` and independent fair signs.
pub fn random_j_symmetric<R: Rng>(num_bonds: usize, rng: &mut R) -> CMatrix {
    let n = 2 * num_bonds;
    let w = haar_unitary(n, rng);
    let signs = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        c(if rng.random::<bool>() { 1.0 } else { -1.0 })
    }));
    let j = crate::graph::JOperator::new(num_bonds).matrix();
    &w * signs * w.adjoint() * j
}

/// `tr S^n` from the eigenphases.
pub fn trace_power(thetas: &[f64], n: i64) -> C64 {
    let mut acc = crate::sum::ComplexNeumaier::new();
    for &t in thetas {
        acc.add(C64::from_polar(1.0, n as f64 * t));
    }
    acc.value()
}
