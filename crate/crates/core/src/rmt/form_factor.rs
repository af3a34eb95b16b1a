//! Form factors `K(n) = <|tr S^n|^2>` and the energy variance
//!
//! ```text
//! Var E = 1/(8 pi^2 L^2) sum_{n>=1} K(n) / n^4
//! ```
//!
//! which follows from `E = -(1/2 pi L) sum_n Re tr S^n / n^2` and rotation
//! invariance of the ensembles.

use super::EnsembleKind;
use crate::error::{Error, Result};
use crate::special::{digamma, polygamma, ZETA3};
use crate::sum::Neumaier;
use std::f64::consts::PI;

fn check(b: usize, l: f64) -> Result<()> {
    if b == 0 {
        return Err(Error::arg("B must be at least 1"));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidLength {
            bond: "*".into(),
            length: l,
        });
    }
    Ok(())
}

/// `<|tr S^n|^2>` for `S` of size `2B`, `n >= 1`.
pub fn form_factor(kind: EnsembleKind, n: usize, b: usize) -> Result<f64> {
    if n == 0 || b == 0 {
        return Err(Error::arg("form factor needs n >= 1 and B >= 1"));
    }
    let nf = n as f64;
    let dim = 2 * b;
    let bf = b as f64;
    Ok(match kind {
        EnsembleKind::Poisson => dim as f64,
        EnsembleKind::Cue => n.min(dim) as f64,
        EnsembleKind::Coe => {
            if n <= dim {
                let h: Neumaier = (1..=n).map(|m| 1.0 / (m as f64 + bf - 0.5)).collect();
                2.0 * nf - nf * h.value()
            } else {
                let h: Neumaier = (1..=dim)
                    .map(|m| 1.0 / (m as f64 + nf - bf - 0.5))
                    .collect();
                2.0 * dim as f64 - nf * h.value()
            }
        }
        EnsembleKind::Cse => {
            if n <= dim {
                let h: Neumaier = (1..=n).map(|m| 1.0 / (bf + 0.5 - m as f64)).collect();
                2.0 * nf + nf * h.value()
            } else {
                4.0 * bf
            }
        }
        EnsembleKind::CseLifted => form_factor(EnsembleKind::Cse, n, dim)? / 4.0,
    })
}

/// Large-n value of the form factor.
fn saturation(kind: EnsembleKind, b: usize) -> f64 {
    let bf = b as f64;
    match kind {
        EnsembleKind::Cse => 4.0 * bf,
        _ => 2.0 * bf,
    }
}

/// Summation cut-off large enough that the form factor has settled to
/// `1e-13` of its tail contribution.
pub fn default_cutoff(b: usize) -> usize {
    (40 * b).max(2000)
}

/// Direct summation of `K(n)/n^4` up to `cutoff`, plus the saturated tail
/// `K_inf psi'''(cutoff + 1) / 6`.
pub fn variance_from_form_factor(
    kind: EnsembleKind,
    b: usize,
    l: f64,
    cutoff: usize,
) -> Result<f64> {
    check(b, l)?;
    let lifted_dim = if kind == EnsembleKind::CseLifted {
        4 * b
    } else {
        2 * b
    };
    if cutoff < lifted_dim {
        return Err(Error::arg(format!(
            "cut-off {cutoff} is below the matrix size {lifted_dim}"
        )));
    }
    let mut acc = Neumaier::new();
    for n in (1..=cutoff).rev() {
        acc.add(form_factor(kind, n, b)? / (n as f64).powi(4));
    }
    let mut tail = saturation(kind, b) * polygamma(3, cutoff as f64 + 1.0) / 6.0;
    if kind == EnsembleKind::Coe {
        // K(n) = 2B - sum c^2 / n^2 + ..., with c_m = m - B - 1/2
        let c2: f64 = (1..=2 * b)
            .map(|m| (m as f64 - b as f64 - 0.5).powi(2))
            .sum();
        tail -= c2 * polygamma(5, cutoff as f64 + 1.0) / 120.0;
    }
    acc.add(tail);
    Ok(acc.value() / (8.0 * PI * PI * l * l))
}

/// Closed-form variance. The prefactor is `1/(8 pi^2 L^2)`, a quarter of
/// the one in the commonly quoted expressions; see
/// [`variance_closed_printed`].
pub fn variance_closed(kind: EnsembleKind, b: usize, l: f64) -> Result<f64> {
    check(b, l)?;
    let bf = b as f64;
    let n2 = 2.0 * bf;
    let pref = 1.0 / (8.0 * PI * PI * l * l);
    // sum_{n<2B} n^-3
    let head = ZETA3 + 0.5 * polygamma(2, n2);
    let v = match kind {
        EnsembleKind::Poisson => return Ok(PI * PI * bf / (360.0 * l * l)),
        EnsembleKind::Cue => pref * (head + bf / 3.0 * polygamma(3, n2)),
        EnsembleKind::Coe => 2.0 * pref * coe_inner(b),
        EnsembleKind::Cse => {
            let mut s = Neumaier::new();
            s.add(head * (1.0 + 0.5 * digamma(0.5 - bf)));
            for n in 1..2 * b {
                s.add(-digamma(n as f64 - bf + 0.5) / (2.0 * (n as f64).powi(3)));
            }
            s.add(bf / 3.0 * polygamma(3, n2));
            2.0 * pref * s.value()
        }
        EnsembleKind::CseLifted => return Ok(variance_closed(EnsembleKind::Cse, 2 * b, l)? / 4.0),
    };
    Ok(v)
}

/// `(1/2) sum K_COE(n)/n^4`, in the grouping
///
/// ```text
/// (zeta(3) + psi''(2B)/2)(1 + psi(B + 1/2)/2) - sum_{n<2B} psi(n + B + 1/2)/(2n^3)
///   + sum_{n>=2B} [2B/n^4 + (psi(n - B + 1/2) - psi(n + B + 1/2))/(2n^3)]
/// ```
///
/// The last sum runs directly to a cut-off and is finished with its
/// asymptotic expansion.
fn coe_inner(b: usize) -> f64 {
    let bf = b as f64;
    let n2 = 2 * b;
    let head = ZETA3 + 0.5 * polygamma(2, n2 as f64);
    let mut s = Neumaier::new();
    s.add(head * (1.0 + 0.5 * digamma(bf + 0.5)));
    for n in 1..n2 {
        s.add(-digamma(n as f64 + bf + 0.5) / (2.0 * (n as f64).powi(3)));
    }
    s.add(bf / 3.0 * polygamma(3, n2 as f64));
    let cutoff = default_cutoff(b);
    let mut tail = Neumaier::new();
    for n in (n2..=cutoff).rev() {
        let nf = n as f64;
        // psi(n + B + 1/2) - psi(n - B + 1/2) as a finite sum
        let d: Neumaier = (1..=n2).map(|m| 1.0 / (nf - bf - 0.5 + m as f64)).collect();
        tail.add(-d.value() / (2.0 * nf.powi(3)));
    }
    let c2: f64 = (1..=n2).map(|m| (m as f64 - bf - 0.5).powi(2)).sum();
    let x = cutoff as f64 + 1.0;
    tail.add(-bf * polygamma(3, x) / 6.0);
    tail.add(-0.5 * c2 * polygamma(5, x) / 120.0);
    s.add(tail.value());
    s.value()
}

/// The closed forms with the prefactor as usually printed, four times
/// [`variance_closed`].
pub fn variance_closed_printed(kind: EnsembleKind, b: usize, l: f64) -> Result<f64> {
    Ok(4.0 * variance_closed(kind, b, l)?)
}

/// `B -> infinity` limit of the variance (diverges for Poisson).
pub fn large_b_variance(kind: EnsembleKind, l: f64) -> f64 {
    let base = ZETA3 / (8.0 * PI * PI * l * l);
    match kind {
        EnsembleKind::Poisson => f64::INFINITY,
        EnsembleKind::Cue => base,
        EnsembleKind::Coe | EnsembleKind::Cse => 2.0 * base,
        EnsembleKind::CseLifted => base / 2.0,
    }
}
