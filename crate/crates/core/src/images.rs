//! Image-sum reconstruction of the cylinder trace
//! `T(t) = sum_n e^{-k_n t}` from the bond scattering matrix.
//!
//! ```text
//! T(t) = L_tot/(pi t) + tr(SJ)/4 + T_PO(t)
//! T_PO(t) = sum_n sum_{p in P_n} A_p (l_p / n) T0(t; l_p)
//! ```
//!
//! with the free kernel `T0(t; x) = (t/pi) / (t^2 + x^2)`. The constant
//! `tr(SJ)/4` is the limit of the bounce-path series, whose partial sums are
//! also available for checking convergence.

use crate::casimir::paths::{successors, ClassWalk, ZERO_AMPLITUDE};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::scattering::{bounce_trace, BondScatteringMatrix};
use crate::special::trigamma;
use crate::spectrum::{cylinder_trace, directed_lengths, Spectrum};
use crate::sum::{ComplexNeumaier, Neumaier};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// Work budget for the class walks here; equal-length graphs need long
/// series but only a handful of states per period.
pub const IMAGE_BUDGET: u64 = 2_000_000_000;

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: t,
            expected: "t > 0",
        })
    }
}

/// `T0(t; x) = (t/pi) / (t^2 + x^2)`
pub fn free_kernel(t: f64, x: f64) -> Result<f64> {
    check_t(t)?;
    Ok(t / PI / (t * t + x * x))
}

/// `int_a^b T0(t; x) dx`
pub fn kernel_integral(t: f64, a: f64, b: f64) -> f64 {
    ((b / t).atan() - (a / t).atan()) / PI
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeriodicTerm {
    pub t: f64,
    pub value: f64,
    /// Bound on the periods left out.
    pub truncation_bound: f64,
    pub n_completed: usize,
}

/// `|c_n(t)| <= 2 B t / (pi n^2 L_min)`, summed over `n > n`.
pub fn periodic_tail_bound(num_bonds: usize, l_min: f64, t: f64, n: usize) -> f64 {
    2.0 * num_bonds as f64 * t / (PI * l_min) * trigamma(n as f64 + 1.0)
}

/// `T_PO` at several values of t from a single walk over periods `1..=n_max`.
pub fn periodic_trace_terms(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    ts: &[f64],
    n_max: usize,
) -> Result<Vec<PeriodicTerm>> {
    s.require_j_symmetric()?;
    for &t in ts {
        check_t(t)?;
    }
    if n_max == 0 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    directed_lengths(s, lengths)?;
    let l_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut acc = vec![Neumaier::new(); ts.len()];
    let mut walk = ClassWalk::new(s, lengths, n_max, IMAGE_BUDGET)?;
    walk.start_periodic();
    let mut completed = 0;
    for n in 1..=n_max {
        if n > 1 && walk.step(n).is_err() {
            break;
        }
        let classes = walk.close(false);
        for (a, &t) in acc.iter_mut().zip(ts) {
            let mut level = ComplexNeumaier::new();
            for c in &classes {
                let l = c.length;
                level.add(c.amplitude * (l / n as f64 * t / PI / (t * t + l * l)));
            }
            a.add(level.value().re);
        }
        completed = n;
    }
    Ok(ts
        .iter()
        .zip(acc)
        .map(|(&t, a)| PeriodicTerm {
            t,
            value: a.value(),
            truncation_bound: periodic_tail_bound(s.num_bonds(), l_min, t, completed),
            n_completed: completed,
        })
        .collect())
}

pub fn periodic_trace_term(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    t: f64,
    n_max: usize,
) -> Result<PeriodicTerm> {
    Ok(periodic_trace_terms(s, lengths, &[t], n_max)?[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct BounceSeries {
    pub t: f64,
    /// `P_m` for `m = 0..=m_max`.
    pub partial_sums: Vec<f64>,
    /// Bound on `|limit - P_{m_max}|`.
    pub remainder_bound: f64,
    /// `tr(SJ)/4`
    pub limit: f64,
}

/// Bound on the bounce levels above `m`:
/// `2 B t L_max / (pi L_min^2) psi'(m + 1)`.
pub fn bounce_remainder_bound(num_bonds: usize, l_min: f64, l_max: f64, t: f64, m: usize) -> f64 {
    2.0 * num_bonds as f64 * t * l_max / (PI * l_min * l_min) * trigamma(m as f64 + 1.0)
}

/// Partial sums of the bounce series
///
/// ```text
/// P_m = 1/2 sum_{n<=m} sum_{|w|=n} sum_a A_{a w rev(a)} int_{l_w}^{l_w + 2 L_a} T0(t; x) dx
/// ```
///
/// over paths that leave along the reversal of `a`, wander through `w`
/// and come back along `a`.
pub fn bounce_partial_sums(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    t: f64,
    m_max: usize,
) -> Result<BounceSeries> {
    s.require_j_symmetric()?;
    check_t(t)?;
    let dl = directed_lengths(s, lengths)?;
    let l_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let l_max = lengths.iter().cloned().fold(0.0, f64::max);
    let mut walk = ClassWalk::new(s, lengths, m_max.max(1), IMAGE_BUDGET)?;
    walk.start_bounce();
    let mut acc = Neumaier::new();
    let mut partial_sums = Vec::with_capacity(m_max + 1);
    for n in 0..=m_max {
        if n > 0 && walk.step(n).is_err() {
            break;
        }
        let mut level = ComplexNeumaier::new();
        for c in walk.close(true) {
            let la = dl[c.tag];
            level.add(c.amplitude * kernel_integral(t, c.length, c.length + 2.0 * la));
        }
        acc.add(0.5 * level.value().re);
        partial_sums.push(acc.value());
    }
    let m_done = partial_sums.len() - 1;
    Ok(BounceSeries {
        t,
        partial_sums,
        remainder_bound: bounce_remainder_bound(s.num_bonds(), l_min, l_max, t, m_done.max(1)),
        limit: bounce_trace(s) / 4.0,
    })
}

/// `|sum_a S[w_1, rev(a)] S[a, w_r] - J[w_1, w_r]| * |A_w|` for an interior
/// path `w = (w_1, ..., w_r)`. Zero whenever `S J S = J`.
pub fn bounce_lemma_residual(s: &BondScatteringMatrix, w: &[usize]) -> Result<f64> {
    let (Some(&first), Some(&last)) = (w.first(), w.last()) else {
        return Err(Error::arg("interior path must be non-empty"));
    };
    if w.iter().any(|&a| a >= s.dim()) {
        return Err(Error::arg("directed bond out of range"));
    }
    let inner: C64 = w.windows(2).map(|p| s.entry(p[1], p[0])).product();
    let mut lhs = ComplexNeumaier::new();
    for a in 0..s.dim() {
        lhs.add(s.entry(first, s.reverse(a)) * s.entry(a, last));
    }
    let j = if s.reverse(last) == first { 1.0 } else { 0.0 };
    Ok(((lhs.value() - j) * inner).norm())
}

pub fn bounce_lemma_check(s: &BondScatteringMatrix, w: &[usize], tol: f64) -> Result<bool> {
    Ok(bounce_lemma_residual(s, w)? <= tol)
}

/// A random walk of `len` directed bonds along allowed transitions.
pub fn random_interior_path<R: Rng>(
    s: &BondScatteringMatrix,
    len: usize,
    rng: &mut R,
) -> Vec<usize> {
    let succ = successors(s.matrix());
    let mut w = vec![rng.random_range(0..s.dim())];
    while w.len() < len {
        let opts = &succ[*w.last().unwrap()];
        if opts.is_empty() {
            break;
        }
        let (next, a) = opts[rng.random_range(0..opts.len())];
        debug_assert!(a.norm() > ZERO_AMPLITUDE);
        w.push(next);
    }
    w
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReconstructedTrace {
    pub t: f64,
    pub value: f64,
    pub weyl: f64,
    pub bounce: f64,
    pub periodic: f64,
    pub truncation_bound: f64,
}

pub fn reconstruct_traces(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    ts: &[f64],
    n_max: usize,
) -> Result<Vec<ReconstructedTrace>> {
    let total = crate::sum::sum(lengths.iter().copied());
    let bounce = bounce_trace(s) / 4.0;
    Ok(periodic_trace_terms(s, lengths, ts, n_max)?
        .into_iter()
        .map(|p| {
            let weyl = total / (PI * p.t);
            ReconstructedTrace {
                t: p.t,
                value: crate::sum::sum([weyl, bounce, p.value]),
                weyl,
                bounce,
                periodic: p.value,
                truncation_bound: p.truncation_bound,
            }
        })
        .collect())
}

/// `L_tot/(pi t) + tr(SJ)/4 + T_PO(t)` with `T_PO` cut at period `n_max`.
pub fn reconstruct_trace(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    t: f64,
    n_max: usize,
) -> Result<ReconstructedTrace> {
    Ok(reconstruct_traces(s, lengths, &[t], n_max)?[0])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceComparison {
    pub t: f64,
    pub spectral: f64,
    pub reconstructed: f64,
    pub abs_diff: f64,
    /// Spectral truncation bound plus the orbit truncation bound.
    pub bound: f64,
}

pub fn compare_traces(
    spectrum: &Spectrum,
    s: &BondScatteringMatrix,
    lengths: &[f64],
    ts: &[f64],
    n_max: usize,
) -> Result<Vec<TraceComparison>> {
    let recon = reconstruct_traces(s, lengths, ts, n_max)?;
    recon
        .into_iter()
        .map(|r| {
            let c = cylinder_trace(spectrum, r.t)?;
            Ok(TraceComparison {
                t: r.t,
                spectral: c.value,
                reconstructed: r.value,
                abs_diff: (c.value - r.value).abs(),
                bound: c.truncation_bound + r.truncation_bound,
            })
        })
        .collect()
}

pub fn write_trace_csv<W: Write + ?Sized>(
    w: &mut W,
    rows: &[TraceComparison],
) -> std::io::Result<()> {
    writeln!(w, "t,spectral,reconstructed,abs_diff,bound")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.t, r.spectral, r.reconstructed, r.abs_diff, r.bound
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_ring, make_star};
    use crate::scattering::bond_scattering_matrix;

    #[test]
    fn kernel_values() {
        assert!((free_kernel(1.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-16);
        assert!(free_kernel(0.0, 1.0).is_err());
        assert!((kernel_integral(0.3, 0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_trace() {
        // T(t) = 1 / (1 - e^{-pi t}) for the Neumann interval of length 1
        let g = make_star(1, &[1.0]).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        for &t in &[0.5, 1.0, 2.0] {
            let r = reconstruct_trace(&s, &[1.0], t, 20_000).unwrap();
            let exact = 1.0 / (1.0 - (-PI * t).exp());
            assert!((r.value - exact).abs() <= r.truncation_bound, "t={t}");
            assert!((r.value - exact).abs() < 1e-4, "t={t}");
        }
    }

    #[test]
    fn lemma_single_bond() {
        let s = bond_scattering_matrix(&make_ring(3, 1.0).unwrap()).unwrap();
        for a in 0..6 {
            assert!(bounce_lemma_residual(&s, &[a]).unwrap() < 1e-15);
        }
    }
}
