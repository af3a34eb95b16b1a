//! Laplacian spectra from the secular condition `det(I - e^{ikL} S) = 0`,
//! the cylinder trace and the spectral route to the vacuum energy.
//!
//! Roots are located by counting: the eigenphases of the unitary
//! evolution `U(k) = e^{ikL} S` turn monotonically forward, and the phase
//! of `det U(k)` is `2 L_tot k` plus a constant. With phases wrapped into
//! [0, 2pi) the number of eigenvalues in (0, k] is therefore
//!
//! ```text
//! N(k) = (2 L_tot k - sum phi(k) + sum phi(0)) / 2pi
//! ```
//!
//! which is an integer at every k and needs no branch tracking.

use crate::error::{Error, Result};
use crate::linalg::{unitary_eigenphases, CMatrix, C64};
use crate::scattering::BondScatteringMatrix;
use crate::sum::Neumaier;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// The cylinder-trace truncation estimate needs `t >= TRUNCATION_RATIO / k_max`.
pub const TRUNCATION_RATIO: f64 = 37.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub k: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Positive eigenvalues, ascending, complete up to `k_max`.
    pub eigenvalues: Vec<Eigenvalue>,
    pub k_max: f64,
    pub tolerance: f64,
    /// Multiplicity of `k = 0`.
    pub zero_modes: usize,
    /// Whether traces over this spectrum count the zero modes.
    pub include_zero_mode: bool,
    pub total_length: f64,
    pub num_bonds: usize,
}

impl Spectrum {
    /// Number of positive eigenvalues counted with multiplicity.
    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Number of positive eigenvalues in (0, k].
    pub fn count_below(&self, k: f64) -> usize {
        self.eigenvalues
            .iter()
            .take_while(|e| e.k <= k)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Each eigenvalue repeated by its multiplicity.
    pub fn flat(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.k, e.multiplicity))
            .collect()
    }

    /// Weyl's law `k L_tot / pi`.
    pub fn weyl(&self, k: f64) -> f64 {
        k * self.total_length / PI
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Width of the final bracket around each root.
    pub tolerance: f64,
    /// Roots closer than this are reported as one degenerate eigenvalue.
    pub merge_distance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tolerance: 1e-10,
            merge_distance: 1e-8,
        }
    }
}

pub(crate) fn directed_lengths(s: &BondScatteringMatrix, lengths: &[f64]) -> Result<Vec<f64>> {
    if lengths.len() != s.num_bonds() {
        return Err(Error::arg(format!(
            "S has {} bonds but {} lengths were given",
            s.num_bonds(),
            lengths.len()
        )));
    }
    for (b, &l) in lengths.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidLength {
                bond: b.to_string(),
                length: l,
            });
        }
    }
    Ok(lengths.iter().chain(lengths).copied().collect())
}

/// `U(k) = diag(e^{i k L_alpha}) S`
pub fn evolution_matrix(s: &BondScatteringMatrix, lengths: &[f64], k: f64) -> Result<CMatrix> {
    let dl = directed_lengths(s, lengths)?;
    Ok(evolution_from_directed(s.matrix(), &dl, k))
}

fn evolution_from_directed(s: &CMatrix, dl: &[f64], k: f64) -> CMatrix {
    let mut u = s.clone();
    for (i, &l) in dl.iter().enumerate() {
        let ph = C64::from_polar(1.0, k * l);
        u.row_mut(i).iter_mut().for_each(|z| *z *= ph);
    }
    u
}

/// Eigenphases of `U(k)` in [0, 2pi), ascending.
pub fn evolution_eigenphases(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    k: f64,
) -> Result<Vec<f64>> {
    Ok(unitary_eigenphases(&evolution_matrix(s, lengths, k)?))
}

struct Counter<'a> {
    s: &'a CMatrix,
    dl: Vec<f64>,
    rate: f64,
    base: f64,
}

impl<'a> Counter<'a> {
    fn new(s: &'a BondScatteringMatrix, lengths: &[f64]) -> Result<Self> {
        let dl = directed_lengths(s, lengths)?;
        let rate = crate::sum::sum(dl.iter().copied());
        // Phases at 0 sit at the start of the count, whichever side of the
        // cut the solver put them.
        let base = unitary_eigenphases(s.matrix())
            .into_iter()
            .map(|p| if p > TAU - 1e-9 { 0.0 } else { p })
            .collect::<Neumaier>()
            .value();
        Ok(Counter {
            s: s.matrix(),
            dl,
            rate,
            base,
        })
    }

    fn count(&self, k: f64) -> Result<usize> {
        let phases = unitary_eigenphases(&evolution_from_directed(self.s, &self.dl, k));
        let mut acc: Neumaier = phases.iter().map(|p| -p).collect();
        acc.add(self.rate * k);
        acc.add(self.base);
        let r = acc.value() / TAU;
        let n = r.round();
        if (r - n).abs() > 1e-6 || n < 0.0 {
            return Err(Error::RootFinding(format!(
                "eigenphase count {r} at k = {k} is not a non-negative integer"
            )));
        }
        Ok(n as usize)
    }

    fn isolate(
        &self,
        a: f64,
        b: f64,
        na: usize,
        nb: usize,
        tol: f64,
        out: &mut Vec<(f64, usize)>,
    ) -> Result<()> {
        if nb == na {
            return Ok(());
        }
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            out.push((mid, nb - na));
            return Ok(());
        }
        let nm = self.count(mid)?;
        if nm < na || nm > nb {
            return Err(Error::RootFinding(format!(
                "count not monotone on [{a}, {b}]: {na}, {nm}, {nb}"
            )));
        }
        self.isolate(a, mid, na, nm, tol, out)?;
        self.isolate(mid, b, nm, nb, tol, out)
    }
}

/// Number of eigenvalues in (0, k], with multiplicity.
pub fn counting_function(s: &BondScatteringMatrix, lengths: &[f64], k: f64) -> Result<usize> {
    Counter::new(s, lengths)?.count(k)
}

pub fn find_spectrum(s: &BondScatteringMatrix, lengths: &[f64], k_max: f64) -> Result<Spectrum> {
    find_spectrum_with(s, lengths, k_max, &SpectrumOptions::default())
}

/// All eigenvalues in (0, k_max], each located to within `tolerance`.
pub fn find_spectrum_with(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    k_max: f64,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    s.require_j_symmetric()?;
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(Error::arg(format!("k_max must be positive, got {k_max}")));
    }
    let counter = Counter::new(s, lengths)?;
    let total_length = counter.rate / 2.0;
    // about a quarter of an eigenvalue per cell on average
    let step = PI / (4.0 * total_length);
    let cells = (k_max / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { k_max } else { i as f64 * step })
        .collect();
    let counts: Vec<usize> = grid
        .par_iter()
        .map(|&k| if k == 0.0 { Ok(0) } else { counter.count(k) })
        .collect::<Result<_>>()?;
    let roots: Vec<Vec<(f64, usize)>> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            if counts[i + 1] < counts[i] {
                return Err(Error::RootFinding(format!(
                    "count decreased between k = {} and {}",
                    grid[i],
                    grid[i + 1]
                )));
            }
            counter.isolate(
                grid[i],
                grid[i + 1],
                counts[i],
                counts[i + 1],
                opts.tolerance,
                &mut out,
            )?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let eigenvalues = merge_roots(roots.into_iter().flatten(), opts.merge_distance);
    Ok(Spectrum {
        eigenvalues,
        k_max,
        tolerance: opts.tolerance,
        zero_modes: zero_mode_multiplicity(s, lengths)?,
        include_zero_mode: true,
        total_length,
        num_bonds: s.num_bonds(),
    })
}

fn merge_roots(roots: impl IntoIterator<Item = (f64, usize)>, dist: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new(); // (weighted sum, mult, last k)
    for (k, m) in roots {
        match out.last_mut() {
            Some(last) if k - last.2 < dist => {
                last.0 += k * m as f64;
                last.1 += m;
                last.2 = k;
            }
            _ => out.push((k * m as f64, m, k)),
        }
    }
    out.into_iter()
        .map(|(w, m, _)| Eigenvalue {
            k: w / m as f64,
            multiplicity: m,
        })
        .collect()
}

/// Eigenvalues `(2 pi n - theta_j)/L` of an equal-length graph with bond
/// eigenphases `theta_j`, positive values only. Returns the `count`
/// smallest with multiplicity, dropping a degenerate group that would be
/// cut in two; `k_max` is the last value kept.
pub fn equal_length_spectrum(thetas: &[f64], length: f64, count: usize) -> Result<Spectrum> {
    if thetas.is_empty() || !thetas.len().is_multiple_of(2) {
        return Err(Error::arg("need an even, non-zero number of eigenphases"));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidLength {
            bond: "*".into(),
            length,
        });
    }
    let per_phase = count / thetas.len() + 2;
    let mut ks: Vec<f64> = Vec::with_capacity(per_phase * thetas.len());
    // e^{i(theta + kL)} = 1, so k = (2 pi n - theta) / L with n >= 1.
    for &th in thetas {
        let th = crate::linalg::wrap_phase(th);
        for n in 1..=per_phase + 1 {
            let k = (TAU * n as f64 - th) / length;
            if k > 1e-12 / length {
                ks.push(k);
            }
        }
    }
    ks.sort_by(f64::total_cmp);
    let mut eigenvalues = merge_roots(ks.into_iter().map(|k| (k, 1)), 1e-8);
    let mut kept = 0;
    let mut cut = eigenvalues.len();
    for (i, e) in eigenvalues.iter().enumerate() {
        if kept + e.multiplicity > count {
            cut = i;
            break;
        }
        kept += e.multiplicity;
    }
    eigenvalues.truncate(cut);
    let k_max = eigenvalues.last().map_or(0.0, |e| e.k);
    let num_bonds = thetas.len() / 2;
    Ok(Spectrum {
        eigenvalues,
        k_max,
        tolerance: 0.0,
        zero_modes: 0,
        include_zero_mode: false,
        total_length: length * num_bonds as f64,
        num_bonds,
    })
}

/// Number of independent zero modes: functions linear on every bond that
/// satisfy the vertex conditions at k = 0.
///
/// `S J` is the direct sum of the vertex matrices indexed by departure
/// ends, so the conditions read `P f = 0` and `Q g = 0` with `P`, `Q`
/// the projectors of `S J` onto its `-1` and `+1` eigenspaces, `f` the end
/// values and `g` the outgoing end derivatives.
pub fn zero_mode_multiplicity(s: &BondScatteringMatrix, lengths: &[f64]) -> Result<usize> {
    s.require_j_symmetric()?;
    let dl = directed_lengths(s, lengths)?;
    let nb = s.num_bonds();
    let n = 2 * nb;
    let sj = CMatrix::from_fn(n, n, |a, g| s.entry(a, s.reverse(g)));
    let id = CMatrix::identity(n, n);
    let p = (&id - &sj) * C64::new(0.5, 0.0);
    let q = (&id + &sj) * C64::new(0.5, 0.0);
    // unknowns (a_b, c_b) with f = a_b + c_b x on bond b
    let mut f = CMatrix::zeros(n, n);
    let mut g = CMatrix::zeros(n, n);
    for b in 0..nb {
        f[(b, b)] = C64::new(1.0, 0.0);
        f[(b + nb, b)] = C64::new(1.0, 0.0);
        f[(b + nb, b + nb)] = C64::new(dl[b], 0.0);
        g[(b, b + nb)] = C64::new(1.0, 0.0);
        g[(b + nb, b + nb)] = C64::new(-1.0, 0.0);
    }
    let mut sys = CMatrix::zeros(2 * n, n);
    sys.view_mut((0, 0), (n, n)).copy_from(&(p * f));
    sys.view_mut((n, 0), (n, n)).copy_from(&(q * g));
    Ok(n - crate::linalg::rank(&sys, 1e-9))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CylinderTrace {
    pub t: f64,
    pub value: f64,
    /// Bound on the eigenvalues above `k_max` that were left out.
    pub truncation_bound: f64,
}

/// `T(t) = sum e^{-k t}` over the spectrum.
pub fn cylinder_trace(spectrum: &Spectrum, t: f64) -> Result<CylinderTrace> {
    check_truncation(spectrum, t)?;
    let mut acc = Neumaier::new();
    // Each eigenvalue is only known to within the root tolerance.
    let mut located = Neumaier::new();
    if spectrum.include_zero_mode {
        acc.add(spectrum.zero_modes as f64);
    }
    for e in spectrum.eigenvalues.iter().rev() {
        let w = e.multiplicity as f64 * (-e.k * t).exp();
        acc.add(w);
        located.add(w * t * spectrum.tolerance);
    }
    let kk = spectrum.k_max;
    let bound = (-kk * t).exp()
        * (spectrum.total_length / (PI * t) + 4.0 * spectrum.num_bonds as f64)
        + located.value();
    Ok(CylinderTrace {
        t,
        value: acc.value(),
        truncation_bound: bound,
    })
}

fn check_truncation(spectrum: &Spectrum, t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::OutOfRange {
            value: t,
            expected: "t > 0",
        });
    }
    if t * spectrum.k_max < TRUNCATION_RATIO {
        return Err(Error::Truncation {
            t,
            required_k_max: TRUNCATION_RATIO / t,
        });
    }
    Ok(())
}

/// `sum_j |l_j(0)|` for the Lagrange basis on `ts`: how much the
/// extrapolated value can amplify errors in the samples.
fn extrapolation_gain(ts: &[f64]) -> f64 {
    (0..ts.len())
        .map(|j| {
            ts.iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &ti)| (ti / (ti - ts[j])).abs())
                .product::<f64>()
        })
        .sum()
}

/// Default extrapolation grid `L_min/4 * 2^-j`, `j = 0..3`.
pub fn default_t_grid(l_min: f64) -> Vec<f64> {
    (0..4).map(|j| l_min / 4.0 / f64::powi(2.0, j)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralEnergy {
    pub value: f64,
    /// Extrapolation error estimate plus the spectral truncation bound.
    pub error_estimate: f64,
    pub truncation_bound: f64,
    pub t_grid: Vec<f64>,
    pub samples: Vec<f64>,
}

/// `g(t) = (1/2) sum k e^{-kt} - L_tot/(2 pi t^2)` on a grid of t values,
/// extrapolated to `t = 0` by Neville's scheme.
pub fn energy_from_spectrum(spectrum: &Spectrum, t_grid: &[f64]) -> Result<SpectralEnergy> {
    if t_grid.len() < 2 {
        return Err(Error::arg("extrapolation needs at least two t values"));
    }
    for &t in t_grid {
        check_truncation(spectrum, t)?;
    }
    let samples: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let mut acc = Neumaier::new();
            for e in spectrum.eigenvalues.iter().rev() {
                acc.add(0.5 * e.multiplicity as f64 * e.k * (-e.k * t).exp());
            }
            acc.add(-spectrum.total_length / (2.0 * PI * t * t));
            acc.value()
        })
        .collect();
    let (value, extrap_err) = neville_at_zero(t_grid, &samples);
    let located: f64 = t_grid
        .iter()
        .map(|&t| {
            spectrum
                .eigenvalues
                .iter()
                .map(|e| 0.5 * e.multiplicity as f64 * (1.0 - e.k * t).abs() * (-e.k * t).exp())
                .sum::<f64>()
                * spectrum.tolerance
        })
        .fold(0.0, f64::max)
        * extrapolation_gain(t_grid);
    let t_min = t_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let kk = spectrum.k_max;
    let truncation_bound = 0.5
        * (-kk * t_min).exp()
        * (spectrum.total_length / PI * (kk / t_min + 1.0 / (t_min * t_min))
            + 4.0 * spectrum.num_bonds as f64 * kk);
    let error_estimate = extrap_err + truncation_bound + located;
    Ok(SpectralEnergy {
        value,
        error_estimate,
        truncation_bound,
        t_grid: t_grid.to_vec(),
        samples,
    })
}

/// Value at 0 of the interpolating polynomial and the spread between the
/// two highest-order estimates that drop one end point each.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert_eq!(n, ys.len());
    // p[i] holds P_{i..i+m} evaluated at 0 after round m
    let mut p = ys.to_vec();
    let mut prev = p.clone();
    for m in 1..n {
        prev.clone_from(&p);
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (xj * prev[i] - xi * prev[i + 1]) / (xj - xi);
        }
    }
    let best = p[0];
    let err = if n >= 2 {
        (best - prev[0]).abs().max((best - prev[1]).abs())
    } else {
        f64::INFINITY
    };
    (best, err)
}

/// CSV with `#` header lines, then `k,multiplicity` rows.
pub fn write_spectrum_csv<W: Write + ?Sized>(
    w: &mut W,
    spectrum: &Spectrum,
    graph_hash: &str,
) -> std::io::Result<()> {
    writeln!(w, "# graph_hash={graph_hash}")?;
    writeln!(w, "# k_max={}", spectrum.k_max)?;
    writeln!(w, "# tolerance={:e}", spectrum.tolerance)?;
    writeln!(w, "# zero_modes={}", spectrum.zero_modes)?;
    writeln!(w, "k,multiplicity")?;
    for e in &spectrum.eigenvalues {
        writeln!(w, "{},{}", e.k, e.multiplicity)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_ring, make_star};
    use crate::scattering::bond_scattering_matrix;

    #[test]
    fn neville_reproduces_polynomials() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - x + 2.0 * x * x).collect();
        let (v, e) = neville_at_zero(&xs, &ys);
        assert!((v - 3.0).abs() < 1e-13);
        assert!(e < 1e-12);
    }

    #[test]
    fn interval_eigenvalues() {
        let g = make_star(1, &[1.0]).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let sp = find_spectrum(&s, &g.lengths(), 20.0).unwrap();
        assert_eq!(sp.zero_modes, 1);
        assert_eq!(sp.count(), 6);
        for (n, e) in sp.eigenvalues.iter().enumerate() {
            assert!((e.k - (n + 1) as f64 * PI).abs() < 1e-10);
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn circle_is_doubly_degenerate() {
        let g = make_ring(1, 1.0).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let sp = find_spectrum(&s, &g.lengths(), 13.0).unwrap();
        assert_eq!(sp.zero_modes, 1);
        assert_eq!(sp.eigenvalues.len(), 2);
        for (n, e) in sp.eigenvalues.iter().enumerate() {
            assert!((e.k - TAU * (n + 1) as f64).abs() < 1e-10);
            assert_eq!(e.multiplicity, 2);
        }
    }

    #[test]
    fn equal_length_values() {
        let sp = equal_length_spectrum(&[0.0, TAU], 1.0, 4).unwrap();
        assert_eq!(sp.flat(), vec![TAU, TAU, 2.0 * TAU, 2.0 * TAU]);
        let sp = equal_length_spectrum(&[0.0, TAU], 1.0, 3).unwrap();
        assert_eq!(sp.count(), 2);
    }

    #[test]
    fn truncation_precondition() {
        let sp = equal_length_spectrum(&[PI, PI], 1.0, 10).unwrap();
        let err = cylinder_trace(&sp, 0.01).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn dirichlet_interval_has_no_zero_mode() {
        // S = -J
        let m = crate::graph::JOperator::new(1).matrix() * C64::new(-1.0, 0.0);
        let s = BondScatteringMatrix::from_matrix(m).unwrap();
        assert_eq!(zero_mode_multiplicity(&s, &[1.0]).unwrap(), 0);
    }
}
