use super::paths::{periodic_length_classes, sigma_from_classes, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::graph::{commensurate_unit, subdivide_rational, MetricGraph};
use crate::linalg::{unitary_eigenphases, CMatrix, C64};
use crate::quad::integrate;
use crate::scattering::{bond_scattering_matrix, BondScatteringMatrix};
use crate::special::trigamma;
use crate::spectrum::directed_lengths;
use crate::sum::Neumaier;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

/// Largest denominator tried when recognising rational bond lengths.
pub const MAX_DENOMINATOR: i64 = 10_000;

/// Second Bernoulli polynomial `x^2 - x + 1/6` on [0, 1].
pub fn bernoulli_b2(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            value: x,
            expected: "[0, 1]",
        });
    }
    Ok(x * x - x + 1.0 / 6.0)
}

/// Kirchhoff star with `b` equal bonds of length `l`: `(b - 3) pi / (48 l)`.
pub fn energy_star(b: usize, l: f64) -> Result<f64> {
    if b == 0 {
        return Err(Error::arg("a star needs at least one bond"));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidLength {
            bond: "*".into(),
            length: l,
        });
    }
    Ok((b as f64 - 3.0) * PI / (48.0 * l))
}

/// Equal bond lengths `l`: `-(pi / 2l) sum_j B2(theta_j / 2pi)` over the
/// eigenphases of `S`, each in [0, 2pi].
pub fn energy_equal_bernoulli(thetas: &[f64], l: f64) -> Result<f64> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidLength {
            bond: "*".into(),
            length: l,
        });
    }
    let mut acc = Neumaier::new();
    for &th in thetas {
        if !(0.0..=TAU).contains(&th) {
            return Err(Error::OutOfRange {
                value: th,
                expected: "[0, 2pi]",
            });
        }
        acc.add(bernoulli_b2(th / TAU)?);
    }
    Ok(-PI / (2.0 * l) * acc.value())
}

/// Equal-length energy straight from `S`.
pub fn energy_equal_length(s: &BondScatteringMatrix, l: f64) -> Result<f64> {
    s.require_j_symmetric()?;
    energy_equal_bernoulli(&unitary_eigenphases(s.matrix()), l)
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalEnergy {
    pub value: f64,
    pub unit: f64,
    pub subdivided_bonds: usize,
}

/// Commensurate lengths: subdivide to a common unit and use the
/// equal-length formula on the refined graph.
pub fn energy_rational(graph: &MetricGraph) -> Result<RationalEnergy> {
    let unit = commensurate_unit(graph, MAX_DENOMINATOR)?;
    let fine = subdivide_rational(graph, unit.unit)?;
    let s = bond_scattering_matrix(&fine)?;
    let value = energy_equal_length(&s, unit.unit)?;
    Ok(RationalEnergy {
        value,
        unit: unit.unit,
        subdivided_bonds: fine.num_bonds(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitTerm {
    pub n: usize,
    /// Real part of `sigma_n`.
    pub sigma_n: f64,
    /// `2B / (n^2 L_min)`, a bound on `|sigma_n|`.
    pub bound_n: f64,
    /// Energy from periods `1..=n`.
    pub cumulative_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyBreakdown {
    pub value: f64,
    pub terms: Vec<OrbitTerm>,
    /// Bound on the energy carried by the periods that were not summed.
    pub tail_bound: f64,
    pub n_requested: usize,
    pub n_completed: usize,
}

impl EnergyBreakdown {
    pub fn truncated(&self) -> bool {
        self.n_completed < self.n_requested
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitSumOptions {
    pub n_max: usize,
    /// Work budget for the length-class walk.
    pub budget: u64,
}

impl Default for OrbitSumOptions {
    fn default() -> Self {
        OrbitSumOptions {
            n_max: 30,
            budget: 5 * DEFAULT_BUDGET,
        }
    }
}

/// Energy carried by periods above `n`: `(B / (pi L_min)) psi'(n + 1)`.
pub fn orbit_tail_bound(num_bonds: usize, l_min: f64, n: usize) -> f64 {
    num_bonds as f64 / (PI * l_min) * trigamma(n as f64 + 1.0)
}

pub fn energy_orbit_sum(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    n_max: usize,
) -> Result<EnergyBreakdown> {
    energy_orbit_sum_with(
        s,
        lengths,
        &OrbitSumOptions {
            n_max,
            ..Default::default()
        },
    )
}

/// `E = -(1/2pi) sum_n Re sigma_n`, truncated at `n_max` or wherever the
/// work budget runs out, with a bound on the remainder.
pub fn energy_orbit_sum_with(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    opts: &OrbitSumOptions,
) -> Result<EnergyBreakdown> {
    s.require_j_symmetric()?;
    if opts.n_max == 0 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    directed_lengths(s, lengths)?;
    let l_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let b = s.num_bonds();
    let mut terms = Vec::with_capacity(opts.n_max);
    let mut acc = Neumaier::new();
    let completed = periodic_length_classes(s, lengths, opts.n_max, opts.budget, |n, cl| {
        let sigma = sigma_from_classes(n, cl).re;
        acc.add(-sigma / TAU);
        terms.push(OrbitTerm {
            n,
            sigma_n: sigma,
            bound_n: 2.0 * b as f64 / ((n * n) as f64 * l_min),
            cumulative_value: acc.value(),
        });
    })?;
    Ok(EnergyBreakdown {
        value: acc.value(),
        terms,
        tail_bound: orbit_tail_bound(b, l_min, completed),
        n_requested: opts.n_max,
        n_completed: completed,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LogDetOptions {
    /// Target absolute error of the integral.
    pub abs_tol: f64,
    /// Dyadic panels between the smallest panel and `1 / L_max`.
    pub grading_levels: u32,
    pub max_pieces: usize,
}

impl Default for LogDetOptions {
    fn default() -> Self {
        LogDetOptions {
            abs_tol: 1e-11,
            grading_levels: 45,
            max_pieces: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogDetEnergy {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `log det(I - S e^{-s L})`, which is real and positive for s > 0.
pub fn log_det_integrand(s: &CMatrix, dl: &[f64], x: f64) -> Result<f64> {
    let n = s.nrows();
    let mut m = CMatrix::identity(n, n);
    for j in 0..n {
        let damp = (-x * dl[j]).exp();
        for i in 0..n {
            m[(i, j)] -= s[(i, j)] * damp;
        }
    }
    let det: C64 = m.lu().determinant();
    if det.re.is_nan() || det.re <= 0.0 || det.im.abs() > 1e-9 * det.norm().max(1e-300) + 1e-14 {
        return Err(Error::Quadrature(format!(
            "det(I - M(s)) = {det} at s = {x} is not real positive"
        )));
    }
    Ok(det.re.ln())
}

pub fn energy_logdet(s: &BondScatteringMatrix, lengths: &[f64]) -> Result<LogDetEnergy> {
    energy_logdet_with(s, lengths, &LogDetOptions::default())
}

/// `E = (1/2pi) int_0^inf log det(I - S e^{-s L}) ds`.
///
/// The integrand decays like `e^{-s L_min}` and may carry a logarithmic
/// singularity at 0 (zero modes), so the range is split into an adaptive
/// outer panel, dyadically graded panels towards 0, and a last sliver
/// handled from the local form `a log s + c`.
pub fn energy_logdet_with(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    opts: &LogDetOptions,
) -> Result<LogDetEnergy> {
    s.require_j_symmetric()?;
    let dl = directed_lengths(s, lengths)?;
    let l_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let l_max = lengths.iter().cloned().fold(0.0, f64::max);
    let dim = s.dim() as f64;
    // beyond s_max, |log det| <= 2B e^{-s L_min} < 1e-16
    let s_max = (dim * 1e16).ln() / l_min;
    let s0 = (1.0 / l_max).min(s_max);
    let m = s.matrix();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |x: f64| match log_det_integrand(m, &dl, x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let levels = opts.grading_levels.max(1);
    let panel_tol = 0.5 * opts.abs_tol / levels as f64;
    let mut total = Neumaier::new();
    let mut err = 0.0;
    let mut evals = 0;
    let mut record = |r: Result<crate::quad::Integral>| -> Result<()> {
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let i = r?;
        total.add(i.value);
        err += i.error;
        evals += i.evaluations;
        Ok(())
    };
    record(integrate(f, s0, s_max, 0.5 * opts.abs_tol, opts.max_pieces))?;
    let mut hi = s0;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        record(integrate(f, lo, hi, panel_tol, opts.max_pieces))?;
        hi = lo;
    }
    let eps = hi;
    let (fe, fh) = (f(eps), f(0.5 * eps));
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let slope = (fe - fh) / std::f64::consts::LN_2;
    let sliver = eps * (fe - slope);
    total.add(sliver);
    err += sliver.abs() * 1e-3;
    Ok(LogDetEnergy {
        value: total.value() / TAU,
        error_estimate: err / TAU,
        evaluations: evals + 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_star;

    #[test]
    fn b2_range() {
        assert_eq!(bernoulli_b2(0.0).unwrap(), 1.0 / 6.0);
        assert!((bernoulli_b2(0.5).unwrap() + 1.0 / 12.0).abs() < 1e-16);
        assert!(bernoulli_b2(1.5).is_err());
    }

    #[test]
    fn star_constants() {
        assert_eq!(energy_star(3, 1.0).unwrap(), 0.0);
        assert!((energy_star(1, 1.0).unwrap() + PI / 24.0).abs() < 1e-16);
        assert!(energy_star(0, 1.0).is_err());
    }

    #[test]
    fn interval_by_every_route() {
        let g = make_star(1, &[1.0]).unwrap();
        let s = bond_scattering_matrix(&g).unwrap();
        let exact = -PI / 24.0;
        assert!((energy_equal_length(&s, 1.0).unwrap() - exact).abs() < 1e-15);
        assert!((energy_logdet(&s, &[1.0]).unwrap().value - exact).abs() < 1e-11);
        let o = energy_orbit_sum(&s, &[1.0], 40).unwrap();
        assert!((o.value - exact).abs() <= o.tail_bound);
        assert!((o.terms[1].sigma_n - 0.5).abs() < 1e-15);
        assert!(o.terms[0].sigma_n.abs() < 1e-15);
    }
}
