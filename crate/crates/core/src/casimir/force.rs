use super::energy::{energy_logdet_with, LogDetOptions};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::scattering::{bond_scattering_matrix, BondScatteringMatrix};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceDirection {
    /// Lengthen one bond.
    Bond(usize),
    /// Lengthen every bond by the same amount.
    Uniform,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForceResult {
    /// `-dE/dL`
    pub force: f64,
    pub derivative: f64,
    /// `|D(h) - D(h/2)| / 15`, the expected error of `D(h/2)`.
    pub error_estimate: f64,
    pub step: f64,
}

fn stencil(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    dir: ForceDirection,
    h: f64,
    opts: &LogDetOptions,
) -> Result<f64> {
    let e = |delta: f64| -> Result<f64> {
        let shifted: Vec<f64> = lengths
            .iter()
            .enumerate()
            .map(|(b, &l)| match dir {
                ForceDirection::Uniform => l + delta,
                ForceDirection::Bond(k) if k == b => l + delta,
                ForceDirection::Bond(_) => l,
            })
            .collect();
        Ok(energy_logdet_with(s, &shifted, opts)?.value)
    };
    let (m2, m1, p1, p2) = (e(-2.0 * h)?, e(-h)?, e(h)?, e(2.0 * h)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h))
}

/// `-dE/dL` by the five-point central difference of the log-determinant
/// energy at steps `h` and `h/2`. The stencil reaches `2h`, so every
/// moved bond must be longer than `2h`.
pub fn casimir_force(
    s: &BondScatteringMatrix,
    lengths: &[f64],
    dir: ForceDirection,
    h: f64,
) -> Result<ForceResult> {
    s.require_j_symmetric()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::arg(format!("step must be positive, got {h}")));
    }
    let moved: Vec<f64> = match dir {
        ForceDirection::Bond(b) => vec![*lengths
            .get(b)
            .ok_or_else(|| Error::arg(format!("no bond {b}")))?],
        ForceDirection::Uniform => lengths.to_vec(),
    };
    if moved.iter().any(|&l| l - 2.0 * h <= 0.0) {
        return Err(Error::arg(format!(
            "step {h} too large: the stencil would shrink a bond to zero"
        )));
    }
    let opts = LogDetOptions {
        abs_tol: 1e-13,
        ..Default::default()
    };
    let d_h = stencil(s, lengths, dir, h, &opts)?;
    let d_half = stencil(s, lengths, dir, 0.5 * h, &opts)?;
    let estimate = (d_h - d_half).abs() / 15.0;
    let force = -d_half;
    if estimate > (0.1 * force.abs()).max(1e-8) {
        return Err(Error::StepTooLarge {
            estimate,
            value: force,
        });
    }
    Ok(ForceResult {
        force,
        derivative: d_half,
        error_estimate: estimate,
        step: h,
    })
}

/// Force on a bond named by id.
pub fn casimir_force_on_bond(graph: &MetricGraph, bond: &str, h: f64) -> Result<ForceResult> {
    let b = graph
        .bond_index(bond)
        .ok_or_else(|| Error::arg(format!("no bond `{bond}`")))?;
    let s = bond_scattering_matrix(graph)?;
    casimir_force(&s, &graph.lengths(), ForceDirection::Bond(b), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_star;
    use std::f64::consts::PI;

    #[test]
    fn interval_force() {
        let g = make_star(1, &[1.0]).unwrap();
        let f = casimir_force_on_bond(&g, "b1", 0.02).unwrap();
        assert!((f.force + PI / 24.0).abs() < 1e-7, "{f:?}");
    }

    #[test]
    fn step_must_fit() {
        let g = make_star(1, &[1.0]).unwrap();
        assert!(casimir_force_on_bond(&g, "b1", 0.5).is_err());
    }
}
