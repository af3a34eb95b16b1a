//! Small dense complex linear-algebra helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max |(U^dagger U - I)_{ij}|
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigenphases of a unitary matrix, each in [0, 2pi), sorted ascending.
///
/// A rotated Cayley transform maps `U` to a Hermitian matrix whose real
/// eigenvalues `h` give the phases through `2 atan(h)`. The rotation is
/// chosen so that `-1` stays well away from the spectrum of the rotated
/// unitary, which keeps `I + U'` safely invertible.
pub fn unitary_eigenphases(u: &CMatrix) -> Vec<f64> {
    let n = u.nrows();
    assert_eq!(n, u.ncols(), "eigenphases need a square matrix");
    if n == 0 {
        return Vec::new();
    }
    let id = CMatrix::identity(n, n);
    // The squared Frobenius norm of (I + U')^{-1} bounds the largest
    // 1/|1 + e^{i theta}|^2 from above; with n phases some rotation
    // keeps every phase at least pi/n away from -1.
    let good_enough = 4.0 * n as f64;
    let candidates = 4 * n + 1;
    let mut best: Option<(f64, f64, CMatrix, CMatrix)> = None;
    for j in 0..candidates {
        let gamma = 0.287_654_321 + TAU * j as f64 / candidates as f64;
        let rotated = u * C64::from_polar(1.0, gamma);
        let Some(inv) = (&id + &rotated).try_inverse() else {
            continue;
        };
        let size = inv.norm();
        if best.as_ref().is_none_or(|b| size < b.0) {
            best = Some((size, gamma, rotated, inv));
        }
        if size <= good_enough {
            break;
        }
    }
    let (_, gamma, rotated, inv) = best.expect("some rotation of a unitary avoids -1");
    let h = (&id - &rotated) * inv * I;
    let h = (&h + h.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let mut phases: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&x| wrap_phase(2.0 * x.atan() - gamma))
        .collect();
    phases.sort_by(f64::total_cmp);
    phases
}

/// Reduce an angle into [0, 2pi).
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Numerical rank from the singular values.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
