//! Vertex scattering matrices and the bond scattering matrix.

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linalg::{c, hermiticity_defect, max_abs, rank, unitarity_defect, CMatrix, C64, I};
use std::f64::consts::TAU;

/// Tolerance on unitarity of the analytic vertex matrices and of S.
pub const UNITARY_TOL: f64 = 1e-12;
/// Looser bound for sigma built from a user matrix pair, where the
/// conditioning of A + ikB enters.
pub const PAIR_UNITARY_TOL: f64 = 1e-10;
const K_PROBES: [f64; 2] = [1.0, std::f64::consts::SQRT_2];

#[derive(Debug, Clone, PartialEq)]
pub enum VertexCondition {
    Kirchhoff,
    Dft,
    /// Self-adjoint condition `A psi + B psi' = 0` on the vertex values and
    /// outgoing derivatives.
    MatrixPair {
        a: CMatrix,
        b: CMatrix,
    },
}

impl VertexCondition {
    /// Fixed dimension, if the condition carries one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            VertexCondition::MatrixPair { a, .. } => Some(a.nrows()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VertexCondition::Kirchhoff => "kirchhoff",
            VertexCondition::Dft => "dft",
            VertexCondition::MatrixPair { .. } => "custom",
        }
    }

    pub(crate) fn canonical(&self) -> String {
        match self {
            VertexCondition::MatrixPair { a, b } => {
                let bits: Vec<String> = a
                    .iter()
                    .chain(b.iter())
                    .map(|z| format!("{:016x}:{:016x}", z.re.to_bits(), z.im.to_bits()))
                    .collect();
                format!("custom {}x{} {}", a.nrows(), a.ncols(), bits.join(" "))
            }
            other => other.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexScatteringMatrix {
    pub sigma: CMatrix,
    pub k_dependent: bool,
}

impl VertexScatteringMatrix {
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// `2/d - delta`
pub fn kirchhoff_sigma(d: usize) -> Result<VertexScatteringMatrix> {
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    let off = 2.0 / d as f64;
    let sigma = CMatrix::from_fn(d, d, |i, j| c(if i == j { off - 1.0 } else { off }));
    Ok(VertexScatteringMatrix {
        sigma,
        k_dependent: false,
    })
}

/// `exp(2 pi i jk / d) / sqrt(d)`, indices from zero. Equi-transmitting, and
/// not Hermitian once `d >= 3`.
pub fn dft_sigma(d: usize) -> Result<VertexScatteringMatrix> {
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    let norm = 1.0 / (d as f64).sqrt();
    let sigma = CMatrix::from_fn(d, d, |i, j| {
        let phase = TAU * ((i * j) % d) as f64 / d as f64;
        C64::from_polar(norm, phase)
    });
    Ok(VertexScatteringMatrix {
        sigma,
        k_dependent: false,
    })
}

/// The Kirchhoff condition written as a matrix pair: continuity rows in A,
/// current conservation in the last row of B.
pub fn kirchhoff_matrix_pair(d: usize) -> (CMatrix, CMatrix) {
    let mut a = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        a[(i, i)] = c(1.0);
        a[(i, i + 1)] = c(-1.0);
    }
    for j in 0..d {
        b[(d - 1, j)] = c(1.0);
    }
    (a, b)
}

fn check_pair(a: &CMatrix, b: &CMatrix) -> Result<()> {
    let d = a.nrows();
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    if a.shape() != (d, d) || b.shape() != (d, d) {
        return Err(Error::InvalidMatrixPair(format!(
            "A is {:?} and B is {:?}; both must be square and equal",
            a.shape(),
            b.shape()
        )));
    }
    let mut ab = CMatrix::zeros(d, 2 * d);
    ab.view_mut((0, 0), (d, d)).copy_from(a);
    ab.view_mut((0, d), (d, d)).copy_from(b);
    if rank(&ab, 1e-10) != d {
        return Err(Error::InvalidMatrixPair("rank of (A|B) is below d".into()));
    }
    let abh = a * b.adjoint();
    let scale = max_abs(a).max(max_abs(b)).powi(2).max(1e-300);
    if hermiticity_defect(&abh) > 1e-10 * scale {
        return Err(Error::InvalidMatrixPair(
            "A B^dagger is not self-adjoint".into(),
        ));
    }
    Ok(())
}

fn pair_sigma_at(a: &CMatrix, b: &CMatrix, k: f64) -> Result<CMatrix> {
    let ikb = b * (I * k);
    let plus = a + &ikb;
    let minus = a - &ikb;
    let inv = plus.try_inverse().ok_or(Error::SingularMatrixPair(k))?;
    let sigma = -(inv * minus);
    if !sigma.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::SingularMatrixPair(k));
    }
    Ok(sigma)
}

/// `sigma(k) = -(A + ikB)^{-1} (A - ikB)`, flagged k-dependent when it
/// differs between two probe wavenumbers.
pub fn sigma_from_ab(a: &CMatrix, b: &CMatrix, k: f64) -> Result<VertexScatteringMatrix> {
    check_pair(a, b)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::arg(format!("wavenumber must be positive, got {k}")));
    }
    let sigma = pair_sigma_at(a, b, k)?;
    let defect = unitarity_defect(&sigma);
    if defect > PAIR_UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let p0 = pair_sigma_at(a, b, K_PROBES[0])?;
    let p1 = pair_sigma_at(a, b, K_PROBES[1])?;
    let k_dependent = max_abs(&(p0 - p1)) > 1e-10;
    Ok(VertexScatteringMatrix { sigma, k_dependent })
}

/// Vertex matrix for a condition at a vertex of degree `d`. Matrix pairs
/// are evaluated at `k = 1`.
pub fn vertex_sigma(cond: &VertexCondition, d: usize) -> Result<VertexScatteringMatrix> {
    match cond {
        VertexCondition::Kirchhoff => kirchhoff_sigma(d),
        VertexCondition::Dft => dft_sigma(d),
        VertexCondition::MatrixPair { a, b } => {
            if a.nrows() != d {
                return Err(Error::DimensionMismatch {
                    vertex: String::new(),
                    expected: d,
                    found: a.nrows(),
                });
            }
            sigma_from_ab(a, b, 1.0)
        }
    }
}

pub fn vertex_sigmas(graph: &MetricGraph) -> Result<Vec<VertexScatteringMatrix>> {
    graph
        .vertices()
        .iter()
        .map(|v| {
            vertex_sigma(&v.condition, v.degree()).map_err(|e| match e {
                Error::DimensionMismatch {
                    expected, found, ..
                } => Error::DimensionMismatch {
                    vertex: v.id.clone(),
                    expected,
                    found,
                },
                e => e,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BondScatteringMatrix {
    matrix: CMatrix,
    num_bonds: usize,
    j_symmetric: bool,
    k_dependent: bool,
}

impl BondScatteringMatrix {
    /// Wrap an arbitrary unitary of even dimension `2B`.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || !n.is_multiple_of(2) || matrix.ncols() != n {
            return Err(Error::arg(format!(
                "bond scattering matrix must be square of even size, got {:?}",
                matrix.shape()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > 10.0 * UNITARY_TOL * n as f64 {
            return Err(Error::NotUnitary(defect));
        }
        let j_symmetric = is_j_symmetric(&matrix);
        Ok(BondScatteringMatrix {
            matrix,
            num_bonds: n / 2,
            j_symmetric,
            k_dependent: !j_symmetric,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_bonds(&self) -> usize {
        self.num_bonds
    }

    pub fn dim(&self) -> usize {
        2 * self.num_bonds
    }

    pub fn j_symmetric(&self) -> bool {
        self.j_symmetric
    }

    /// True when some vertex matrix changes with k.
    pub fn k_dependent(&self) -> bool {
        self.k_dependent
    }

    pub fn require_j_symmetric(&self) -> Result<()> {
        if self.j_symmetric {
            Ok(())
        } else {
            Err(Error::NotJSymmetric)
        }
    }

    pub fn entry(&self, to: usize, from: usize) -> C64 {
        self.matrix[(to, from)]
    }

    pub fn reverse(&self, alpha: usize) -> usize {
        if alpha < self.num_bonds {
            alpha + self.num_bonds
        } else {
            alpha - self.num_bonds
        }
    }
}

/// `max |(J S J)_{ab} - conj(S_{ba})| <= 1e-12`
pub fn is_j_symmetric(s: &CMatrix) -> bool {
    let n = s.nrows();
    let nb = n / 2;
    let rev = |a: usize| if a < nb { a + nb } else { a - nb };
    for a in 0..n {
        for b in 0..n {
            if (s[(rev(a), rev(b))] - s[(b, a)].conj()).norm() > UNITARY_TOL {
                return false;
            }
        }
    }
    true
}

/// `S[alpha, beta]` is the vertex amplitude for arriving along `beta` and
/// leaving along `alpha` through their shared vertex.
pub fn assemble_bond_s(
    graph: &MetricGraph,
    sigmas: &[VertexScatteringMatrix],
) -> Result<BondScatteringMatrix> {
    if sigmas.len() != graph.vertices().len() {
        return Err(Error::arg(format!(
            "{} vertex matrices for {} vertices",
            sigmas.len(),
            graph.vertices().len()
        )));
    }
    let n = graph.num_directed();
    let mut s = CMatrix::zeros(n, n);
    for (v, (vertex, sig)) in graph.vertices().iter().zip(sigmas).enumerate() {
        if sig.dim() != vertex.degree() {
            return Err(Error::DimensionMismatch {
                vertex: vertex.id.clone(),
                expected: vertex.degree(),
                found: sig.dim(),
            });
        }
        for (i, &arr) in vertex.ends.iter().enumerate() {
            let beta = graph.incoming(arr);
            for (j, &dep) in vertex.ends.iter().enumerate() {
                let alpha = graph.outgoing(dep);
                debug_assert_eq!(graph.departure(alpha), (v, j));
                s[(alpha, beta)] = sig.sigma[(j, i)];
            }
        }
    }
    let inherited = sigmas
        .iter()
        .map(|s| unitarity_defect(&s.sigma))
        .fold(0.0, f64::max);
    let defect = unitarity_defect(&s);
    if defect > UNITARY_TOL.max(2.0 * inherited) {
        return Err(Error::NotUnitary(defect));
    }
    let j_symmetric = is_j_symmetric(&s);
    Ok(BondScatteringMatrix {
        matrix: s,
        num_bonds: graph.num_bonds(),
        j_symmetric,
        k_dependent: sigmas.iter().any(|s| s.k_dependent),
    })
}

/// Convenience: vertex matrices and assembly in one call.
pub fn bond_scattering_matrix(graph: &MetricGraph) -> Result<BondScatteringMatrix> {
    assemble_bond_s(graph, &vertex_sigmas(graph)?)
}

/// k-independence holds exactly when `J S J = S^dagger`.
pub fn check_k_independence(s: &BondScatteringMatrix) -> bool {
    s.j_symmetric
}

/// `tr(S J)`. For J-symmetric S this is real; the real part is returned.
pub fn bounce_trace(s: &BondScatteringMatrix) -> f64 {
    let t = bounce_trace_complex(s);
    debug_assert!(!s.j_symmetric || t.im.abs() <= 1e-12 * s.dim() as f64);
    t.re
}

pub fn bounce_trace_complex(s: &BondScatteringMatrix) -> C64 {
    (0..s.dim()).map(|a| s.entry(a, s.reverse(a))).sum()
}
