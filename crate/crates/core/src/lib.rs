//! Vacuum energy of quantum graphs.
//!
//! The crate builds the bond scattering matrix `S` of a metric graph from
//! its vertex conditions and evaluates the Casimir energy by several
//! independent routes: closed forms for equal bond lengths, a periodic
//! orbit sum, a log-determinant integral and spectral zeta-style
//! extrapolation from the Laplacian eigenvalues. The cylinder trace and its
//! image-sum reconstruction, and random-matrix models of the energy
//! fluctuations, are built on the same pieces.

pub mod casimir;
pub mod error;
pub mod graph;
pub mod images;
pub mod linalg;
pub mod quad;
pub mod rmt;
pub mod scattering;
pub mod special;
pub mod spectrum;
pub mod sum;

pub use error::{Error, Result};
pub use graph::{
    build_graph, commensurate_unit, load_graph, make_ring, make_star, make_star_with,
    subdivide_rational, Bond, BondEnd, GraphDescription, JOperator, Length, MetricGraph, Side,
    Vertex,
};
pub use linalg::{CMatrix, C64};
pub use scattering::{
    assemble_bond_s, bond_scattering_matrix, bounce_trace, check_k_independence, dft_sigma,
    kirchhoff_sigma, sigma_from_ab, vertex_sigmas, BondScatteringMatrix, VertexCondition,
    VertexScatteringMatrix,
};
pub use spectrum::{
    cylinder_trace, energy_from_spectrum, equal_length_spectrum, find_spectrum, Eigenvalue,
    Spectrum,
};
