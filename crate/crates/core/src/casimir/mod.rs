//! Casimir energy and force.
//!
//! Independent routes to the same number: Bernoulli closed forms for equal
//! and commensurate lengths, the periodic-orbit series, and the
//! log-determinant integral. The force is a finite difference of the last.

mod energy;
mod force;
pub mod paths;

pub use energy::{
    bernoulli_b2, energy_equal_bernoulli, energy_equal_length, energy_logdet, energy_logdet_with,
    energy_orbit_sum, energy_orbit_sum_with, energy_rational, energy_star, log_det_integrand,
    orbit_tail_bound, EnergyBreakdown, LogDetEnergy, LogDetOptions, OrbitSumOptions, OrbitTerm,
    RationalEnergy, MAX_DENOMINATOR,
};
pub use force::{casimir_force, casimir_force_on_bond, ForceDirection, ForceResult};
pub use paths::{
    enumerate_periodic_paths, periodic_length_classes, sigma_from_classes, visit_periodic_paths,
    LengthClass, PathEnumeration, PeriodicPath,
};
