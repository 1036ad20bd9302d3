//! Deterministic side of the boundary-trace laboratory: model domains with
//! closed-form boundary kernels, the spectral absorbed semigroup on the unit
//! interval, alpha-order hitting kernels, energy functionals with their
//! increasing limits, and Dirichlet/Douglas energy comparisons with singular
//! quadrature.
//!
//! Everything in this crate is a pure function of its inputs and accumulates
//! quadrature sums in a fixed order, so results are bit-reproducible at fixed
//! settings and safe for unrestricted concurrent use.

// `!(x > 0)`-style guards are deliberate: they reject NaN inputs too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod spectral;

pub use boundary::BoundaryFunction;
pub use energy::{
    dirichlet_energy, douglas_integral, energy_vs_douglas, harmonic_extension,
    identity_energy_residual, identity_energy_residual_at, DouglasReport, EnergyReport,
};
pub use error::{CoreError, Result};
pub use geometry::{
    boundary_measure_integrate, douglas_kernel_circle, escape_probability, feller_kernel_sphere,
    poisson_kernel_ball, poisson_kernel_mass, sphere_area, Geometry,
};
pub use spectral::{
    alpha_feller, alpha_poisson_interval, energy_functional_t, feller_measure_limit,
    interval_endpoint_pairing, supplementary_feller, AbsorbedSemigroup, ExcessiveFunction,
    FellerLimit,
};
