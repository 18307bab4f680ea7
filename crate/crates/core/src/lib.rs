//! Effective Hamiltonian of the dipole-approximated Pauli–Fierz model.
//!
//! The electron's coupling to the transverse field is traded for a Gaussian
//! smoothing of the external potential with width parameter `a`. This crate
//! computes `a` and the mass renormalization from the field's form factor,
//! builds smoothed potentials, solves discretized Schrödinger problems, and
//! checks the underlying fiber-Hamiltonian identities in truncated Fock space.

pub mod coupling;
pub mod error;
pub mod fft;
pub mod focksim;
pub mod linalg;
pub mod model;
pub mod potentials;
pub mod quad;
pub mod spectra;

pub use coupling::{
    bare_mass_from_moment, bare_mass_from_observed, effective_coupling, observed_mass_from_bare,
    observed_mass_from_moment, smoothing_from_moment, smoothing_parameter, CouplingResult, MassConvention,
};
pub use error::{Error, Result};
pub use model::{
    field_moment, field_moment_with, nondimensionalize, unit_sphere_area, Dispersion, FieldModel, FormFactor,
    PhysicalParams, RadialTable, ScaledParams,
};
pub use potentials::{GridKind, GridSpec, PotentialKind, PotentialSpec, SmoothedPotential, Verdict};
pub use spectra::{
    build_hamiltonian, ground_state, level_shift, level_shifts, low_spectrum, spectral_inequality_report,
    GridHamiltonian, HamiltonianOptions, InequalityReport, LevelShift, PotentialSource, SpectralResult,
};
