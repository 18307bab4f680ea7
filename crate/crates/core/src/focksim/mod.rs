//! Truncated Fock-space realization of the fiber Hamiltonians H₀(P).

mod dressed;
mod fock;
mod modes;

pub use dressed::{
    dressed_density, dressed_quadratic_form, DressedForm, MomentumWavefunction, OverlapKernel, PhaseSpaceGrid,
};
pub use fock::{
    coherent_amplitudes, coherent_ground, continuum_overlap, dense_matrix, discrete_bare_mass, eigen_residual,
    fiber_ground_energy_exact, fiber_hamiltonian, overlap, overlap_exponent, test_vector, truncated_ground_energy,
    truncated_ground_state, truncated_inner_product, truncation_for, truncation_sweep, CoherentState, FiberHamiltonian,
    FockBasis, MAX_DIAGONALIZED_CHANNELS,
};
pub use modes::{
    angular_nodes, discretize_field, moment_error, polarization_frame, preset_modes, AngularRule, Channel,
    DiscreteModes, Mode, ModeNode, ModePreset, RadialRule,
};
