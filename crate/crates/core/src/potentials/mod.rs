//! External potentials, their admissibility checks and heat-kernel smoothing.

mod conditions;
mod grid;
pub mod io;
mod smoothing;
mod spec;

pub use conditions::{
    check_condition_v2, check_condition_v2_seeded, gaussian_weighted_l1_radial, rollnik_norm_estimate,
    rollnik_norm_estimate_seeded, Verdict, DEFAULT_SEED,
};
pub use grid::{GridKind, GridSpec};
pub use smoothing::{
    coulomb_erf, effective_potential, effective_potential_with, gauss_kernel_convolve, gauss_kernel_convolve_grid,
    radial_convolution_3d, sampled_heat_kernel, smooth_radial_3d, ConvolutionMethod, SmoothedPotential, SmoothedRepr,
};
pub use spec::{Admissibility, PotentialKind, PotentialSpec};
