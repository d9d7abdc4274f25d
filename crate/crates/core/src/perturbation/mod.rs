//! Eigenvalues as functions of the cut parameters, their finite-difference
//! Hessians, and the map between Robin and imaginary-flux parameters.

pub mod branches;
pub mod flux;
pub mod hessian;
pub mod map_r;
pub mod symmetry;

pub use branches::{
    gamma_tilde, lambda_m_gamma, lambda_n_alpha, lambda_n_ialpha_continued, ContinuationConfig,
    ImaginaryBranch,
};
pub use flux::flux_from_potential;
pub use hessian::{hessian_fd, hessian_fd_with, morse_index, HessianOptions, HessianReport};
pub use map_r::{map_r, map_r_inverse, MapR, MapRInverse};
pub use symmetry::{symmetry_points, symmetry_spectrum_check};
