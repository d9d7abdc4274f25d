//! Transfer matrices, the secular matrix, eigenvalue scans and everything
//! computed from a single eigenfunction.

pub mod count;
pub mod eigen;
pub mod nodal;
pub mod problem;
pub mod rho;
pub mod solver;
pub mod transfer;
pub mod wronskian;

pub use count::eigenvalue_count;
pub use eigen::{eigenfunction, eigenfunction_with, Eigenpair, Side};
pub use nodal::{count_zeros, nodal_domain_count, zeros};
pub use problem::{End, Joint, Layout, Segment, Site, SpectralProblem};
pub use rho::{solve_rho, Rho};
pub use solver::{
    eigenvalues_in, find_eigenvalues, find_eigenvalues_with, SolverConfig, Spectrum, SpectrumEntry,
};
pub use transfer::{propagate, segment_transfer};
pub use wronskian::{wronskian_leaf_transfer, wronskian_vertex_sum};
