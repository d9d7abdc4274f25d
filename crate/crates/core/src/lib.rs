//! Schrödinger operators on compact metric graphs with δ-type vertex
//! conditions: spectra, eigenfunctions, nodal counts, and the parameter
//! families obtained by cutting the graph (magnetic fluxes, imaginary fluxes
//! and Robin conditions), together with harnesses relating Morse indices of
//! eigenvalue functions to nodal counts.

pub mod catalog;
pub mod cutting;
pub mod error;
pub mod graph;
pub mod io;
pub mod perturbation;
pub mod spectral;
pub mod verify;

pub use cutting::{CutFamily, CutPoint, CutSet};
pub use error::{Error, Result};
pub use graph::{betti, validate, EdgePoint, MetricGraph, VertexCondition};
pub use spectral::{Eigenpair, SpectralProblem, Spectrum};
