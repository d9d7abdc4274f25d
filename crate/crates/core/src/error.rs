use thiserror::Error;

use crate::graph::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0:?}")]
    InvalidGraph(Vec<Diagnostic>),

    #[error("invalid cut set: {0}")]
    InvalidCutSet(String),

    #[error("duplicate point on edge {edge} at t = {t}")]
    DuplicatePoint { edge: usize, t: f64 },

    #[error("point on edge {edge} at t = {t} is not strictly interior")]
    PointNotInterior { edge: usize, t: f64 },

    #[error("cut offset {epsilon} around the zero on edge {edge} at t = {t} leaves the edge or hits another marked point")]
    EpsilonTooLarge { edge: usize, t: f64, epsilon: f64 },

    #[error("cut count mismatch: {0}")]
    CutCountMismatch(String),

    #[error("two eigenvalues fell into one scan cell near lambda = {lambda}")]
    ScanStepTooCoarse { lambda: f64 },

    #[error("scan exceeded {steps} steps before finding {wanted} eigenvalues")]
    ScanBudgetExceeded { steps: usize, wanted: usize },

    #[error("the imaginary-flux family is not self-adjoint; use branch continuation")]
    NotSelfAdjointFamily,

    #[error("eigenvalue {lambda} has multiplicity {multiplicity}")]
    DegenerateEigenvalue { lambda: f64, multiplicity: usize },

    #[error("lambda = {lambda} is not an eigenvalue (relative sigma_min = {sigma})")]
    NotAnEigenvalue { lambda: f64, sigma: f64 },

    #[error("eigenfunction is genuinely complex; only real families are supported here")]
    ComplexEigenfunction,

    #[error("eigenfunction vanishes at {site} (|f| = {value:e})")]
    VertexZero { site: String, value: f64 },

    #[error("eigenfunction vanishes at cut {cut}")]
    ZeroAtCut { cut: usize },

    #[error("condition mismatch: {0}")]
    ConditionMismatch(String),

    #[error("lambda = {lambda} lies in the Dirichlet spectrum of cut {cut}")]
    DirichletResonance { lambda: f64, cut: usize },

    #[error("no tree path between the sides of cut {cut}")]
    PathNotFound { cut: usize },

    #[error("lost the real eigenvalue branch at parameter fraction {fraction}")]
    BranchLost { fraction: f64 },

    #[error("eigenvalue {n} of the unperturbed operator is not simple")]
    DegenerateAtZero { n: usize },

    #[error("eigenfunction changes sign across cut {cut}")]
    SignFlipAtCut { cut: usize },

    #[error("evaluation failed at stencil point {point:?}: {message}")]
    EvaluationFailed { point: Vec<f64>, message: String },

    #[error("partition point on edge {edge} at t = {t} is not proper")]
    ImproperPartition { edge: usize, t: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}
