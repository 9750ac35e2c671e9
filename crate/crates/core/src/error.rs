use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("difference index {index} out of range for a vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("non-finite right-hand side in compartment {compartment}")]
    NonFinite { compartment: usize },
    #[error("quasi-positivity violated: {which}({u}, {v}) = {value}")]
    QuasiPositivity {
        which: &'static str,
        u: f64,
        v: f64,
        value: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlfError {
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("pipeline order: `{field}` requires `{missing}` to be computed first")]
    PipelineOrder {
        field: &'static str,
        missing: &'static str,
    },
    #[error("non-finite ledger value `{field}`{}", step.map(|s| format!(" at chain step {s}")).unwrap_or_default())]
    NonFinite {
        field: &'static str,
        step: Option<usize>,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Llf(#[from] LlfError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("symmetric reduction not applicable: {0}")]
    ReductionNotApplicable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Crate-level error used by the CLI and the FFI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Llf(#[from] LlfError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
