use thiserror::Error;

/// Failure of a core operation. `op` names the originating `module::operation`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: matrix is not symmetric (asymmetry {asym:.3e})")]
    NotSymmetric { op: &'static str, asym: f64 },
    #[error("{op}: matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { op: &'static str, min_eig: f64 },
    #[error("{op}: numerical breakdown: {detail}")]
    NumericalBreakdown { op: &'static str, detail: &'static str, value: f64 },
    #[error("{op}: state too close to pure (symplectic eigenvalue gap {gap:.3e})")]
    TooPure { op: &'static str, gap: f64 },
    #[error("{op}: dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch { op: &'static str, expected: usize, got: usize },
    #[error("{op}: argument out of range: {detail}")]
    InvalidRange { op: &'static str, detail: &'static str },
    #[error("{op}: covariance factorization failed (pivot {pivot:.3e})")]
    FactorizationFailed { op: &'static str, pivot: f64 },
    #[error("{op}: empty sample batch")]
    EmptyBatch { op: &'static str },
    #[error("{op}: feasibility iteration did not converge (violation {violation:.3e} after {iterations} sweeps)")]
    Infeasible { op: &'static str, violation: f64, iterations: usize },
    #[error("{op}: singular block in partition")]
    SingularBlock { op: &'static str },
    #[error("{op}: hypothesis violated: {detail} ({value:.3e} vs limit {limit:.3e})")]
    HypothesisViolated { op: &'static str, detail: &'static str, value: f64, limit: f64 },
    #[error("{op}: eigenvalue {value:.3e} too close to the logarithm branch cut")]
    LogBranchFailure { op: &'static str, value: f64 },
    #[error("{op}: no candidate neighborhood accepted for vertex {vertex}")]
    NoNeighborhoodAccepted { op: &'static str, vertex: usize },
    #[error("{op}: search budget exceeded ({candidates} candidate sets > {budget})")]
    SearchBudgetExceeded { op: &'static str, candidates: f64, budget: f64 },
    #[error("{op}: instance generation failed after {attempts} attempts")]
    GenerationFailed { op: &'static str, attempts: usize },
}

impl Error {
    /// `module::operation` that raised the error.
    pub fn origin(&self) -> &'static str {
        match self {
            Error::NotSymmetric { op, .. }
            | Error::NotPositiveDefinite { op, .. }
            | Error::NumericalBreakdown { op, .. }
            | Error::TooPure { op, .. }
            | Error::DimensionMismatch { op, .. }
            | Error::InvalidRange { op, .. }
            | Error::FactorizationFailed { op, .. }
            | Error::EmptyBatch { op }
            | Error::Infeasible { op, .. }
            | Error::SingularBlock { op }
            | Error::HypothesisViolated { op, .. }
            | Error::LogBranchFailure { op, .. }
            | Error::NoNeighborhoodAccepted { op, .. }
            | Error::SearchBudgetExceeded { op, .. }
            | Error::GenerationFailed { op, .. } => op,
        }
    }

    /// Short stable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NumericalBreakdown { .. } => "NumericalBreakdown",
            Error::TooPure { .. } => "TooPure",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidRange { .. } => "InvalidRange",
            Error::FactorizationFailed { .. } => "FactorizationFailed",
            Error::EmptyBatch { .. } => "EmptyBatch",
            Error::Infeasible { .. } => "Infeasible",
            Error::SingularBlock { .. } => "SingularBlock",
            Error::HypothesisViolated { .. } => "HypothesisViolated",
            Error::LogBranchFailure { .. } => "LogBranchFailure",
            Error::NoNeighborhoodAccepted { .. } => "NoNeighborhoodAccepted",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::GenerationFailed { .. } => "GenerationFailed",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
