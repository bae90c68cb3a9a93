use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// `|t₃| + |λ₃| ≥ 1`: the contraction matrix has vanishing denominators.
    #[error("degenerate edge: |t3| + |lambda3| = {0} >= 1")]
    DegenerateEdge(f64),

    #[error("channel is not completely positive (min Choi eigenvalue {0:e})")]
    NotCp(f64),

    #[error("channel is not entanglement breaking")]
    NotEbt,

    #[error("matrix is not a contraction (largest singular value {0})")]
    NotContraction(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("no CQ realization: t1^2 + t2^2 + (|t3| + |lambda3|)^2 = {0} > 1")]
    NotRealizable(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("R_phi is unitary; no three-term split exists")]
    IsExtreme,

    #[error("no constructive decomposition covers this channel")]
    NotCovered,

    #[error("CQ fit failed: residual {residual:e} with {candidates} candidates")]
    FitFailed { residual: f64, candidates: usize },

    #[error("origin of the plane is not completely positive")]
    OriginNotCp,

    #[error("criteria disagree: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::FitFailed { .. } | Error::Inconsistent(_) | Error::NotCovered)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
