use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("duplicate factor label `{0}`")]
    LabelCollision(String),

    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("operator is not Hermitian (residue {residue:.3e} > {tol:.1e})")]
    NotHermitian { residue: f64, tol: f64 },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("malformed Pauli string `{0}`: {1}")]
    MalformedPauli(String, String),

    #[error("times must be strictly increasing, got {0:?}")]
    UnsortedTimes(Vec<f64>),

    #[error("correlation has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("missing correlation entry {0}")]
    MissingCorrelation(String),

    #[error("invalid measurement configuration: {0}")]
    InvalidConfig(String),

    #[error("background condition violated: r·m = {0:.3e}")]
    BackgroundCondition(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("zero-probability branch at slot {slot} (p+ = {p_plus:.3e}, p- = {p_minus:.3e})")]
    ZeroProbability {
        slot: usize,
        p_plus: f64,
        p_minus: f64,
    },

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("subset does not match variant: {0}")]
    SubsetMismatch(String),

    #[error(
        "design matrix is rank deficient ({rank} < {needed}); unidentifiable: {unidentifiable:?}"
    )]
    RankDeficient {
        rank: usize,
        needed: usize,
        unidentifiable: Vec<String>,
    },

    #[error("model is not pure dephasing: {0}")]
    NotPureDephasing(String),

    #[error("truncation order must be an even integer >= 2, got {0}")]
    OddTruncation(usize),

    #[error("quadrature grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("record format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
