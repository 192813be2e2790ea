use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
///
/// Variants fall into two families: malformed input / I/O, and violated
/// mathematical hypotheses (a non-contracting map, a graph that is not
/// strongly connected, a polynomial without a simple root, ...). The CLI
/// maps the second family to a distinct exit code, see
/// [`Error::is_hypothesis_violation`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("Hensel precondition violated: {0}")]
    HenselPrecondition(String),
    #[error("element has negative valuation {0} and is not a p-adic integer")]
    NegativeValuation(i64),
    #[error("quadratic field mismatch: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),
    #[error("no simple root modulo {p} at residue {residue}")]
    NoSimpleRoot { p: u32, residue: u32 },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid singular values: {0}")]
    InvalidSingularValues(String),
    #[error("edge {edge} is not contracting (largest singular value {alpha})")]
    NotContracting { edge: usize, alpha: f64 },
    #[error("edge {0} has a singular linear part")]
    Singular(usize),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("edge maps do not share one linear part")]
    NotUniform,
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("matrix is not square ({0}x{1})")]
    NonSquare(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a mathematical precondition rather than of the
    /// input format.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::HenselPrecondition(_)
                | Error::NoSimpleRoot { .. }
                | Error::NotContracting { .. }
                | Error::Singular(_)
                | Error::NotStronglyConnected
                | Error::NotUniform
                | Error::NoRoot(_)
                | Error::NegativeValuation(_)
        )
    }
}
