//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("discriminant {0} is not negative")]
    NonNegative(i64),
    #[error("discriminant {0} is not fundamental")]
    NonFundamental(i64),
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("prime {0} is not inert")]
    NotInert(u64),
    #[error("p = 2 is not supported here")]
    EvenPrime,
    #[error("inputs fall outside the supported cases: {0}")]
    UnsupportedCase(String),
    #[error("density kernels require an odd inert prime not dividing the discriminant (got {0})")]
    UnsupportedLocale(u64),
    #[error("node budget of {0} exceeded")]
    Overflow(u64),
    #[error("scaled counts did not stabilize within the budget")]
    NonStabilized,
    #[error("exponents must satisfy 0 <= a < b with a+b odd (got a={0}, b={1})")]
    BadExponents(u64, u64),
    #[error("size {0} is out of range for this operation")]
    BadSize(usize),
    #[error("interpolation mismatch at held-out point r={0}")]
    FitMismatch(usize),
    #[error("T is represented locally by S (Jordan exponents a+b even); no central derivative")]
    NotIncoherentLocal,
    #[error("T is not nondegenerate at p")]
    NotNondegenerate,
    #[error("no nearly self-dual lattice exists: inv_p(V_T) = +1")]
    Infeasible,
    #[error("lattices have different ranks")]
    RankMismatch,
    #[error("prime {0} is not admissible for neighbor steps")]
    BadPrime(u64),
    #[error("class cap {0} exceeded during genus enumeration")]
    CapExceeded(usize),
    #[error("operation requires a positive definite form")]
    IndefiniteForm,
    #[error("2 is not ramified in this field")]
    NotRamifiedAt2,
    #[error("T is degenerate at p={p}: predicted cycle dimension {predicted_dim}")]
    DegenerateT { p: u64, predicted_dim: i64 },
    #[error("the product of local invariants with the archimedean sign is -1")]
    ProductFormulaViolation,
    #[error("invalid input: {0}")]
    SchemaError(String),
    #[error("matrix is not conjugate-symmetric: {0}")]
    SymmetryError(String),
    #[error("unknown verification suite `{0}`")]
    SuiteUnknown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
