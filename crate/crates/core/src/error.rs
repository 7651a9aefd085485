use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NotFinite { row: usize, col: usize },
    #[error("matrix is not positive definite (smallest eigenvalue {min:e}, largest {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },
    #[error("matrix asymmetry {deviation:e} exceeds the strict-symmetry threshold")]
    Asymmetric { deviation: f64 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("Cholesky breakdown at pivot {pivot} (numerical loss of definiteness)")]
    CholeskyBreakdown { pivot: usize },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension {0} must be even")]
    OddDimension(usize),
    #[error("condition number must be > 1, got {0}")]
    KappaNotAboveOne(f64),
    #[error("condition number must be >= 1, got {0}")]
    KappaBelowOne(f64),
    #[error("dimension {n} too small (need at least {min})")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("{dof} degrees of freedom cannot give a nonsingular {n}x{n} Wishart matrix")]
    DegreesOfFreedomTooSmall { dof: usize, n: usize },
    #[error("split {ell} must satisfy 1 <= ell <= n-1 (n = {n})")]
    BadSplit { ell: usize, n: usize },
    #[error("subset size k = {k} must satisfy 1 <= k <= n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("kappa_hat = {kappa_hat} is smaller than the condition number {kappa}")]
    KappaHatTooSmall { kappa_hat: f64, kappa: f64 },
    #[error("r must be non-negative, got {0}")]
    NegativeR(f64),
    #[error("r must be positive, got {0}")]
    NonpositiveR(f64),
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("C(n, k) = {count} subsets exceeds the enumeration cap {cap}")]
    TooManySubsets { count: u128, cap: u128 },
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error("k equals n: the log-minor is deterministic")]
    KEqualsN,
    #[error("bound applies to diagonal matrices only")]
    NotDiagonal,
    #[error("ell(M) = 0 (an extreme eigenvalue equals 1); rescale the matrix by c != 1, which shifts E[Y] by k log c")]
    EllZero,
    #[error("length mismatch: {0} sizes vs {1} ell values")]
    LengthMismatch(usize, usize),
    #[error("target accuracy must be positive, got {0}")]
    UnattainableTarget(f64),
    #[error("required sample size overflows a 64-bit count")]
    SampleSizeOverflow,
    #[error("{0}")]
    UnsupportedBound(String),
    #[error("sample count q is required for this bound")]
    MissingSampleCount,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures that signal numerical trouble rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::CholeskyBreakdown { .. }
                | Error::NoConvergence { .. }
                | Error::NotFinite { .. }
                | Error::SampleSizeOverflow
        )
    }
}
