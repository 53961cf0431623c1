use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig})")]
    NotPsd { min_eig: f64 },
    #[error("constraint matrices are rank deficient (rank {rank} of {m})")]
    RankDeficient { rank: usize, m: usize },
    #[error("no feasible point on the affine slice intersects the PSD cone")]
    Infeasible,
    #[error("the slice touches the PSD cone only at its boundary")]
    NotStrictlyFeasible,
    #[error("solver exceeded {0} iterations")]
    MaxIterationsExceeded(usize),
    #[error("line search stalled (step {0:e})")]
    LineSearchStalled(f64),
    #[error("log-gamma pole: require a > (n-1)/2, got a = {a} at n = {n}")]
    GammaPole { n: usize, a: f64 },
    #[error("rank-one family requires xi = v'A^-1 v > 1, got xi = {0}")]
    XiOutOfRange(f64),
    #[error("M is a scalar multiple of the identity; central section undefined")]
    MCollinearWithIdentity,
    #[error("instance size n^k = {0} exceeds the dense storage budget of 4096")]
    SizeBudgetExceeded(usize),
    #[error("slice dimension {0} too large for rejection sampling (limit {1})")]
    SliceDimensionTooLarge(usize, usize),
    #[error("no samples accepted; instance may be infeasible or lower-dimensional")]
    ZeroAcceptances,
    #[error("could not certify a finite bound for the spectrahedron")]
    UnboundedSuspected,
    #[error("chord search failed along a numerically flat direction")]
    ChordSearchFailed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("epsilon out of range: {0}")]
    EpsilonOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
