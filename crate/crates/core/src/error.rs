use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("box of size {n} does not fit inside the carrier patch (extent {extent})")]
    BoxExceedsCarrier { n: usize, extent: f64 },

    #[error("insufficient patch margin: need {required} beyond the window, have {available}")]
    InsufficientMargin { required: f64, available: f64 },

    #[error("operation requires a lattice carrier: {0}")]
    NotALattice(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("spec contains randomness; equivariance only holds in law")]
    RandomSpec,

    #[error("window contains no active points")]
    EmptyWindow,

    #[error("eigensolver did not converge on a {size}x{size} block:\n{dump}")]
    EigenNonConvergence { size: usize, dump: String },

    #[error("level {0} is not rational; use float mode")]
    IrrationalLevel(String),

    #[error("exact mode requires real kernel entries")]
    NonRealEntries,

    #[error(
        "sandwich violated at lambda={lambda}: D={compact_dim}, atom_count={atom_count}, budget={budget}"
    )]
    SandwichViolation {
        lambda: f64,
        compact_dim: usize,
        atom_count: usize,
        budget: usize,
    },

    #[error("operator is not a percolation adjacency model: {0}")]
    NotPercolation(String),

    #[error("unknown analytic reference `{0}`")]
    UnknownReference(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
