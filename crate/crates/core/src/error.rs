use thiserror::Error;

/// Errors reported by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice coordinate overflow")]
    LatticeOverflow,

    #[error("axis {axis} out of range for dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("matrix is not skew-symmetric (entry ({i},{j}))")]
    NotSkew { i: usize, j: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("unsupported polynomial degree {0} (maximum 6)")]
    UnsupportedDegree(u32),

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("cannot parse polynomial: {0}")]
    PolynomialSyntax(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("evaluation at the pole s = {0}")]
    AtPole(f64),

    #[error("element is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("one-form has {found} components, expected {expected}")]
    ComponentCount { expected: usize, found: usize },

    #[error("basis of size {size} exceeds the limit {limit}")]
    WindowTooLarge { size: usize, limit: usize },

    #[error("window does not contain the candidate kernel modes")]
    WindowTooSmall,

    #[error("precision exhausted; trustworthy depth is {max_depth}")]
    PrecisionExhausted { max_depth: usize },

    #[error("profile violates the monotonicity requirement near x = {0}")]
    ProfileNotMonotone(f64),

    #[error("moment of order {k} diverges for this profile")]
    DivergentMoment { k: u32 },

    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditioned(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
