use core::fmt;

use crate::operators::Algebra;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Only one- and two-level problems are supported.
    InvalidDimension(usize),
    /// Differential order outside `1..=3`.
    InvalidOrder(u32),
    /// Projector exponent must be at least one.
    InvalidExponent(u32),
    /// A cosine polynomial needs at least one finite coefficient.
    InvalidCoefficients,
    /// Stencil half-bandwidth does not fit in the grid axis.
    BandwidthTooLarge { axis: usize, bandwidth: usize, size: usize },
    LengthMismatch { expected: usize, found: usize },
    ShapeMismatch,
    DenseCapExceeded { size: usize, cap: usize },
    /// Grid axis size incompatible with the algebra's coarsening rule.
    Parity { algebra: Algebra, size: usize },
    /// The size ladder stops before reaching the coarsest cap.
    LadderBreaks { size: usize },
    /// Cholesky pivot failure: the matrix is not positive definite.
    NotPositiveDefinite,
    /// Relaxation parameter outside `(0, 2/M)`.
    OmegaOutOfRange { omega: f64, bound: f64 },
    /// Conjugate gradients met a non-positive curvature direction.
    Breakdown,
    /// An iteration did not reach its tolerance.
    NoConvergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(d) => write!(f, "unsupported dimension {d} (expected 1 or 2)"),
            Error::InvalidOrder(q) => write!(f, "unsupported differential order {q} (expected 1..=3)"),
            Error::InvalidExponent(w) => write!(f, "projector exponent must be >= 1, got {w}"),
            Error::InvalidCoefficients => f.write_str("cosine polynomial needs finite, nonempty coefficients"),
            Error::BandwidthTooLarge { axis, bandwidth, size } => {
                write!(f, "half-bandwidth {bandwidth} does not fit axis {axis} of size {size}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "vector length {found} does not match operator size {expected}")
            }
            Error::ShapeMismatch => f.write_str("operator and prolongation shapes do not conform"),
            Error::DenseCapExceeded { size, cap } => {
                write!(f, "dense materialization of size {size} exceeds cap {cap}")
            }
            Error::Parity { algebra, size } => {
                write!(f, "axis size {size} violates the {algebra:?} coarsening rule")
            }
            Error::LadderBreaks { size } => {
                write!(f, "size ladder breaks at axis size {size} before reaching the coarsest cap")
            }
            Error::NotPositiveDefinite => f.write_str("matrix is not positive definite"),
            Error::OmegaOutOfRange { omega, bound } => {
                write!(f, "relaxation parameter {omega} outside (0, {bound})")
            }
            Error::Breakdown => f.write_str("conjugate gradient breakdown (operator not SPD)"),
            Error::NoConvergence => f.write_str("iteration did not converge"),
        }
    }
}

impl core::error::Error for Error {}
