use core::fmt;

/// Errors raised by the core model.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Geometry side length below 2.
    InvalidSide(usize),
    /// Node count that is not a perfect square of a side length ≥ 2.
    NotSquare(usize),
    /// The BFS oracle is restricted to small instances.
    OracleTooLarge { side: usize, max: usize },
    /// Library size of zero.
    EmptyLibrary,
    /// Zipf exponent that is negative or not finite.
    InvalidExponent(f64),
    /// Cache size of zero, or a zero node count.
    InvalidCacheSize(usize),
    /// File id outside `1..=K`.
    FileOutOfRange { file: u32, library: usize },
    /// Slot vector whose length is not `n * M`.
    SlotCount { expected: usize, got: usize },
    /// `overlap` called with identical nodes.
    SameNode(u32),
    /// No node caches the file.
    NoReplicas(u32),
    /// Goodness parameter outside `(0, 1/2)`.
    InvalidAlpha(f64),
    /// Bounded radius of zero.
    InvalidRadius,
    /// Inputs of a run disagree on the number of nodes.
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSide(s) => write!(f, "side length must be at least 2, got {s}"),
            Error::NotSquare(n) => write!(f, "node count {n} is not the square of a side length >= 2"),
            Error::OracleTooLarge { side, max } => {
                write!(f, "BFS oracle supports side <= {max}, got {side}")
            }
            Error::EmptyLibrary => f.write_str("library size K must be at least 1"),
            Error::InvalidExponent(g) => write!(f, "Zipf exponent must be finite and >= 0, got {g}"),
            Error::InvalidCacheSize(m) => write!(f, "cache size and node count must be >= 1, got {m}"),
            Error::FileOutOfRange { file, library } => {
                write!(f, "file id {file} outside 1..={library}")
            }
            Error::SlotCount { expected, got } => {
                write!(f, "expected {expected} cache slots, got {got}")
            }
            Error::SameNode(u) => write!(f, "overlap is undefined for a node with itself ({u})"),
            Error::NoReplicas(j) => write!(f, "file {j} is not cached anywhere"),
            Error::InvalidAlpha(a) => write!(f, "alpha must lie in (0, 1/2), got {a}"),
            Error::InvalidRadius => f.write_str("bounded radius must be at least 1"),
            Error::DimensionMismatch { what, expected, got } => {
                write!(f, "{what} has {got} nodes, expected {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
