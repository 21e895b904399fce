//! Error type shared by the arena, the program interpreter, and the
//! algorithm builders.

use std::fmt;

use crate::arena::CellId;
use crate::rational::Rational;

/// Every failure the engine can report.
///
/// Runtime errors raised while interpreting a program are wrapped in
/// [`RevError::Program`] carrying the path of the failing node and the
/// nearest enclosing label.
#[derive(Debug, Clone, PartialEq)]
pub enum RevError {
    /// A primitive referenced a cell that is not currently allocated.
    InvalidCell(CellId),
    /// A primitive's destination aliases one of its source operands.
    AliasViolation { dst: CellId, src: CellId },
    /// AddDiv/SubDiv with a zero divisor cell.
    DivideByZero { divisor: CellId },
    /// Scale/Unscale with a zero multiplier cell: multiplying by zero is
    /// not a bijection, so the step is rejected.
    NonInvertible { multiplier: CellId },
    /// An attempt to free a cell that still holds a nonzero value.
    GarbageLeak { cell: CellId, value: Rational },
    /// A cell value outgrew the configured bit-width budget.
    BitLimitExceeded { limit: u64, observed: u64 },
    /// Matrix/vector dimensions do not agree.
    ShapeMismatch(String),
    /// An output buffer shares cells with an input buffer.
    Overlap(String),
    /// A compute-copy-uncompute copy leg writes into cells touched by the
    /// compute leg.
    CopyOverlap(String),
    /// A copy leg contains a primitive outside the accumulating
    /// (Add*/Sub*) family.
    CopyNotAdditive(String),
    /// The no-pivot elimination met a zero pivot.
    SingularPivot { row: usize },
    /// The (pivoted) oracle determined the matrix is singular.
    Singular,
    /// The no-pivot oracle met a zero pivot (either singular input or a
    /// case that needs the row pivoting this engine does not perform).
    ZeroPivot { row: usize },
    /// Malformed rational, matrix, or CSV text.
    Parse(String),
    /// A runtime error annotated with the failing node's position.
    Program {
        path: String,
        label: Option<String>,
        source: Box<RevError>,
    },
}

impl RevError {
    /// Strips any `Program` annotation layers.
    pub fn root_cause(&self) -> &RevError {
        match self {
            RevError::Program { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// Label attached to the innermost `Program` annotation, if any.
    pub fn label(&self) -> Option<&str> {
        match self {
            RevError::Program { label, .. } => label.as_deref(),
            _ => None,
        }
    }
}

impl fmt::Display for RevError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevError::InvalidCell(c) => write!(f, "cell {c} is not allocated"),
            RevError::AliasViolation { dst, src } => {
                write!(f, "destination {dst} aliases source {src}")
            }
            RevError::DivideByZero { divisor } => {
                write!(f, "division by zero cell {divisor}")
            }
            RevError::NonInvertible { multiplier } => {
                write!(f, "scaling by zero cell {multiplier} is not invertible")
            }
            RevError::GarbageLeak { cell, value } => {
                write!(f, "freeing {cell} would leak garbage value {value}")
            }
            RevError::BitLimitExceeded { limit, observed } => {
                write!(f, "rational bit-width {observed} exceeds limit {limit}")
            }
            RevError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            RevError::Overlap(msg) => write!(f, "buffer overlap: {msg}"),
            RevError::CopyOverlap(msg) => write!(f, "copy leg overlap: {msg}"),
            RevError::CopyNotAdditive(msg) => {
                write!(f, "copy leg not accumulating: {msg}")
            }
            RevError::SingularPivot { row } => {
                write!(f, "zero pivot at row {row} (no-pivot elimination)")
            }
            RevError::Singular => write!(f, "matrix is singular"),
            RevError::ZeroPivot { row } => write!(f, "zero pivot at row {row}"),
            RevError::Parse(msg) => write!(f, "parse error: {msg}"),
            RevError::Program { path, label, source } => {
                write!(f, "{source} at {path}")?;
                if let Some(l) = label {
                    write!(f, " ({l})")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for RevError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            RevError::Program { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, RevError>;
