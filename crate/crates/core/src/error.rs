use alloc::string::String;
use alloc::vec::Vec;

/// Everything that can go wrong while declaring or computing.
///
/// Messages name coordinates and symbols by their rendered form so that front
/// ends can show them verbatim.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("operands live on different coordinate charts")]
    ChartMismatch,
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("unknown coefficient symbol `{0}`")]
    UnknownSymbol(String),
    #[error("name `{0}` is declared twice")]
    DuplicateName(String),
    #[error("symbol `{symbol}` has {expected} index slot(s), got {found} indices")]
    IndexArity { symbol: String, expected: usize, found: usize },
    #[error("derivative index {index} does not name a degree-0 coordinate (there are {available})")]
    DerivativeIndex { index: u32, available: usize },
    #[error("invalid index symmetry on `{symbol}`: {reason}")]
    SymmetryDeclaration { symbol: String, reason: String },
    #[error("{context}: expected degree {expected}, found {found}")]
    DegreeMismatch { context: String, expected: u32, found: u32 },
    #[error("{0}: polynomial is not homogeneous")]
    Inhomogeneous(String),
    #[error("pair ({left}, {right}) has degree sum {sum}, but the structure has degree {degree}")]
    DegreeSum { left: String, right: String, sum: u32, degree: u32 },
    #[error("coordinate `{0}` appears in more than one pairing")]
    DuplicatePairing(String),
    #[error("coordinate `{0}` is not paired")]
    Unpaired(String),
    #[error("pairing weight {0}")]
    Weight(String),
    #[error("cannot substitute for `{0}`: coefficient functions depend on it")]
    BaseSubstitution(String),
    #[error("relation is not terminating: leading term `{lead}` does not dominate `{term}`")]
    RelationOrder { lead: String, term: String },
    #[error("relation {0}")]
    Relation(String),
    #[error("twisting did not terminate within order {max_order}")]
    TwistNotTerminating { max_order: usize },
    #[error("maximum twisting order must be at least 1")]
    InvalidMaxOrder,
    #[error("classical master equation fails: {{theta, theta}} = {0}")]
    MasterEquation(String),
    #[error("lagrangian: {0}")]
    Lagrangian(String),
    #[error("alpha must not depend on lagrangian coordinate `{0}`")]
    AlphaNotFiberConstant(String),
    #[error("restricted derived bracket is degenerate: {0}")]
    Degenerate(String),
    #[error("basis elements `{left}` and `{right}` do not commute: their bracket is {value}")]
    NotCommuting { left: String, right: String, value: String },
    #[error("current function has degree {degree}, above the bound {bound}")]
    CurrentDegree { degree: u32, bound: u32 },
    #[error("{} table entries failed; first at ({}, {}): {}", .0.len(), .0[0].row, .0[0].col, .0[0].error)]
    Table(Vec<EntryError>),
}

/// A failed entry of a commutator table (0-based positions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryError {
    pub row: usize,
    pub col: usize,
    pub error: Error,
}
