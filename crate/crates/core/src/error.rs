use thiserror::Error;

use crate::filtration::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid event tree: {0}")]
    InvalidTree(String),

    #[error("invalid stopping time: {0}")]
    InvalidStoppingTime(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("T-system is inconsistent at node {node}: {left} != {right}")]
    ConsistencyViolation { node: NodeId, left: f64, right: f64 },

    #[error("T-system has no entry for the constant time index {0}")]
    MissingConstantTime(usize),

    #[error("value is not measurable at the stopping time: it varies within the atom of node {node}")]
    Measurability { node: NodeId },

    #[error("consumption plan has negative increment {value} at node {node}")]
    NegativeIncrement { node: NodeId, value: f64 },

    #[error("state price is negative ({value}) at node {node}")]
    NegativePrice { node: NodeId, value: f64 },

    #[error("atom of node {node} has zero probability")]
    DegenerateAtom { node: NodeId },

    #[error("price functional is not representable by a state price: {0}")]
    NotRepresentable(String),

    #[error("refinement mismatch: {0}")]
    RefinementMismatch(String),
}
