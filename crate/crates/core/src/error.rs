use thiserror::Error;

use crate::ginverse::Route;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("entry count {found} does not match shape {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("weight matrix is numerically zero")]
    ZeroWeight,

    #[error("matrix is numerically singular (rank {rank} < {dim})")]
    Singular { rank: usize, dim: usize },

    #[error("subspaces are not complementary (dims {range_dim} + {null_dim} in ambient {ambient}, rank {rank})")]
    NotComplementary {
        range_dim: usize,
        null_dim: usize,
        ambient: usize,
        rank: usize,
    },

    #[error("no outer inverse with the prescribed range and null space: {0}")]
    NotConsistent(String),

    #[error("rank sequence did not stabilize within {max_index} powers")]
    IndexOverflow { max_index: usize },

    #[error("index {index} exceeds 1; matrix is not group invertible")]
    IndexTooLarge { index: usize },

    #[error("canonical decomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("route {route} failed: {source}")]
    Route {
        route: Route,
        #[source]
        source: Box<Error>,
    },

    #[error("equivalence chain disagreement: {0}")]
    EquivalenceViolation(String),

    #[error("random draw rejected {attempts} times: {reason}")]
    DegenerateDraw { attempts: usize, reason: String },

    #[error("invalid numeric context: {0}")]
    InvalidContext(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for failures caused by rank decisions or unstable decompositions
    /// rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IndexOverflow { .. }
            | Error::DecompositionFailure(_)
            | Error::Singular { .. }
            | Error::NotComplementary { .. }
            | Error::NotConsistent(_)
            | Error::EquivalenceViolation(_)
            | Error::DegenerateDraw { .. } => true,
            Error::Route { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_route(self, route: Route) -> Self {
        Error::Route {
            route,
            source: Box::new(self),
        }
    }
}
