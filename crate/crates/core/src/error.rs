use std::io;

use thiserror::Error;

use crate::field::Felt;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no modulus polynomial is tabulated for e = {0}")]
    UnsupportedExtension(u32),
    #[error("no element satisfies the epsilon conditions for e = {0}; modulus table is broken")]
    NoEpsilon(u32),
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("element {0} does not lie in the subfield F_q")]
    NotInSubfield(Felt),
    #[error("arguments must be distinct")]
    EqualArguments,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("expected {expected} elements, found {found}")]
    Cardinality { expected: usize, found: usize },
    #[error("point lies on the unital")]
    PointOnUnital,
    #[error("point does not lie on the unital")]
    PointNotOnUnital,
    #[error("point lies on the line at infinity")]
    PointAtInfinity,
    #[error("point is not in canonical orbit form (1, y1, z2*eps)")]
    NotCanonical,
    #[error("point set contains part of a spread element but not all of it")]
    PartialSpreadElement,
    #[error("cone vertex lies in the solid of the base ovoid")]
    VertexInBaseSolid,
    #[error("conic is degenerate")]
    DegenerateConic,
    #[error("element order exceeds bound {0}")]
    OrderBoundExceeded(u64),
    #[error("search space of {candidates} candidates exceeds budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
