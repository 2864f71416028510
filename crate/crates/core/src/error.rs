use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("edge path breaks at position {position}: {message}")]
    MalformedPath { position: usize, message: String },
    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),
    #[error("path is not closed")]
    NotClosed,
    #[error("circuit is trivial")]
    TrivialCircuit,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("inconsistent filtration: {0}")]
    InconsistentFiltration(String),
    #[error("Nielsen catalog incomplete: {0}")]
    CatalogIncomplete(String),
    #[error("no complete splitting found (stuck at edge {position})")]
    NotCompletelySplit { position: usize },
    #[error("axis violation: {0}")]
    AxisViolation(String),
    #[error("tuple is not admissible: {0}")]
    NotAdmissible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("f-invariant forest present: {0}")]
    InvariantForest(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid input at {location}: {message}")]
    Validation { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
