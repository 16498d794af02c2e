use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge ({u}, {v}) has invalid weight {w}")]
    InvalidWeight { u: usize, v: usize, w: f64 },
    #[error("invalid cut: {0}")]
    InvalidCut(&'static str),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph needs at least two vertices to have a cut")]
    TooSmall,
    #[error("invalid contraction map: {0}")]
    InvalidContraction(&'static str),
    #[error("invalid spanning tree: {0}")]
    InvalidTree(&'static str),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{what} limited to n <= {limit}, got n = {n}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        n: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("skeleton stayed disconnected after {0} attempts")]
    SkeletonDisconnected(usize),
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
