//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("PLY parse error at line {line}: {message}")]
    PlyParse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid file format: {0}")]
    InvalidFormat(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle (area below threshold)")]
    DegenerateTriangle,

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no supervised points (all labels unannotated)")]
    NoSupervisedPoints,

    #[error("non-finite gradient encountered")]
    NonFiniteGradient,

    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },

    #[error("no annotated vertices to evaluate")]
    NoAnnotatedVertices,

    #[error("object placement failed after {0} attempts")]
    PlacementFailed(usize),
}
