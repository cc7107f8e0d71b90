use thiserror::Error;

/// Errors raised by the combinatorial and numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("invalid polytope descriptor `{0}`")]
    InvalidDescriptor(String),

    #[error("expected {expected} points, got {got}")]
    WrongCardinality { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty domain")]
    EmptyDomain,

    #[error("weight function is not total: missing point {0}")]
    MissingWeight(String),

    #[error("point {0} is not a lattice point of the domain")]
    UnknownPoint(String),

    #[error("point {0} is not an interior lattice point")]
    NotInterior(String),

    #[error("too few lattice points ({got}) for a full-dimensional subdivision (need {need})")]
    TooFewPoints { got: usize, need: usize },

    #[error("brute force guard exceeded: {got} points (limit {limit})")]
    SizeGuard { got: usize, limit: usize },

    #[error("malformed target subdivision: {0}")]
    MalformedTarget(String),

    #[error("subdivision and weight function do not match: {0}")]
    Mismatch(String),

    #[error("dual cell is not a vertex (dimension {0})")]
    NotAVertex(usize),

    #[error("dual complex is not maximal")]
    NotMaximal,

    #[error("translate restriction fails at interior point {0}")]
    RestrictionFails(String),

    #[error("root finding failed: {0}")]
    NoRoots(String),

    #[error("singular frame: all denominators vanish at the evaluation point")]
    SingularFrame,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no samples landed in the requested region: {0}")]
    EmptyRegion(String),

    #[error("fiber point not found: {0}")]
    FiberNotFound(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
