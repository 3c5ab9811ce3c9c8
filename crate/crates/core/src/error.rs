use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("side {side} of triangle {tri} is not glued to exactly one other side")]
    UnmatchedSide { tri: usize, side: usize },
    #[error("gluing of triangle {tri} side {side} does not reverse orientation")]
    NonOrientable { tri: usize, side: usize },
    #[error("Euler characteristic {chi} does not match genus {genus}")]
    EulerMismatch { chi: i64, genus: usize },
    #[error("surface is not connected")]
    Disconnected,
    #[error("triangulation has no triangles")]
    Empty,
    #[error("cannot flip edge {0}: both of its sides lie in one triangle")]
    DegenerateFlip(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("unknown triangle {0}")]
    UnknownTriangle(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value for item {0}")]
    NonFinite(usize),
    #[error("shear coordinates do not sum to zero at vertex {vertex} (sum {sum:e})")]
    IncompatibleShear { vertex: usize, sum: f64 },
    #[error("edge {0} has both sides in one triangle")]
    DegenerateQuad(usize),
    #[error("flip limit of {0} exceeded")]
    FlipLimitExceeded(usize),
    #[error("no vertex keeps a horocycle")]
    NoDecoratedVertex,
    #[error("vertices must differ (got {0} twice)")]
    SameVertex(usize),
    #[error("horocycle distance candidates disagree ({0:e} vs {1:e})")]
    InconsistentDistance(f64, f64),
    #[error("lengths ({0}, {1}, {2}) violate the triangle inequality")]
    TriangleInequalityViolated(f64, f64, f64),
    #[error("triangle {0} lies outside the domain of the energy")]
    OutsideDomainA(usize),
    #[error("edge {edge} is not neutral (margin {margin:e})")]
    NotNeutral { edge: usize, margin: f64 },
    #[error("cone angles sum to {sum}, Gauss-Bonnet requires {required}")]
    GaussBonnetViolated { sum: f64, required: f64 },
    #[error("negative cone angle at vertex {0}")]
    NegativeConeAngle(usize),
    #[error("iteration limit reached after {iterations} iterations (gradient {gradient:e})")]
    IterLimit { iterations: usize, gradient: f64 },
    #[error("line search failed at iteration {iterations} (gradient {gradient:e})")]
    LineSearchFailure { iterations: usize, gradient: f64 },
    #[error("surface has genus {got}, expected {expected}")]
    WrongGenus { expected: usize, got: usize },
    #[error("at least {needed} vertices are required, got {got}")]
    TooFewVertices { needed: usize, got: usize },
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("layout does not close up (residual {0:e})")]
    LayoutInconsistent(f64),
    #[error("polyhedron is not convex (margin {0:e})")]
    ConvexityViolated(f64),
    #[error("wrong realization kind: {0}")]
    WrongKind(String),
    #[error("face {0} is not a triangle")]
    NonTriangleFace(usize),
    #[error("mesh is not closed: {0}")]
    OpenMesh(String),
    #[error("edge between vertices {0} and {1} has zero length")]
    ZeroLengthEdge(usize, usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
