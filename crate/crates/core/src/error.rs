use thiserror::Error;

use crate::witness::ConstructionTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reported by the geometric kernels, constructions and verifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is below the unit tolerance")]
    ZeroVector { norm: f64 },
    #[error("points are antipodal")]
    AntipodalPair,
    #[error("points coincide")]
    CoincidentPair,
    #[error("basis is not orthonormal or has the wrong size: {0}")]
    DegenerateBasis(String),
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("points are not contained in an open hemisphere (margin {margin:e})")]
    NotInOpenHemisphere { margin: f64 },
    #[error("degenerate dimension: {0}")]
    DegenerateDimension(String),
    #[error("point is not on the boundary of the polytope")]
    NotOnBoundary,
    #[error("invalid face: {0}")]
    InvalidFace(String),

    #[error("light lies inside the body")]
    PointInsideBody,
    #[error("greatsphere meets the body at vertex {vertex} (<h, v> = {value:e})")]
    GreatsphereMeetsBody { vertex: usize, value: f64 },
    #[error("light {light} is off the greatsphere (<h, p> = {value:e})")]
    LightOffGreatsphere { light: usize, value: f64 },
    #[error("vertex {vertex} is not illuminated (best margin {best_margin:e})")]
    UncoveredVertex { vertex: usize, best_margin: f64 },
    #[error("face {face:?} is not illuminated (best margin {best_margin:e})")]
    UncoveredFace { face: Vec<usize>, best_margin: f64 },
    #[error("point is not in the interior of the polytope")]
    NotInterior,
    #[error("no cover with at most {max_size} lights on the candidate grid (greedy cover size: {greedy:?})")]
    GridTooCoarse { max_size: usize, greedy: Option<usize> },

    #[error("polygon is a parallelogram")]
    ParallelogramError,
    #[error("polygon is not strictly convex and counterclockwise: {0}")]
    NotConvex(String),
    #[error("witness construction failed after {retries} retries")]
    ConstructionFailed { retries: usize, trace: Box<ConstructionTrace> },

    #[error("vertex {vertex} is on or beyond the equator of the projection hemisphere")]
    VertexOnOrBeyondEquator { vertex: usize },

    #[error("not a polyhedral graph: {0}")]
    NotPolyhedralGraph(String),
    #[error("circle packing solver diverged after {iterations} iterations (max angle defect {defect:e})")]
    SolverDiverged { iterations: usize, defect: f64, trace: Vec<f64> },
    #[error("point is not on the face plane (residual {residual:e})")]
    PointNotOnFacePlane { residual: f64 },
    #[error("point is not in the relative interior of the ideal face polygon (distance {distance:e})")]
    PointNotInRelint { distance: f64 },
    #[error("face {face} is a parallelogram after normalization")]
    ParallelogramFace { face: usize },
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
