use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("OBJ line {line}: {message}")]
    ObjParse { line: usize, message: String },

    #[error("OBJ line {line}: vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        count: usize,
    },

    #[error("triangle {triangle} is degenerate (area {area:e} mm^2)")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("point is at or behind the camera plane (camera z = {depth})")]
    BehindCamera { depth: f64 },

    #[error("undistortion did not converge after {iterations} iterations (residual {residual:e} px)")]
    UndistortNoConvergence { iterations: usize, residual: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("bad magic {found:?}, expected \"MLD1\"")]
    BadMagic { found: [u8; 4] },

    #[error("truncated MLD1 payload: {0}")]
    Truncated(String),

    #[error("layer invariant violated at pixel (row {row}, col {col}), layer {layer}: {message}")]
    LayerInvariant {
        row: usize,
        col: usize,
        layer: usize,
        message: &'static str,
    },

    #[error("pixel ({x}, {y}) is outside the {width}x{height} map")]
    PixelOutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("joint {joint} at pixel ({x}, {y}) is outside the map")]
    JointOutOfBounds { joint: usize, x: f64, y: f64 },

    #[error("empty crop")]
    EmptyCrop,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("taxonomy mismatch: {0}")]
    TaxonomyMismatch(String),

    #[error("unsupported taxonomy mapping {from} -> {to}")]
    UnsupportedTaxonomy { from: String, to: String },

    #[error("bone {edge} references joint {joint}, pose has {count} joints")]
    InvalidEdge {
        edge: usize,
        joint: usize,
        count: usize,
    },

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("all sampled pairs are degenerate (equal local timestamps)")]
    DegenerateSamples,

    #[error("consensus set has {size} pairs, need at least 2")]
    InsufficientConsensus { size: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal invariant failed; indicates a bug rather than bad input.
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
