use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-manifold mesh: edge ({0}, {1}) is shared by {2} triangles")]
    NonManifold(usize, usize, usize),

    #[error("degenerate triangle {index} (area {area:.3e} m^2)")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("obj parse error at line {line}: {message}")]
    ObjParse { line: usize, message: String },

    #[error("simulation diverged at step {step}: {detail}")]
    Diverged { step: u64, detail: String },

    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),

    #[error("feature field format error: {0}")]
    FieldFormat(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("missing landmark '{0}'")]
    MissingLandmark(String),

    #[error("metric applied to wrong asset: {0}")]
    MetricAssetMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
