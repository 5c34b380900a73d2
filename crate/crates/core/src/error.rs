use thiserror::Error;

/// Errors raised by the metric estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("gradient of the defining function vanishes (|grad rho| = {norm:e})")]
    GradientVanishes { norm: f64 },
    #[error("point is not on the boundary (rho = {rho:e})")]
    NotOnBoundary { rho: f64 },
    #[error("base point lies outside the domain (rho = {rho:e}); delta too large")]
    OutsideDomain { rho: f64 },
    #[error("projection onto the complex tangent space vanishes")]
    ZeroProjection,
    #[error("ray center lies outside the domain (rho = {rho:e})")]
    CenterOutside { rho: f64 },
    #[error("no boundary crossing found along the ray within the bounding box")]
    RayUnbounded,
    #[error("all Taylor coefficients up to order {cap} vanish")]
    TypeExceedsCap { cap: usize },
    #[error("contact point is not aligned with the probed complex line")]
    FrameMisaligned,
    #[error("sampled supremum unstable: {first:e} vs {second:e}")]
    NormalizationUnstable { first: f64, second: f64 },
    #[error("negative Levi form {value:e} at the base point")]
    NegativeLevi { value: f64 },
    #[error("point lies outside the unit disc (|z| = {modulus})")]
    OutsideDisc { modulus: f64 },
    #[error("polynomial is not admissible: f'' = {value:e} at x = {x}")]
    NotAdmissible { x: f64, value: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, MetricError>;
