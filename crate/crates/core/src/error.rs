//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by geometry, constitutive, model, and simulation code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Vector or matrix dimensions do not match the system dimension.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// The mass metric is not symmetric at the evaluated configuration.
    #[error("mass metric is not symmetric: |G[{i},{j}] - G[{j},{i}]| = {deviation:e}")]
    MetricNotSymmetric { i: usize, j: usize, deviation: f64 },

    /// The mass metric is not positive definite at the evaluated configuration.
    #[error("mass metric is not positive definite: eigenvalue {eigenvalue:e} <= 0")]
    MetricNotPositiveDefinite { eigenvalue: f64 },

    /// The contact-surface gradient vanishes where a projection is required.
    #[error("degenerate contact surface: gradient norm {norm:e} at the evaluated configuration")]
    DegenerateSurface { norm: f64 },

    /// The stick rows (or the stack of gradient and stick rows) lose rank.
    #[error("degenerate stick constraint: {0}")]
    DegenerateConstraint(String),

    /// A symmetric solve hit a pivot below the rank-deficiency threshold.
    #[error("rank-deficient system: pivot ratio {ratio:e} below {threshold:e}")]
    RankDeficient { ratio: f64, threshold: f64 },

    /// The state handed to the resolver does not lie on the contact surface.
    #[error("state is off the contact surface: s(q) = {s:e} exceeds tolerance {tol:e}")]
    OffSurface { s: f64, tol: f64 },

    /// The contact is grazing: no surface-orthogonal velocity to reflect.
    #[error("grazing contact: surface-orthogonal speed {speed:e} below threshold {threshold:e}")]
    Grazing { speed: f64, threshold: f64 },

    /// The state is on the surface but moving into the admissible region.
    #[error("state is separating from the surface (normal speed {speed:e} > 0)")]
    Separating { speed: f64 },

    /// A constitutive-law coefficient violates its admissible range.
    #[error("invalid contact-law coefficient: {0}")]
    InvalidLaw(String),

    /// A model builder received an inadmissible parameter.
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    /// The configuration left the domain on which the model is defined.
    #[error("configuration outside model domain: {0}")]
    ConfigurationDomain(String),

    /// An analytic oracle was requested for a model it does not cover.
    #[error("no analytic oracle for model '{0}'")]
    UnknownModel(String),

    /// Tangential ratio requested with a vanishing tangential norm.
    #[error("undefined ratio: |V_B| = 0 (use the stick branch directly)")]
    UndefinedRatio,

    /// A scenario or sweep referenced a parameter that does not exist.
    #[error("unknown parameter '{0}'")]
    UnknownSweepParameter(String),

    /// A scenario configuration violates its invariants.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Free-flight integration or detection was started in the inadmissible region.
    #[error("inadmissible state: s(q) = {s:e} <= 0 at t = {time}")]
    InadmissibleState { s: f64, time: f64 },

    /// Expression parsing or evaluation failed.
    #[error(transparent)]
    Dsl(#[from] crate::dsl::DslError),

    /// An error attributed to a specific simulation event.
    #[error("at impact {index} (t = {time}): {source}")]
    AtEvent {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dim(expected: usize, got: usize, context: &'static str) -> Self {
        Error::DimensionMismatch {
            expected,
            got,
            context,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
