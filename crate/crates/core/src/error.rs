use thiserror::Error;

/// Errors from numeric evaluation of expressions.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol {0} in numeric evaluation")]
    UnboundSymbol(String),
    #[error("negative radicand {0} in numeric evaluation")]
    NegativeRadicand(f64),
}

/// Errors from chart-level geometric operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("charts do not match: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("interior product of a 0-form is undefined")]
    DegreeZero,
    #[error("chart map has no inverse components")]
    MissingInverse,
}

/// Errors from jet/bundle constructions.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum JetError {
    #[error("duplicate field name {0}")]
    DuplicateFieldName(String),
    #[error("vector field is not projectable: component {0} depends on fiber coordinates")]
    NotProjectable(String),
}

/// Errors from symmetry-side operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymmetryError {
    #[error("theory has no parametric metric field")]
    NoParametricMetric,
    #[error("vector field is neither tangent to the prolonged section nor vertical over Y")]
    WNotInEitherClass,
}

/// Errors from numeric sampling and verification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SampleError {
    #[error("failed to draw a non-degenerate sample after {0} attempts")]
    DegenerateSample(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
