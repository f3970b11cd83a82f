use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("point outside evaluation domain: {0}")]
    Domain(String),

    #[error("sampling failed for {spec}: no accepted point after {attempts} attempts")]
    Sampling { spec: String, attempts: usize },

    #[error("moment {index} diverges on {spec}")]
    Divergent { spec: String, index: String },

    #[error("quadrature budget exhausted: best value {best} with error estimate {abs_error}")]
    Accuracy { best: f64, abs_error: f64 },

    #[error("analytic and numeric convergence evidence disagree for {index}: {detail}")]
    Consistency { index: String, detail: String },

    #[error("non-finite potential value at stencil point {point}")]
    Stencil { point: String },

    #[error("degenerate metric at {point}: smallest eigenvalue {min_eigenvalue}")]
    DegenerateMetric { point: String, min_eigenvalue: f64 },

    #[error("numerics: {0}")]
    Numerics(String),

    #[error("kernel model is empty: no convergent moment up to degree {truncation}")]
    EmptyKernel { truncation: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
