use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes, layouts or grids that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A name (field, model, parameter, block) that does not resolve.
    #[error("unknown {0}")]
    Lookup(String),

    /// Values outside the domain of a functional (e.g. log of a nonpositive temperature).
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violating the model's constraints; one entry per violation.
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Non-finite values produced by the time integrator.
    #[error("integration diverged at step {step} (t = {t}): non-finite state")]
    Divergence { step: usize, t: f64 },

    /// A domain error raised while integrating.
    #[error("at step {step} (t = {t}): {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors that indicate invalid input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Precondition(_) | Error::Lookup(_) | Error::Structural(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
