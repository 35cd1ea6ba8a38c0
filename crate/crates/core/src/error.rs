//! Crate-wide error type.
//!
//! One enum keeps the failure taxonomy small and lets the CLI map variants
//! onto exit codes without downcasting.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An operator or state was built on a space of the wrong kind.
    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch { expected: String, found: String },

    /// A parameter is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested representation would exceed the configured size cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A matrix that must be a density matrix failed trace, Hermiticity,
    /// or positivity checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The adaptive integrator drove the step size below the representable
    /// floor (stiff or ill-posed problem).
    #[error("stiffness: step size underflow at t = {t:.6e} (h = {h:.3e})")]
    Stiffness { t: f64, h: f64 },

    /// A trajectory point violated the CPTP integrity guards beyond
    /// tolerance.
    #[error(
        "integrity: positivity violated at t = {t:.6e} \
         (min eigenvalue {min_eigenvalue:.3e}, trace deviation {trace_deviation:.3e})"
    )]
    Integrity {
        t: f64,
        min_eigenvalue: f64,
        trace_deviation: f64,
    },

    /// Not enough data points for a statistic or fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A temperature is undefined for the given occupation.
    #[error("undefined temperature: mean occupation {0} is not positive")]
    UndefinedTemperature(f64),

    /// A state fit has no feasible parameters.
    #[error("fit infeasible: {0}")]
    FitInfeasible(String),

    /// An error from a lower layer, annotated with the injection cycle in
    /// which it occurred.
    #[error("cycle {cycle}: {source}")]
    AtCycle {
        cycle: usize,
        #[source]
        source: Box<Error>,
    },

    /// An error from a lower layer, annotated with sweep-grid coordinates.
    #[error("{context}: {source}")]
    InContext {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_cycle(self, cycle: usize) -> Self {
        Error::AtCycle {
            cycle,
            source: Box::new(self),
        }
    }

    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::InContext {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
