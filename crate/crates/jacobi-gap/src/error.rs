use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain documented for the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The right-hand side of the Painlevé system left its solution branch:
    /// either `h' = 0` exactly or the radicand went negative past the
    /// configured clamp.
    #[error("singular right-hand side at t = {t}: {detail}")]
    SingularRhs { t: f64, detail: String },

    /// The adaptive integrator drove the step size below the representable
    /// minimum. `t_last` is the last point that was still accepted.
    #[error("step size underflow at t = {t_last}")]
    StepFailure { t_last: f64 },

    /// The coefficient recursion could not isolate `h_k`: the extracted
    /// polynomial `p_k(X)` was identically zero, degenerate, or had no
    /// rational root.
    #[error("coefficient recursion stalled at k = {k}: {detail}")]
    RecursionStall { k: usize, detail: String },

    /// Accept-reject sampling kept finding density values above the envelope
    /// even after repeated envelope inflation.
    #[error("sampling envelope violated after {restarts} restarts")]
    EnvelopeViolation { restarts: u32 },

    /// No seam with a small enough continuity gap exists between adjacent
    /// methods when gluing a full-interval grid.
    #[error("no glue seam with gap <= {max_gap} (best found: {best_gap})")]
    GlueFailure { best_gap: f64, max_gap: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
