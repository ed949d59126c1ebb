use thiserror::Error;

/// Errors raised by model construction, divergence computations, solvers,
/// and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two vectors that must have equal length do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A mass point is positive under one hypothesis and zero under the other.
    #[error("absolute continuity violated at index {index}")]
    AbsoluteContinuityViolation { index: usize },

    /// Input outside the legal domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Induced output distributions coincide, so both divergences vanish and
    /// the sequential test gains no information per sample.
    #[error("degenerate channel: d0={d0}, d1={d1}")]
    DegenerateChannel { d0: f64, d1: f64 },

    /// Exhaustive enumeration would exceed the configured budget.
    #[error("enumeration size {required} exceeds budget {budget}")]
    SizeLimit { required: u128, budget: u128 },

    /// A threshold bucket received no alphabet point.
    #[error("quantizer level {level} has an empty preimage")]
    EmptyLevel { level: usize },

    /// Closed-form error probabilities left the small-cost regime where the
    /// approximation is meaningful.
    #[error("cost too large for the asymptotic regime: alpha*={alpha}, beta*={beta}")]
    RegimeError { alpha: f64, beta: f64 },

    /// The KL ordering required by the construction does not hold.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// A mixture argument is effectively a single deterministic quantizer.
    #[error("mixture is effectively deterministic")]
    NotRandomized,

    /// No periodic plan up to the requested length satisfied both strict
    /// divergence inequalities.
    #[error("no admissible period found (best margin seen: {best_margin})")]
    NotFound { best_margin: f64 },

    /// Value iteration hit the iteration cap before reaching tolerance.
    #[error("no convergence after {iterations} sweeps (last sup-change {last_change})")]
    NoConvergence { iterations: usize, last_change: f64 },

    /// A posterior update saw zero predictive mass.
    #[error("zero predictive mass in posterior update")]
    ZeroMass,

    /// One or more simulation trials hit the per-trial step cap.
    #[error("{capped} trial(s) hit the step cap of {cap}")]
    NonTermination { capped: usize, cap: u64 },

    /// No candidate reassignment strictly improved the quantizer.
    #[error("no improving move: {0}")]
    NoImprovement(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
