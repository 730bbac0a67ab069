use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation contract (bad shapes, invalid options).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A field left the admissible set of a model.
    #[error("inadmissible state at node {node}: {detail}")]
    Inadmissible { node: usize, detail: String },

    /// Constraint gradients are (numerically) linearly dependent, so the
    /// multiplier system and the chart split are undefined.
    #[error("constraint gradients linearly dependent at evaluation point (min Gram eigenvalue {min_eig:.3e}); surjectivity of the constraint derivative failed")]
    DegenerateConstraint { min_eig: f64 },

    /// Newton retraction onto the constraint set did not converge.
    #[error("retraction failed after {iterations} iterations, residual {residual:.3e}")]
    RetractionFailed { iterations: usize, residual: f64 },

    /// The chart solve left its trust region or ran out of iterations.
    #[error("chart domain exceeded: {0}")]
    ChartDomainExceeded(String),

    /// The restriction of the constraint derivative to the complement space
    /// became singular away from the base point.
    #[error("chart degenerate: {0}")]
    ChartDegeneracy(String),

    /// An iterative linear-algebra kernel hit its iteration cap.
    #[error("{kernel} did not converge within {iterations} sweeps")]
    NoConvergence {
        kernel: &'static str,
        iterations: usize,
    },

    /// Critical-point search failed; carries the last iterate.
    #[error("critical point search failed: projected gradient {pgrad:.3e} after {iterations} iterations")]
    SearchFailure {
        last: Vec<f64>,
        pgrad: f64,
        iterations: usize,
    },

    /// Too few usable samples for an exponent fit.
    #[error("exponent fit needs at least {needed} usable samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// The sample set has too little energy-gap spread for a stable fit.
    #[error("ill-conditioned fit: energy gap spread {spread:.3e} below required factor 10")]
    IllConditionedFit { spread: f64 },

    /// Fewer than half of the requested samples could be produced.
    #[error("sampling failed: {succeeded} of {requested} samples succeeded ({failures} retraction/admissibility failures)")]
    SamplingFailure {
        requested: usize,
        succeeded: usize,
        failures: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
