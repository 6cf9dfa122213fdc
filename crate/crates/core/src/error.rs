use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// |E - V0| sits on the rest-energy threshold, so q = 0 and the step
    /// coefficients are ill-conditioned. Perturb the momentum.
    #[error("degenerate channel: |E - V0| = mc^2 at E = {energy}, V0 = {depth}")]
    DegenerateChannel { energy: f64, depth: f64 },

    #[error("argument outside the bound-state domain: {0}")]
    OutOfDomain(String),

    #[error("bisection on [{lo}, {hi}] did not reach |g| < {tol} (|g| = {residual})")]
    RootNotConverged { lo: f64, hi: f64, tol: f64, residual: f64 },

    #[error("the scattering series diverges (|r_r r_l| = {ratio}); use a finite truncation order")]
    DivergentSeries { ratio: f64 },

    #[error("quadrature range captures only {captured} of the envelope weight")]
    QuadratureUnderflow { captured: f64 },

    #[error("finite-difference field grew by {growth:e} after {step} steps")]
    InstabilityDetected { step: usize, growth: f64 },

    #[error("configuration rejected: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
