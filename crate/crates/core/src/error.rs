use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("s must exceed −1/2 (got {0})")]
    InvalidS(f64),

    #[error("Gamma has a pole at {0}")]
    GammaPole(f64),

    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("{what} is ill-conditioned: estimated relative error {estimate:.3e}")]
    Conditioning { what: &'static str, estimate: f64 },

    #[error("seed residual {residual:.3e} at z = {z} exceeds tolerance")]
    SeedQuality { z: f64, residual: f64 },

    #[error("step size underflow at z = {0}")]
    StepUnderflow(f64),

    #[error("derivative order {order} exceeds the available maximum {max}")]
    Order { order: usize, max: usize },

    #[error("moment exponent out of range: {0}")]
    MomentRange(String),

    #[error("quadrature failed to reach tolerance: {0}")]
    Quadrature(String),

    #[error("characteristic-function tail did not decay: {0}")]
    Tail(String),

    #[error("tail bound {bound:.3e} exceeds requested tolerance {tol:.3e}")]
    Cutoff { bound: f64, tol: f64 },
}

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { func, detail: detail.into() }
}

/// Checks `s > -1/2`, the standing assumption of every routine in the crate.
pub fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s > -0.5 {
        Ok(())
    } else {
        Err(Error::InvalidS(s))
    }
}
