use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root finder did not reach its tolerance within the iteration cap.
    #[error("{what}: no convergence after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// The function values at the bracket endpoints have the same sign.
    #[error("{what}: no sign change on [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    /// The potential `min{eps(|x|^-gamma - 1), 1}` is clamped at this radius.
    #[error("radius {radius} lies inside the saturated ball of radius {rho_eps}")]
    Saturated { radius: f64, rho_eps: f64 },

    /// Not enough usable data for a fit or search.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure_domain {
    ($cond:expr, $($arg:tt)+) => {
        // written as a negation so that NaN arguments fail the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err($crate::error::Error::Domain(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_domain;
